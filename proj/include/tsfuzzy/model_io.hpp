#pragma once

// Plain-text model format, version 1:
//
//   tsfuzzy-model 1
//   input_dim <n>
//   rule_count <C>
//   meta <key> <value...>        (zero or more, value runs to end of line)
//   rule <i>
//   mean <n numbers>
//   width <n numbers>
//   consequent <n+1 numbers>
//   end
//
// Numbers are written in shortest round-trip form, so read(write(m)) == m bit for bit.

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tsfuzzy/core.hpp"

namespace tsfuzzy {

inline constexpr int model_format_version = 1;

using ModelMetadata = std::map<std::string, std::string>;

struct LoadedModel {
    TsModel model;
    ModelMetadata meta;
};

inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("not a number: '" + std::string(s) + "'");
    return v;
}

inline void write_model(std::ostream& os, const TsModel& model, const ModelMetadata& meta = {})
{
    os << "tsfuzzy-model " << model_format_version << '\n';
    os << "input_dim " << model.input_dim() << '\n';
    os << "rule_count " << model.rule_count() << '\n';
    for (const auto& [key, value] : meta) {
        if (key.empty() || key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos)
            throw DataError("invalid metadata entry '" + key + "'");
        os << "meta " << key << ' ' << value << '\n';
    }
    for (std::size_t i = 0; i < model.rule_count(); ++i) {
        const auto& r = model.rule(i);
        os << "rule " << i << '\n';
        os << "mean";
        for (const auto& mf : r.premise)
            os << ' ' << format_double(mf.mean);
        os << "\nwidth";
        for (const auto& mf : r.premise)
            os << ' ' << format_double(mf.width);
        os << "\nconsequent";
        for (Eigen::Index j = 0; j < r.consequent.size(); ++j)
            os << ' ' << format_double(r.consequent(j));
        os << "\nend\n";
    }
}

inline std::string model_to_string(const TsModel& model, const ModelMetadata& meta = {})
{
    std::ostringstream os;
    write_model(os, model, meta);
    return os.str();
}

namespace detail {

inline std::vector<double> read_numbers(std::istringstream& ls)
{
    std::vector<double> out;
    std::string tok;
    while (ls >> tok)
        out.push_back(parse_double(tok));
    return out;
}

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    // Next non-blank line, split into keyword and the rest.
    bool next(std::string& keyword, std::istringstream& rest)
    {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos)
                continue;
            rest.clear();
            rest.str(line);
            rest >> keyword;
            return true;
        }
        return false;
    }

    void expect(const std::string& want, std::istringstream& rest)
    {
        std::string kw;
        if (!next(kw, rest))
            fail("unexpected end of model file, expected '" + want + "'");
        if (kw != want)
            fail("expected '" + want + "', found '" + kw + "'");
    }

    std::vector<double> numbers(std::istringstream& rest) const
    {
        try {
            return read_numbers(rest);
        } catch (const DataError& e) {
            fail(e.what());
        }
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw DataError("model file line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& is_;
    int line_no_ = 0;
};

} // namespace detail

inline LoadedModel read_model(std::istream& is)
{
    detail::LineReader reader(is);
    std::istringstream rest;
    std::string kw;

    reader.expect("tsfuzzy-model", rest);
    int version = 0;
    if (!(rest >> version) || version != model_format_version)
        reader.fail("unsupported model format version");

    std::size_t n = 0;
    std::size_t c = 0;
    reader.expect("input_dim", rest);
    if (!(rest >> n) || n == 0)
        reader.fail("bad input_dim");
    reader.expect("rule_count", rest);
    if (!(rest >> c) || c == 0)
        reader.fail("bad rule_count");

    LoadedModel out;
    std::vector<TsRule> rules;
    while (reader.next(kw, rest)) {
        if (kw == "meta") {
            std::string key;
            rest >> key;
            std::string value;
            std::getline(rest >> std::ws, value);
            out.meta[key] = value;
        } else if (kw == "rule") {
            std::size_t idx = 0;
            if (!(rest >> idx) || idx != rules.size())
                reader.fail("rules must be numbered consecutively from 0");
            reader.expect("mean", rest);
            const auto means = reader.numbers(rest);
            reader.expect("width", rest);
            const auto widths = reader.numbers(rest);
            reader.expect("consequent", rest);
            const auto theta = reader.numbers(rest);
            reader.expect("end", rest);
            if (means.size() != n || widths.size() != n || theta.size() != n + 1)
                reader.fail("rule " + std::to_string(idx) + " has the wrong number of parameters");
            TsRule r;
            for (std::size_t j = 0; j < n; ++j)
                r.premise.push_back({means[j], widths[j]});
            r.consequent = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
            rules.push_back(std::move(r));
        } else {
            reader.fail("unknown keyword '" + kw + "'");
        }
    }
    if (rules.size() != c)
        throw DataError("model file declares " + std::to_string(c) + " rules but contains " +
                        std::to_string(rules.size()));
    out.model = TsModel(std::move(rules));
    return out;
}

inline LoadedModel model_from_string(const std::string& text)
{
    std::istringstream is(text);
    return read_model(is);
}

} // namespace tsfuzzy
