#pragma once

// The five experiment commands. Each one runs every (algorithm, stride,
// normalization) combination the configuration asks for, writes its files
// into the output directory and finishes with a manifest.
//
// Combination labels look like GK_s5_norm: the algorithm, the scheme stride
// in base intervals and dim (original units) or norm (min-max scaled).

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tsfuzzy/dataio.hpp"
#include "tsfuzzy/experiment/config.hpp"
#include "tsfuzzy/experiment/output.hpp"
#include "tsfuzzy/identify.hpp"
#include "tsfuzzy/metrics.hpp"
#include "tsfuzzy/model_io.hpp"
#include "tsfuzzy/validity.hpp"

namespace tsfuzzy {

struct Combination {
    Algorithm algorithm = Algorithm::gk;
    int stride = 1;
    bool normalized = false;

    std::string label() const
    {
        return to_string(algorithm) + "_s" + std::to_string(stride) + (normalized ? "_norm" : "_dim");
    }
};

inline std::vector<Combination> combinations(const ExperimentConfig& cfg)
{
    std::vector<Combination> out;
    for (Algorithm a : cfg.algorithms)
        for (int s : cfg.strides)
            for (bool n : cfg.normalization_flags())
                out.push_back({a, s, n});
    return out;
}

inline EventSeries load_source(const EventSource& src, const ExperimentConfig& cfg)
{
    if (!src.synthetic())
        return load_event_csv(src.path, cfg.base_interval);
    const double duration = src.duration > 0.0 ? src.duration : cfg.synth_duration;
    return synth_storm(src.seed, duration, cfg.base_interval, cfg.synth);
}

inline EventSeries require_source(const std::optional<EventSource>& src, const char* key, const ExperimentConfig& cfg)
{
    if (!src)
        throw ConfigError(std::string("config key '") + key + "' is required for this command");
    try {
        return load_source(*src, cfg);
    } catch (const Error& e) {
        rethrow_with_context(e, std::string(key) + " event: ");
    }
}

inline ChannelLags resolve_lags(const ExperimentConfig& cfg, const EventSeries& train)
{
    if (cfg.lags)
        return *cfg.lags;
    return uniform_lag(estimate_lag(train, cfg.max_lag).shared);
}

inline std::string lags_text(const ChannelLags& l)
{
    return std::to_string(l[0]) + ' ' + std::to_string(l[1]) + ' ' + std::to_string(l[2]);
}

inline ChannelLags parse_lags_text(const std::string& t)
{
    std::istringstream is(t);
    ChannelLags l{};
    for (auto& x : l)
        if (!(is >> x) || x < 0)
            throw DataError("malformed lag record '" + t + "'");
    return l;
}

/// Runs `fn`, prefixing any error with the combination label.
template <typename Fn>
auto labelled(const Combination& c, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        rethrow_with_context(e, "[" + c.label() + "] ");
    }
}

// ---------------------------------------------------------------------------
// synth

/// Writes storm_<seed>.csv generated from the synth.* settings.
inline EventSeries cmd_synth(const ExperimentConfig& cfg)
{
    cfg.validate();
    OutputDir out(cfg.out);
    const EventSeries s = synth_storm(cfg.seed, cfg.synth_duration, cfg.base_interval, cfg.synth);
    std::ostringstream os;
    write_event_csv(os, s);
    out.write("storm_" + std::to_string(cfg.seed) + ".csv", os.str());
    out.write_manifest("synth", cfg);
    return s;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOutcome {
    Combination combination;
    ValidityReport report;
};

/// Validity sweep C = 2..c_max on the training set of every combination.
inline std::vector<SweepOutcome> cmd_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    const EventSeries train = require_source(cfg.train, "train", cfg);
    const ChannelLags lags = resolve_lags(cfg, train);
    OutputDir out(cfg.out);
    std::vector<SweepOutcome> results;
    std::ostringstream summary;
    summary << "combination,consensus";
    for (auto v : all_validity_indices)
        summary << ',' << to_string(v);
    summary << '\n';
    for (const Combination& c : combinations(cfg)) {
        ValidityReport rep = labelled(c, [&] {
            const SupervisedSet set = build_supervised(train, lags, c.stride, c.normalized);
            return sweep_clusters(set.joined(), cfg.cluster_config(c.algorithm), 2, cfg.c_max);
        });
        std::ostringstream v, o;
        write_validity_csv(v, rep);
        write_optima_csv(o, rep);
        out.write("validity_" + c.label() + ".csv", v.str());
        out.write("optima_" + c.label() + ".csv", o.str());
        summary << c.label() << ',' << rep.consensus;
        for (int opt : rep.optimum)
            summary << ',' << opt;
        summary << '\n';
        results.push_back({c, std::move(rep)});
    }
    out.write("sweep_summary.csv", summary.str());
    out.write_manifest("sweep", cfg);
    return results;
}

// ---------------------------------------------------------------------------
// train

struct TrainOutcome {
    Combination combination;
    FitResult fit;
    ModelMetadata metadata;
};

/// Fits one model per combination and writes model_<label>.tsm, fit_<label>.csv and trace_<label>.csv.
inline std::vector<TrainOutcome> cmd_train(const ExperimentConfig& cfg)
{
    cfg.validate();
    const EventSeries train = require_source(cfg.train, "train", cfg);
    const ChannelLags lags = resolve_lags(cfg, train);
    OutputDir out(cfg.out);
    std::vector<TrainOutcome> results;
    for (const Combination& c : combinations(cfg)) {
        TrainOutcome r{c, {}, {}};
        const SupervisedSet set = labelled(c, [&] { return build_supervised(train, lags, c.stride, c.normalized); });
        FitConfig fc;
        fc.clustering = cfg.cluster_config(c.algorithm);
        fc.sweep_max = cfg.sweep ? cfg.c_max : 0;
        r.fit = labelled(c, [&] { return fit_model(set.joined(), fc); });

        r.metadata["algorithm"] = to_string(c.algorithm);
        r.metadata["stride"] = std::to_string(c.stride);
        r.metadata["base_interval"] = format_double(cfg.base_interval);
        r.metadata["normalization"] = encode_normalization(set.norm);
        r.metadata["lags"] = lags_text(lags);
        r.metadata["seed"] = std::to_string(cfg.seed);
        r.metadata["config_hash"] = config_hash(cfg);

        out.write("model_" + c.label() + ".tsm", model_to_string(r.fit.model, r.metadata));
        std::ostringstream fit, trace;
        write_fit_report_csv(fit, r.fit.report, c.label());
        write_trace_csv(trace, r.fit.clustering.trace, cfg.xi);
        out.write("fit_" + c.label() + ".csv", fit.str());
        out.write("trace_" + c.label() + ".csv", trace.str());
        if (r.fit.sweep) {
            std::ostringstream v;
            write_validity_csv(v, *r.fit.sweep);
            out.write("validity_" + c.label() + ".csv", v.str());
        }
        results.push_back(std::move(r));
    }
    out.write_manifest("train", cfg);
    return results;
}

// ---------------------------------------------------------------------------
// evaluate

inline bool normalized_label(const std::string& algorithm)
{
    return algorithm.size() >= 4 && algorithm.compare(algorithm.size() - 4, 4, " (N)") == 0;
}

struct ForecastRow {
    std::string model;     ///< combination label
    std::string algorithm; ///< "GK", or "GK (N)" for a model trained on normalized data
    int scheme = 1;        ///< stride in base intervals
    double horizon = 0.0;  ///< seconds ahead
    std::string split = "validation";
    MetricSet metrics;
};

inline constexpr std::string_view forecast_header = "algorithm,scheme,horizon_s,split,RMSE,VE,CE,R";

inline void write_forecast_report(std::ostream& os, const std::vector<ForecastRow>& rows)
{
    os << forecast_header << '\n';
    for (const auto& r : rows)
        os << r.algorithm << ',' << r.scheme << ',' << format_double(r.horizon) << ',' << r.split << ','
           << format_double(r.metrics.rmse) << ',' << format_double(r.metrics.ve) << ','
           << format_double(r.metrics.ce) << ',' << format_double(r.metrics.r) << '\n';
}

inline std::vector<std::filesystem::path> model_files(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw DataError("model directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("model_", 0) == 0 && e.path().extension() == ".tsm")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw DataError("no model_*.tsm files in '" + dir.string() + "'");
    return files;
}

namespace detail {

inline const std::string& meta_value(const ModelMetadata& meta, const std::string& key, const std::string& file)
{
    const auto it = meta.find(key);
    if (it == meta.end())
        throw DataError(file + ": model metadata lacks '" + key + "'");
    return it->second;
}

} // namespace detail

/// Scores every model in `models` on the validation event. Metrics of a
/// normalized model are computed on the normalized scale; the prediction
/// files carry both scales.
inline std::vector<ForecastRow> cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& models)
{
    cfg.validate();
    const EventSeries valid = require_source(cfg.validation, "validation", cfg);
    OutputDir out(cfg.out);
    std::vector<ForecastRow> rows;
    const auto flags = cfg.normalization_flags();
    for (const auto& path : model_files(models)) {
        const std::string file = path.filename().string();
        std::ifstream is(path);
        LoadedModel lm;
        try {
            lm = read_model(is);
        } catch (const Error& e) {
            rethrow_with_context(e, file + ": ");
        }
        const Combination c{parse_algorithm(detail::meta_value(lm.meta, "algorithm", file)),
                            detail::parse_int(detail::meta_value(lm.meta, "stride", file)),
                            decode_normalization(detail::meta_value(lm.meta, "normalization", file)).dimensional == false};
        if (std::find(cfg.strides.begin(), cfg.strides.end(), c.stride) == cfg.strides.end())
            throw ConfigError(file + ": model scheme stride " + std::to_string(c.stride) +
                              " is not among the configured strides");
        if (std::find(flags.begin(), flags.end(), c.normalized) == flags.end())
            throw ConfigError(file + ": model normalization does not match normalization = " +
                              to_string(cfg.normalization));
        const double trained_base = detail::parse_real(detail::meta_value(lm.meta, "base_interval", file));
        if (trained_base != cfg.base_interval)
            throw ConfigError(file + ": model was trained on a " + format_double(trained_base) +
                              " s grid, config has " + format_double(cfg.base_interval) + " s");

        const NormalizationRecord rec = decode_normalization(lm.meta.at("normalization"));
        const ChannelLags lags = parse_lags_text(detail::meta_value(lm.meta, "lags", file));
        const SupervisedSet set = labelled(c, [&] {
            return c.normalized ? build_supervised(valid, lags, c.stride, rec)
                                : build_supervised(valid, lags, c.stride, false);
        });
        const Eigen::VectorXd pred = labelled(c, [&] { return predict_batch(lm.model, set.X); });

        ForecastRow row;
        row.model = c.label();
        row.algorithm = to_string(c.algorithm) + (c.normalized ? " (N)" : "");
        row.scheme = c.stride;
        row.horizon = c.stride * cfg.base_interval;
        row.metrics = evaluate_metrics({set.Y.data(), static_cast<std::size_t>(set.Y.size())},
                                       {pred.data(), static_cast<std::size_t>(pred.size())});
        rows.push_back(row);

        const Eigen::VectorXd obs_mm = invert_normalization(rec, m4_inputs, set.Y);
        const Eigen::VectorXd pred_mm = invert_normalization(rec, m4_inputs, pred);
        std::ostringstream ps;
        ps << "k,time_s,observed,predicted,observed_mm,predicted_mm\n";
        for (Eigen::Index i = 0; i < set.Y.size(); ++i) {
            const std::size_t k = set.target_index[static_cast<std::size_t>(i)];
            ps << k << ',' << format_double(valid.timestamps[k]) << ',' << format_double(set.Y(i)) << ','
               << format_double(pred(i)) << ',' << format_double(obs_mm(i)) << ',' << format_double(pred_mm(i))
               << '\n';
        }
        out.write("pred_" + c.label() + ".csv", ps.str());
    }
    const auto order = [&](const ForecastRow& r) {
        const auto alg = parse_algorithm(r.algorithm.substr(0, r.algorithm.find(' ')));
        return std::tuple(static_cast<int>(alg), r.scheme, normalized_label(r.algorithm));
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const ForecastRow& a, const ForecastRow& b) { return order(a) < order(b); });
    std::ostringstream rs;
    write_forecast_report(rs, rows);
    out.write("forecast_report.csv", rs.str());
    out.write_manifest("evaluate", cfg);
    return rows;
}

// ---------------------------------------------------------------------------
// compare

/// Reads forecast_report.csv rows (validation split only).
inline std::vector<ForecastRow> read_forecast_report(std::istream& is, const std::string& source)
{
    std::string line;
    if (!std::getline(is, line))
        throw DataError(source + ": empty report");
    const auto header = detail::split_csv(detail::trim(line));
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        col[header[i]] = i;
    for (const char* need : {"algorithm", "scheme", "split", "RMSE"})
        if (!col.count(need))
            throw DataError(source + ": report has no '" + need + "' column");
    std::vector<ForecastRow> rows;
    for (std::size_t no = 2; std::getline(is, line); ++no) {
        if (detail::trim(line).empty())
            continue;
        const auto f = detail::split_csv(detail::trim(line));
        if (f.size() != header.size())
            throw DataError(source + ":" + std::to_string(no) + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(f.size()));
        try {
            ForecastRow r;
            r.algorithm = f[col["algorithm"]];
            r.scheme = detail::parse_int(f[col["scheme"]]);
            r.split = f[col["split"]];
            r.metrics.rmse = parse_double(f[col["RMSE"]]);
            if (col.count("horizon_s"))
                r.horizon = parse_double(f[col["horizon_s"]]);
            if (col.count("VE"))
                r.metrics.ve = parse_double(f[col["VE"]]);
            if (col.count("CE"))
                r.metrics.ce = parse_double(f[col["CE"]]);
            if (col.count("R"))
                r.metrics.r = parse_double(f[col["R"]]);
            if (r.split == "validation")
                rows.push_back(r);
        } catch (const Error& e) {
            throw DataError(source + ":" + std::to_string(no) + ": " + e.what());
        }
    }
    return rows;
}

/// Ranking group: a scheme stride and whether the rows are on the normalized scale.
using RankKey = std::pair<int, bool>;

/// Ranks validation RMSE within each scheme and scale; ties keep algorithm-name order.
inline std::map<RankKey, std::vector<ForecastRow>> rank_by_scheme(std::vector<ForecastRow> rows)
{
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ForecastRow& a, const ForecastRow& b) { return a.algorithm < b.algorithm; });
    std::map<RankKey, std::vector<ForecastRow>> by;
    for (auto& r : rows)
        by[{r.scheme, normalized_label(r.algorithm)}].push_back(r);
    for (auto& [key, list] : by)
        std::stable_sort(list.begin(), list.end(),
                         [](const ForecastRow& a, const ForecastRow& b) { return a.metrics.rmse < b.metrics.rmse; });
    return by;
}

inline std::string ranking_markdown(const std::map<RankKey, std::vector<ForecastRow>>& ranked)
{
    std::ostringstream md;
    md << "# Validation RMSE ranking\n";
    for (const auto& [key, list] : ranked) {
        md << "\n## Scheme s=" << key.first;
        if (!list.empty() && list.front().horizon > 0.0)
            md << " (" << format_double(list.front().horizon) << " s ahead)";
        md << (key.second ? ", normalized data" : ", original units");
        md << "\n\n| rank | algorithm | RMSE | delta | delta % | CE | R |\n|---|---|---|---|---|---|---|\n";
        const double best = list.front().metrics.rmse;
        int rank = 0;
        for (const auto& r : list) {
            const double d = r.metrics.rmse - best;
            char buf[160];
            std::snprintf(buf, sizeof(buf), "| %d | %s | %.4g | %+.4g | %+.2f | %.4g | %.4g |\n", ++rank,
                          r.algorithm.c_str(), r.metrics.rmse, d, best > 0.0 ? 100.0 * d / best : 0.0,
                          r.metrics.ce, r.metrics.r);
            md << buf;
        }
    }
    return md.str();
}

/// Ranks the rows of one or more forecast reports and writes comparison.md.
inline std::string cmd_compare(const ExperimentConfig& cfg, const std::vector<std::string>& reports)
{
    if (reports.empty())
        throw ConfigError("compare needs at least one forecast report");
    std::vector<ForecastRow> rows;
    for (const auto& p : reports) {
        std::ifstream is(p);
        if (!is)
            throw DataError("cannot open report '" + p + "'");
        const auto part = read_forecast_report(is, p);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    if (rows.empty())
        throw DataError("the reports contain no validation rows to compare");
    const std::string md = ranking_markdown(rank_by_scheme(std::move(rows)));
    OutputDir out(cfg.out);
    out.write("comparison.md", md);
    out.write_manifest("compare", cfg);
    return md;
}

} // namespace tsfuzzy
