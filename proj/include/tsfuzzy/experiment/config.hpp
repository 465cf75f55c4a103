#pragma once

// Experiment configuration: a flat "key = value" text file. Lines starting
// with '#' are comments, lists are comma separated. Every key is optional
// except the event sources a command needs.
//
//   train        = data/storm1.csv        (or synth:<seed>[:<duration_s>])
//   validation   = synth:502
//   algorithms   = GK, FCM, SC
//   clusters     = 3                      (or "sweep", using c_max)
//   strides      = 1, 2, 5, 10
//   normalization = both                  (off | on | both)
//   lag          = auto                   (or L, or L1, L2, L3)

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tsfuzzy/clustering.hpp"
#include "tsfuzzy/dataio.hpp"
#include "tsfuzzy/model_io.hpp"

namespace tsfuzzy {

enum class NormalizationMode { off, on, both };

inline std::string to_string(NormalizationMode m)
{
    switch (m) {
    case NormalizationMode::off: return "off";
    case NormalizationMode::on: return "on";
    case NormalizationMode::both: return "both";
    }
    return "?";
}

struct EventSource {
    std::string path;          ///< empty for a synthetic event
    std::uint64_t seed = 0;
    double duration = 0.0;     ///< seconds; 0 takes synth.duration

    bool synthetic() const noexcept { return path.empty(); }
};

struct ExperimentConfig {
    std::optional<EventSource> train;
    std::optional<EventSource> validation;
    std::vector<Algorithm> algorithms{Algorithm::gk, Algorithm::fcm, Algorithm::sc};
    int clusters = 3;
    bool sweep = false;
    int c_max = 6;
    double m = 2.0;
    double xi = 0.001;
    double gamma = 1e-3;
    int max_iterations = 500;
    std::uint64_t seed = 42;
    ScParams sc;
    std::vector<int> strides{1};
    NormalizationMode normalization = NormalizationMode::off;
    std::optional<ChannelLags> lags; ///< unset means estimate from the training event
    int max_lag = 30;
    double base_interval = 30.0;
    std::string out = "out";
    SynthParams synth;
    double synth_duration = 302 * 30.0;

    void validate() const
    {
        if (algorithms.empty())
            throw ConfigError("config key 'algorithms': at least one algorithm is required");
        if (strides.empty())
            throw ConfigError("config key 'strides': at least one scheme stride is required");
        for (int s : strides)
            if (s < 1)
                throw ConfigError("config key 'strides': every stride must be >= 1");
        if (!sweep && clusters < 2)
            throw ConfigError("config key 'clusters': must be >= 2 or 'sweep'");
        if (c_max < 2)
            throw ConfigError("config key 'c_max': must be >= 2");
        if (max_lag < 0)
            throw ConfigError("config key 'max_lag': must be >= 0");
        if (!(base_interval > 0.0))
            throw ConfigError("config key 'base_interval': must be > 0");
        if (!(synth_duration >= 2.0 * base_interval))
            throw ConfigError("config key 'synth.duration': must cover at least two base intervals");
        if (out.empty())
            throw ConfigError("config key 'out': must not be empty");
        try {
            cluster_config(algorithms.front()).validate();
            ClusterConfig probe = cluster_config(Algorithm::sc);
            probe.validate();
            synth.validate();
        } catch (const Error& e) {
            rethrow_with_context(e, "config: ");
        }
    }

    /// Clustering settings for one algorithm. A fixed rule count is passed to SC as its target count.
    ClusterConfig cluster_config(Algorithm a) const
    {
        ClusterConfig c;
        c.algorithm = a;
        c.clusters = sweep ? 2 : clusters;
        c.m = m;
        c.xi = xi;
        c.gamma = gamma;
        c.max_iterations = max_iterations;
        c.seed = seed;
        c.sc = sc;
        if (a == Algorithm::sc && !sweep)
            c.sc.target_count = clusters;
        return c;
    }

    std::vector<bool> normalization_flags() const
    {
        switch (normalization) {
        case NormalizationMode::off: return {false};
        case NormalizationMode::on: return {true};
        case NormalizationMode::both: return {false, true};
        }
        return {};
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out = split_csv(v);
    out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
    return out;
}

inline long long parse_integer(const std::string& v)
{
    long long x = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || p != end)
        throw ConfigError("'" + v + "' is not an integer");
    return x;
}

inline double parse_real(const std::string& v)
{
    try {
        return parse_double(v);
    } catch (const Error&) {
        throw ConfigError("'" + v + "' is not a number");
    }
}

inline int parse_int(const std::string& v) { return static_cast<int>(parse_integer(v)); }

inline std::uint64_t parse_seed(const std::string& v)
{
    const long long s = parse_integer(v);
    if (s < 0)
        throw ConfigError("seed must be >= 0");
    return static_cast<std::uint64_t>(s);
}

inline EventSource parse_source(const std::string& v)
{
    EventSource src;
    if (v.rfind("synth:", 0) != 0) {
        src.path = v;
        return src;
    }
    std::vector<std::string> fields;
    std::istringstream is(v.substr(6));
    for (std::string f; std::getline(is, f, ':');)
        fields.push_back(trim(f));
    if (fields.empty() || fields.size() > 2 || fields[0].empty())
        throw ConfigError("synthetic source must look like synth:<seed> or synth:<seed>:<duration_s>");
    src.seed = parse_seed(fields[0]);
    if (fields.size() == 2)
        src.duration = parse_real(fields[1]);
    return src;
}

inline std::string source_text(const EventSource& s)
{
    if (!s.synthetic())
        return s.path;
    std::string t = "synth:" + std::to_string(s.seed);
    if (s.duration > 0.0)
        t += ':' + format_double(s.duration);
    return t;
}

template <std::size_t N>
std::array<double, N> parse_reals(const std::string& v)
{
    const auto items = split_list(v);
    if (items.size() != N)
        throw ConfigError("expected " + std::to_string(N) + " comma-separated numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i)
        out[i] = parse_real(items[i]);
    return out;
}

template <typename Seq>
std::string join_list(const Seq& items)
{
    std::string s;
    for (const auto& x : items) {
        if (!s.empty())
            s += ", ";
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>)
            s += format_double(x);
        else if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Algorithm>)
            s += to_string(x);
        else
            s += std::to_string(x);
    }
    return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters()
{
    static const std::map<std::string, Setter> table = {
        {"train", [](auto& c, const auto& v) { c.train = parse_source(v); }},
        {"validation", [](auto& c, const auto& v) { c.validation = parse_source(v); }},
        {"algorithms",
         [](auto& c, const auto& v) {
             c.algorithms.clear();
             for (const auto& a : split_list(v))
                 c.algorithms.push_back(parse_algorithm(a));
         }},
        {"clusters",
         [](auto& c, const auto& v) {
             c.sweep = v == "sweep";
             if (!c.sweep)
                 c.clusters = parse_int(v);
         }},
        {"c_max", [](auto& c, const auto& v) { c.c_max = parse_int(v); }},
        {"m", [](auto& c, const auto& v) { c.m = parse_real(v); }},
        {"xi", [](auto& c, const auto& v) { c.xi = parse_real(v); }},
        {"gamma", [](auto& c, const auto& v) { c.gamma = parse_real(v); }},
        {"max_iterations", [](auto& c, const auto& v) { c.max_iterations = parse_int(v); }},
        {"seed", [](auto& c, const auto& v) { c.seed = parse_seed(v); }},
        {"sc.radius", [](auto& c, const auto& v) { c.sc.radius = parse_real(v); }},
        {"sc.squash", [](auto& c, const auto& v) { c.sc.squash = parse_real(v); }},
        {"sc.accept", [](auto& c, const auto& v) { c.sc.accept_ratio = parse_real(v); }},
        {"sc.reject", [](auto& c, const auto& v) { c.sc.reject_ratio = parse_real(v); }},
        {"strides",
         [](auto& c, const auto& v) {
             c.strides.clear();
             for (const auto& s : split_list(v))
                 c.strides.push_back(parse_int(s));
         }},
        {"normalization",
         [](auto& c, const auto& v) {
             if (v == "off")
                 c.normalization = NormalizationMode::off;
             else if (v == "on")
                 c.normalization = NormalizationMode::on;
             else if (v == "both")
                 c.normalization = NormalizationMode::both;
             else
                 throw ConfigError("expected off, on or both");
         }},
        {"lag",
         [](auto& c, const auto& v) {
             if (v == "auto") {
                 c.lags.reset();
                 return;
             }
             const auto items = split_list(v);
             if (items.size() == 1) {
                 c.lags = uniform_lag(parse_int(items[0]));
             } else if (items.size() == rain_channels) {
                 ChannelLags l{};
                 for (std::size_t j = 0; j < rain_channels; ++j)
                     l[j] = parse_int(items[j]);
                 c.lags = l;
             } else {
                 throw ConfigError("expected auto, one lag or one lag per rain channel");
             }
             for (int L : *c.lags)
                 if (L < 0)
                     throw ConfigError("lags must be >= 0");
         }},
        {"max_lag", [](auto& c, const auto& v) { c.max_lag = parse_int(v); }},
        {"base_interval", [](auto& c, const auto& v) { c.base_interval = parse_real(v); }},
        {"out", [](auto& c, const auto& v) { c.out = v; }},
        {"synth.duration", [](auto& c, const auto& v) { c.synth_duration = parse_real(v); }},
        {"synth.storm_pulses", [](auto& c, const auto& v) { c.synth.storm_pulses = parse_int(v); }},
        {"synth.local_pulses", [](auto& c, const auto& v) { c.synth.local_pulses = parse_int(v); }},
        {"synth.max_intensity", [](auto& c, const auto& v) { c.synth.max_intensity = parse_real(v); }},
        {"synth.min_intensity", [](auto& c, const auto& v) { c.synth.min_intensity = parse_real(v); }},
        {"synth.local_fraction", [](auto& c, const auto& v) { c.synth.local_fraction = parse_real(v); }},
        {"synth.gauge_scale", [](auto& c, const auto& v) { c.synth.gauge_scale = parse_reals<rain_channels>(v); }},
        {"synth.gauge_shift", [](auto& c, const auto& v) { c.synth.gauge_shift = parse_reals<rain_channels>(v); }},
        {"synth.routing_lag", [](auto& c, const auto& v) { c.synth.routing_lag = parse_int(v); }},
        {"synth.recession", [](auto& c, const auto& v) { c.synth.recession = parse_real(v); }},
        {"synth.gain", [](auto& c, const auto& v) { c.synth.gain = parse_real(v); }},
        {"synth.exponent", [](auto& c, const auto& v) { c.synth.exponent = parse_real(v); }},
        {"synth.noise", [](auto& c, const auto& v) { c.synth.noise = parse_real(v); }},
        {"synth.initial_head", [](auto& c, const auto& v) { c.synth.initial_head = parse_real(v); }},
    };
    return table;
}

} // namespace detail

/// Applies one setting; errors name the key.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& table = detail::config_setters();
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("unknown config key '" + key + "'");
    try {
        it->second(cfg, value);
    } catch (const Error& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

inline ExperimentConfig parse_config(std::istream& is, const std::string& source = "<config>")
{
    ExperimentConfig cfg;
    std::map<std::string, std::size_t> seen;
    std::string line;
    for (std::size_t no = 1; std::getline(is, line); ++no) {
        const auto hash = line.find('#');
        const std::string body = detail::trim(line.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        const std::string where = source + ":" + std::to_string(no) + ": ";
        if (eq == std::string::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (const auto [it, fresh] = seen.emplace(key, no); !fresh)
            throw ConfigError(where + "config key '" + key + "' repeats line " + std::to_string(it->second));
        try {
            set_config_value(cfg, key, value);
        } catch (const Error& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(is, path);
}

/// Every setting as sorted key/value text. Parsing this text gives back the same configuration.
inline std::map<std::string, std::string> canonical_config(const ExperimentConfig& c)
{
    using detail::join_list;
    std::map<std::string, std::string> kv;
    if (c.train)
        kv["train"] = detail::source_text(*c.train);
    if (c.validation)
        kv["validation"] = detail::source_text(*c.validation);
    kv["algorithms"] = join_list(c.algorithms);
    kv["clusters"] = c.sweep ? "sweep" : std::to_string(c.clusters);
    kv["c_max"] = std::to_string(c.c_max);
    kv["m"] = format_double(c.m);
    kv["xi"] = format_double(c.xi);
    kv["gamma"] = format_double(c.gamma);
    kv["max_iterations"] = std::to_string(c.max_iterations);
    kv["seed"] = std::to_string(c.seed);
    kv["sc.radius"] = format_double(c.sc.radius);
    kv["sc.squash"] = format_double(c.sc.squash);
    kv["sc.accept"] = format_double(c.sc.accept_ratio);
    kv["sc.reject"] = format_double(c.sc.reject_ratio);
    kv["strides"] = join_list(c.strides);
    kv["normalization"] = to_string(c.normalization);
    kv["lag"] = c.lags ? join_list(*c.lags) : "auto";
    kv["max_lag"] = std::to_string(c.max_lag);
    kv["base_interval"] = format_double(c.base_interval);
    kv["out"] = c.out;
    kv["synth.duration"] = format_double(c.synth_duration);
    kv["synth.storm_pulses"] = std::to_string(c.synth.storm_pulses);
    kv["synth.local_pulses"] = std::to_string(c.synth.local_pulses);
    kv["synth.max_intensity"] = format_double(c.synth.max_intensity);
    kv["synth.min_intensity"] = format_double(c.synth.min_intensity);
    kv["synth.local_fraction"] = format_double(c.synth.local_fraction);
    kv["synth.gauge_scale"] = join_list(c.synth.gauge_scale);
    kv["synth.gauge_shift"] = join_list(c.synth.gauge_shift);
    kv["synth.routing_lag"] = std::to_string(c.synth.routing_lag);
    kv["synth.recession"] = format_double(c.synth.recession);
    kv["synth.gain"] = format_double(c.synth.gain);
    kv["synth.exponent"] = format_double(c.synth.exponent);
    kv["synth.noise"] = format_double(c.synth.noise);
    kv["synth.initial_head"] = format_double(c.synth.initial_head);
    return kv;
}

inline std::string canonical_config_text(const ExperimentConfig& c)
{
    std::string s;
    for (const auto& [k, v] : canonical_config(c))
        s += k + " = " + v + '\n';
    return s;
}

} // namespace tsfuzzy
