#pragma once

// Rainfall-runoff event data: CSV ingestion, lag estimation, M4 supervised
// sets for each prediction stride, min-max normalization, and a synthetic
// storm generator.
//
// M4 row for target y_k at stride s with rainfall lags L_j:
//
//   X = [ y_{k-s}, r1_{k-L1}, r2_{k-L2}, r3_{k-L3} ],   Y = y_k
//
// for every k >= max(s, L_j). Stride s predicts s * base_interval ahead.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tsfuzzy/clustering/updates.hpp"
#include "tsfuzzy/model_io.hpp"

namespace tsfuzzy {

inline constexpr std::size_t rain_channels = 3;
inline constexpr Eigen::Index m4_inputs = 4;

struct EventSeries {
    double base_interval = 30.0; ///< seconds
    std::vector<double> timestamps;
    std::array<std::vector<double>, rain_channels> rain; ///< mm per interval, one series per gauge
    std::vector<double> head;                            ///< mm at the outlet

    std::size_t size() const noexcept { return head.size(); }
};

inline void validate_series(const EventSeries& s)
{
    const std::size_t n = s.head.size();
    if (!(s.base_interval > 0.0))
        throw DataError("base interval must be positive");
    if (s.timestamps.size() != n)
        throw DataError("timestamp and head series differ in length");
    for (std::size_t j = 0; j < rain_channels; ++j) {
        if (s.rain[j].size() != n)
            throw DataError("rain" + std::to_string(j + 1) + " series length differs from head");
        for (std::size_t k = 0; k < n; ++k) {
            if (!std::isfinite(s.rain[j][k]))
                throw DataError("rain" + std::to_string(j + 1) + " is not finite at row " + std::to_string(k));
            if (s.rain[j][k] < 0.0)
                throw DataError("rain" + std::to_string(j + 1) + " is negative at row " + std::to_string(k));
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(s.head[k]) || !std::isfinite(s.timestamps[k]))
            throw DataError("non-finite value at row " + std::to_string(k));
        if (k > 0 && std::abs((s.timestamps[k] - s.timestamps[k - 1]) - s.base_interval) > 1e-9 * s.base_interval)
            throw DataError("non-uniform spacing at row " + std::to_string(k) + ": step " +
                            format_double(s.timestamps[k] - s.timestamps[k - 1]) + " s, expected " +
                            format_double(s.base_interval) + " s");
    }
}

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ','))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace detail

inline constexpr std::string_view event_csv_header = "timestamp,rain1,rain2,rain3,head";

/// Parses "timestamp,rain1,rain2,rain3,head" CSV. Empty fields are errors; there is no imputation.
inline EventSeries parse_event_csv(std::istream& is, double base_interval, const std::string& source = "<stream>")
{
    std::string line;
    if (!std::getline(is, line))
        throw DataError(source + ": empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
        line.erase(0, 3);
    {
        const auto cols = detail::split_csv(line);
        std::string joined;
        for (std::size_t i = 0; i < cols.size(); ++i)
            joined += (i ? "," : "") + cols[i];
        if (joined != event_csv_header)
            throw DataError(source + ": header must be '" + std::string(event_csv_header) + "'");
    }
    EventSeries s;
    s.base_interval = base_interval;
    static constexpr std::array<const char*, 5> names{"timestamp", "rain1", "rain2", "rain3", "head"};
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (detail::trim(line).empty())
            continue;
        const auto f = detail::split_csv(line);
        if (f.size() != names.size())
            throw DataError(source + ": row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                            " fields, expected 5");
        std::array<double, 5> v{};
        for (std::size_t c = 0; c < f.size(); ++c) {
            if (f[c].empty())
                throw DataError(source + ": missing " + names[c] + " value at row " + std::to_string(row));
            try {
                v[c] = parse_double(f[c]);
            } catch (const DataError&) {
                throw DataError(source + ": bad " + std::string(names[c]) + " value '" + f[c] + "' at row " +
                                std::to_string(row));
            }
        }
        s.timestamps.push_back(v[0]);
        for (std::size_t j = 0; j < rain_channels; ++j)
            s.rain[j].push_back(v[j + 1]);
        s.head.push_back(v[4]);
        ++row;
    }
    try {
        validate_series(s);
    } catch (const Error& e) {
        rethrow_with_context(e, source + ": ");
    }
    return s;
}

inline EventSeries load_event_csv(const std::string& path, double base_interval)
{
    std::ifstream is(path);
    if (!is)
        throw DataError("cannot open event file '" + path + "'");
    return parse_event_csv(is, base_interval, path);
}

inline void write_event_csv(std::ostream& os, const EventSeries& s)
{
    os << event_csv_header << '\n';
    for (std::size_t k = 0; k < s.size(); ++k)
        os << format_double(s.timestamps[k]) << ',' << format_double(s.rain[0][k]) << ','
           << format_double(s.rain[1][k]) << ',' << format_double(s.rain[2][k]) << ',' << format_double(s.head[k])
           << '\n';
}

// ---------------------------------------------------------------------------
// Lag estimation

struct LagEstimate {
    std::array<int, rain_channels> per_channel{};
    int shared = 0; ///< from the summed rainfall; the default applied to every channel
};

namespace detail {

// Pearson correlation of rain[k - lag] with head[k] over k = lag..n-1; 0 when either side is flat.
inline double lagged_correlation(const std::vector<double>& rain, const std::vector<double>& head, int lag)
{
    const auto n = head.size();
    const auto l = static_cast<std::size_t>(lag);
    const double cnt = static_cast<double>(n - l);
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = l; k < n; ++k) {
        ma += rain[k - l];
        mb += head[k];
    }
    ma /= cnt;
    mb /= cnt;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = l; k < n; ++k) {
        const double a = rain[k - l] - ma;
        const double b = head[k] - mb;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (!(saa > 0.0) || !(sbb > 0.0))
        return 0.0;
    return sab / std::sqrt(saa * sbb);
}

inline int best_lag(const std::vector<double>& rain, const std::vector<double>& head, int max_lag)
{
    int best = 0;
    double best_r = -2.0;
    for (int l = 0; l <= max_lag; ++l) {
        const double r = lagged_correlation(rain, head, l);
        if (r > best_r) {
            best_r = r;
            best = l;
        }
    }
    return best;
}

} // namespace detail

/// Cross-correlation lag between each gauge (and their sum) and the outlet head,
/// searched over 0..max_lag samples; ties go to the smaller lag.
inline LagEstimate estimate_lag(const EventSeries& s, int max_lag = 30)
{
    if (max_lag < 0)
        throw ConfigError("max lag must be >= 0");
    if (s.size() <= 2 * static_cast<std::size_t>(max_lag))
        throw DataError("series of " + std::to_string(s.size()) + " samples is too short for a lag search up to " +
                        std::to_string(max_lag) + " (needs more than " + std::to_string(2 * max_lag) + ")");
    LagEstimate est;
    std::vector<double> total(s.size(), 0.0);
    for (std::size_t j = 0; j < rain_channels; ++j) {
        if (std::all_of(s.rain[j].begin(), s.rain[j].end(), [](double v) { return v == 0.0; }))
            throw DataError("rain" + std::to_string(j + 1) + " is zero throughout; lag is undefined");
        est.per_channel[j] = detail::best_lag(s.rain[j], s.head, max_lag);
        for (std::size_t k = 0; k < s.size(); ++k)
            total[k] += s.rain[j][k];
    }
    est.shared = detail::best_lag(total, s.head, max_lag);
    return est;
}

// ---------------------------------------------------------------------------
// Normalization

/// Per-column min/max for mapping onto [0,1]. `dimensional` marks an identity record.
struct NormalizationRecord {
    bool dimensional = true;
    std::vector<double> min;
    std::vector<double> max;

    std::size_t columns() const noexcept { return min.size(); }
};

inline NormalizationRecord fit_normalization(const Eigen::Ref<const Eigen::MatrixXd>& cols)
{
    NormalizationRecord rec;
    rec.dimensional = false;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        const double lo = cols.col(j).minCoeff();
        const double hi = cols.col(j).maxCoeff();
        if (!(hi > lo))
            throw DataError("column " + std::to_string(j) + " is constant and cannot be normalized");
        rec.min.push_back(lo);
        rec.max.push_back(hi);
    }
    return rec;
}

struct NormalizedValues {
    Eigen::MatrixXd values;
    std::size_t out_of_range = 0; ///< entries mapped outside [0,1]
};

inline NormalizedValues apply_normalization(const NormalizationRecord& rec, const Eigen::Ref<const Eigen::MatrixXd>& cols)
{
    NormalizedValues out{cols, 0};
    if (rec.dimensional)
        return out;
    if (static_cast<Eigen::Index>(rec.columns()) != cols.cols())
        throw DataError("normalization record covers " + std::to_string(rec.columns()) + " columns, data has " +
                        std::to_string(cols.cols()));
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        const double lo = rec.min[static_cast<std::size_t>(j)];
        const double span = rec.max[static_cast<std::size_t>(j)] - lo;
        for (Eigen::Index k = 0; k < cols.rows(); ++k) {
            const double v = (cols(k, j) - lo) / span;
            out.values(k, j) = v;
            out.out_of_range += (v < 0.0 || v > 1.0) ? 1 : 0;
        }
    }
    return out;
}

/// Maps normalized values of column `col` back to original units.
inline Eigen::VectorXd invert_normalization(const NormalizationRecord& rec, std::size_t col,
                                            const Eigen::Ref<const Eigen::VectorXd>& values)
{
    if (rec.dimensional)
        return values;
    if (col >= rec.columns())
        throw DataError("normalization record has no column " + std::to_string(col));
    return values.array() * (rec.max[col] - rec.min[col]) + rec.min[col];
}

inline std::string encode_normalization(const NormalizationRecord& rec)
{
    if (rec.dimensional)
        return "dimensional";
    std::string s = "minmax";
    for (std::size_t j = 0; j < rec.columns(); ++j)
        s += ' ' + format_double(rec.min[j]) + ' ' + format_double(rec.max[j]);
    return s;
}

inline NormalizationRecord decode_normalization(const std::string& text)
{
    std::istringstream is(text);
    std::string kind;
    is >> kind;
    NormalizationRecord rec;
    if (kind == "dimensional")
        return rec;
    if (kind != "minmax")
        throw DataError("unknown normalization record '" + kind + "'");
    rec.dimensional = false;
    std::string lo, hi;
    while (is >> lo >> hi) {
        rec.min.push_back(parse_double(lo));
        rec.max.push_back(parse_double(hi));
    }
    if (rec.min.empty())
        throw DataError("empty normalization record");
    return rec;
}

// ---------------------------------------------------------------------------
// Supervised M4 sets

using ChannelLags = std::array<int, rain_channels>;

inline ChannelLags uniform_lag(int L) { return {L, L, L}; }

struct SupervisedSet {
    Eigen::MatrixXd X; ///< rows [y_{k-s}, r1, r2, r3]
    Eigen::VectorXd Y;
    int stride = 1;
    ChannelLags lags{};
    std::vector<std::size_t> target_index; ///< k of each row in the source series
    NormalizationRecord norm;              ///< over the five columns [X | Y]
    std::size_t out_of_range = 0;

    Eigen::Index rows() const noexcept { return X.rows(); }
    DataMatrix joined() const { return DataMatrix::join(X, Y, {"mm", "mm", "mm", "mm", "mm"}); }
};

namespace detail {

inline SupervisedSet raw_supervised(const EventSeries& s, const ChannelLags& lags, int stride)
{
    if (stride < 1)
        throw ConfigError("prediction stride must be >= 1");
    int first = stride;
    for (int L : lags) {
        if (L < 0)
            throw ConfigError("lag must be >= 0");
        first = std::max(first, L);
    }
    const auto n = s.size();
    if (n < static_cast<std::size_t>(first) + 1)
        throw DataError("series of " + std::to_string(n) + " samples is too short for stride " +
                        std::to_string(stride) + " and lag " + std::to_string(first) + "; needs at least " +
                        std::to_string(first + 1));
    SupervisedSet set;
    set.stride = stride;
    set.lags = lags;
    const auto rows = static_cast<Eigen::Index>(n - static_cast<std::size_t>(first));
    set.X.resize(rows, m4_inputs);
    set.Y.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t k = static_cast<std::size_t>(first) + static_cast<std::size_t>(r);
        set.X(r, 0) = s.head[k - static_cast<std::size_t>(stride)];
        for (std::size_t j = 0; j < rain_channels; ++j)
            set.X(r, static_cast<Eigen::Index>(j) + 1) = s.rain[j][k - static_cast<std::size_t>(lags[j])];
        set.Y(r) = s.head[k];
        set.target_index.push_back(k);
    }
    return set;
}

inline void normalize_in_place(SupervisedSet& set, const NormalizationRecord& rec)
{
    Eigen::MatrixXd all(set.X.rows(), m4_inputs + 1);
    all << set.X, set.Y;
    const NormalizedValues nv = apply_normalization(rec, all);
    set.X = nv.values.leftCols(m4_inputs);
    set.Y = nv.values.col(m4_inputs);
    set.norm = rec;
    set.out_of_range = nv.out_of_range;
}

} // namespace detail

/// Builds the M4 set; with `normalize` the columns are scaled to [0,1] using this set's own range.
inline SupervisedSet build_supervised(const EventSeries& s, const ChannelLags& lags, int stride, bool normalize)
{
    validate_series(s);
    SupervisedSet set = detail::raw_supervised(s, lags, stride);
    if (normalize) {
        Eigen::MatrixXd all(set.X.rows(), m4_inputs + 1);
        all << set.X, set.Y;
        detail::normalize_in_place(set, fit_normalization(all));
    }
    return set;
}

/// Builds the M4 set scaled with an existing (training) record.
inline SupervisedSet build_supervised(const EventSeries& s, const ChannelLags& lags, int stride,
                                      const NormalizationRecord& training)
{
    validate_series(s);
    SupervisedSet set = detail::raw_supervised(s, lags, stride);
    detail::normalize_in_place(set, training);
    return set;
}

/// CSV columns: k,y_prev,rain1,rain2,rain3,y.
inline void write_supervised_csv(std::ostream& os, const SupervisedSet& set)
{
    os << "k,y_prev,rain1,rain2,rain3,y\n";
    for (Eigen::Index r = 0; r < set.rows(); ++r) {
        os << set.target_index[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m4_inputs; ++c)
            os << ',' << format_double(set.X(r, c));
        os << ',' << format_double(set.Y(r)) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic storms

struct RainPulse {
    double peak_time = 0.0; ///< seconds from the event start
    double amplitude = 0.0; ///< mm per interval at the peak
    double width = 60.0;    ///< seconds (Gaussian standard deviation)
};

struct SynthParams {
    /// Explicit pulses per gauge. When all three lists are empty the pulses are drawn from the seed.
    std::array<std::vector<RainPulse>, rain_channels> pulses;
    int storm_pulses = 2;       ///< catchment-wide pulses per drawn storm
    int local_pulses = 1;       ///< extra independent pulses per gauge
    double max_intensity = 1.0; ///< upper bound of a drawn pulse peak, mm per interval
    double min_intensity = 0.4; ///< lower bound of a drawn pulse peak, as a fraction of max_intensity
    double local_fraction = 0.4; ///< local pulse peaks relative to max_intensity
    std::array<double, rain_channels> gauge_scale{1.0, 0.8, 1.2};  ///< fixed gauge exposure
    std::array<double, rain_channels> gauge_shift{0.0, 2.0, -2.0}; ///< fixed storm arrival offset, intervals
    int routing_lag = 6;        ///< samples between rainfall and its effect on the head
    double recession = 0.92;    ///< y_k = recession * y_{k-1} + ...
    double gain = 3.0;          ///< ... + gain * (sum of lagged rain)^exponent
    double exponent = 1.5;
    double noise = 0.0;         ///< standard deviation of additive head noise, mm
    double initial_head = 0.0;

    void validate() const
    {
        if (!(recession >= 0.0 && recession < 1.0))
            throw ConfigError("synth recession must lie in [0,1)");
        if (!(gain >= 0.0) || !(exponent > 0.0) || !(noise >= 0.0) || !(initial_head >= 0.0))
            throw ConfigError("synth gain, noise and initial head must be >= 0 and exponent > 0");
        if (routing_lag < 0)
            throw ConfigError("synth routing lag must be >= 0");
        if (storm_pulses < 1 || local_pulses < 0 || !(max_intensity > 0.0) || !(local_fraction >= 0.0) ||
            !(min_intensity >= 0.0 && min_intensity <= 1.0))
            throw ConfigError("synth storm needs at least one pulse and a positive intensity");
        for (double g : gauge_scale)
            if (!(g > 0.0))
                throw ConfigError("synth gauge scale must be > 0");
        for (const auto& station : pulses)
            for (const auto& p : station)
                if (!(p.width > 0.0) || !(p.amplitude >= 0.0))
                    throw ConfigError("synth pulse needs width > 0 and amplitude >= 0");
    }
};

namespace detail {

inline double standard_normal(std::mt19937_64& rng)
{
    const double u1 = open_unit(rng);
    const double u2 = open_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * open_unit(rng); }

} // namespace detail

/// Rainfall as sums of Gaussian pulses per gauge, head from the nonlinear reservoir
/// y_k = recession * y_{k-1} + gain * (sum_j rain_j[k - lag])^exponent + noise.
inline EventSeries synth_storm(std::uint64_t seed, double duration, double base_interval, const SynthParams& p)
{
    p.validate();
    if (!(base_interval > 0.0) || !(duration >= 2.0 * base_interval))
        throw ConfigError("synth duration must cover at least two base intervals");
    std::mt19937_64 rng(seed);
    const auto n = static_cast<std::size_t>(std::floor(duration / base_interval + 1e-9));

    auto pulses = p.pulses;
    const bool draw = std::all_of(pulses.begin(), pulses.end(), [](const auto& v) { return v.empty(); });
    if (draw) {
        std::vector<RainPulse> storm;
        for (int i = 0; i < p.storm_pulses; ++i)
            storm.push_back({detail::uniform(rng, 0.1, 0.6) * duration,
                             detail::uniform(rng, p.min_intensity, 1.0) * p.max_intensity,
                             detail::uniform(rng, 0.03, 0.08) * duration});
        for (std::size_t j = 0; j < rain_channels; ++j) {
            for (const auto& q : storm)
                pulses[j].push_back({q.peak_time + p.gauge_shift[j] * base_interval, q.amplitude * p.gauge_scale[j],
                                     q.width});
            for (int i = 0; i < p.local_pulses; ++i)
                pulses[j].push_back({detail::uniform(rng, 0.1, 0.7) * duration,
                                     detail::uniform(rng, 0.2, 1.0) * p.local_fraction * p.max_intensity,
                                     detail::uniform(rng, 0.01, 0.04) * duration});
        }
    }

    EventSeries s;
    s.base_interval = base_interval;
    s.timestamps.resize(n);
    for (auto& r : s.rain)
        r.assign(n, 0.0);
    s.head.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * base_interval;
        s.timestamps[k] = t;
        for (std::size_t j = 0; j < rain_channels; ++j)
            for (const auto& q : pulses[j]) {
                const double z = (t - q.peak_time) / q.width;
                s.rain[j][k] += q.amplitude * std::exp(-0.5 * z * z);
            }
    }
    const auto lag = static_cast<std::size_t>(p.routing_lag);
    double y = p.initial_head;
    s.head[0] = y;
    for (std::size_t k = 1; k < n; ++k) {
        double inflow = 0.0;
        if (k >= lag)
            for (std::size_t j = 0; j < rain_channels; ++j)
                inflow += s.rain[j][k - lag];
        y = p.recession * y + p.gain * std::pow(inflow, p.exponent);
        if (p.noise > 0.0)
            y = std::max(0.0, y + p.noise * detail::standard_normal(rng));
        s.head[k] = y;
    }
    return s;
}

} // namespace tsfuzzy
