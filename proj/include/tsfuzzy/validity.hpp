#pragma once

// Cluster validity indices and the rule-count sweep.
//
// PC and MPC are maximized, PE, SC (partition index), S (separation index) and
// XB (Xie-Beni) are minimized. The geometric indices use the plain Euclidean
// norm of the clustering space. N_i is the fuzzy cardinality sum_k mu_ik.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsfuzzy/clustering.hpp"

namespace tsfuzzy {

inline double pc(const PartitionMatrix& U)
{
    return U.mu.array().square().sum() / static_cast<double>(U.samples());
}

inline double pe(const PartitionMatrix& U)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < U.samples(); ++k)
        for (Eigen::Index i = 0; i < U.clusters(); ++i) {
            const double mu = U.mu(i, k);
            if (mu > 0.0)
                s += mu * std::log(mu);
        }
    return -s / static_cast<double>(U.samples());
}

inline double mpc(const PartitionMatrix& U)
{
    const auto C = static_cast<double>(U.clusters());
    if (U.clusters() < 2)
        throw DataError("modified partition coefficient needs at least two clusters");
    return 1.0 - C / (C - 1.0) * (1.0 - pc(U));
}

namespace detail {

struct IndexTerms {
    Eigen::VectorXd compactness; // sum_k mu_ik^2 |Z_k - v_i|^2
    Eigen::VectorXd cardinality; // sum_k mu_ik
    Eigen::MatrixXd separation;  // |v_i - v_j|^2
};

inline IndexTerms index_terms(const PartitionMatrix& U, const DataMatrix& D, const Eigen::MatrixXd& centers)
{
    if (U.samples() != D.samples() || centers.rows() != U.clusters() || centers.cols() != D.dims())
        throw DataError("validity index: partition, data and centres disagree in shape");
    IndexTerms t;
    const Eigen::MatrixXd G = euclidean_distances(D.values(), centers);
    t.compactness = (U.mu.array().square() * G.array()).rowwise().sum();
    t.cardinality = U.mu.rowwise().sum();
    const auto C = centers.rows();
    t.separation.resize(C, C);
    for (Eigen::Index i = 0; i < C; ++i)
        for (Eigen::Index j = 0; j < C; ++j)
            t.separation(i, j) = (centers.row(i) - centers.row(j)).squaredNorm();
    return t;
}

// Closest pair of distinct centres, lowest (i, j) first on ties.
inline std::pair<Eigen::Index, Eigen::Index> closest_pair(const Eigen::MatrixXd& sep)
{
    if (sep.rows() < 2)
        throw DataError("separation needs at least two centres");
    std::pair<Eigen::Index, Eigen::Index> best{0, 1};
    for (Eigen::Index i = 0; i < sep.rows(); ++i)
        for (Eigen::Index j = i + 1; j < sep.cols(); ++j)
            if (sep(i, j) < sep(best.first, best.second))
                best = {i, j};
    if (!(sep(best.first, best.second) > 0.0))
        throw NumericalError("coincident cluster centres " + std::to_string(best.first) + " and " +
                             std::to_string(best.second));
    return best;
}

} // namespace detail

inline double partition_index(const PartitionMatrix& U, const DataMatrix& D, const Eigen::MatrixXd& centers)
{
    const auto t = detail::index_terms(U, D, centers);
    double v = 0.0;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        const double sep = t.separation.row(i).sum();
        if (!(sep > 0.0))
            throw NumericalError("cluster centre " + std::to_string(i) + " coincides with every other centre");
        if (!(t.cardinality(i) > 0.0))
            throw NumericalError("cluster " + std::to_string(i) + " is empty");
        v += t.compactness(i) / (t.cardinality(i) * sep);
    }
    return v;
}

/// Total compactness over N_i * min separation, where N_i is the cardinality of
/// the lower-indexed cluster of the closest centre pair.
inline double separation_index(const PartitionMatrix& U, const DataMatrix& D, const Eigen::MatrixXd& centers)
{
    const auto t = detail::index_terms(U, D, centers);
    const auto [i, j] = detail::closest_pair(t.separation);
    if (!(t.cardinality(i) > 0.0))
        throw NumericalError("cluster " + std::to_string(i) + " is empty");
    return t.compactness.sum() / (t.cardinality(i) * t.separation(i, j));
}

inline double xie_beni(const PartitionMatrix& U, const DataMatrix& D, const Eigen::MatrixXd& centers)
{
    const auto t = detail::index_terms(U, D, centers);
    const auto [i, j] = detail::closest_pair(t.separation);
    return t.compactness.sum() / (static_cast<double>(U.samples()) * t.separation(i, j));
}

enum class ValidityIndex { pc, pe, mpc, sc, s, xb };

inline constexpr std::array<ValidityIndex, 6> all_validity_indices{
    ValidityIndex::pc, ValidityIndex::pe, ValidityIndex::mpc, ValidityIndex::sc, ValidityIndex::s, ValidityIndex::xb};

inline std::string to_string(ValidityIndex v)
{
    switch (v) {
    case ValidityIndex::pc: return "PC";
    case ValidityIndex::pe: return "PE";
    case ValidityIndex::mpc: return "MPC";
    case ValidityIndex::sc: return "SC";
    case ValidityIndex::s: return "S";
    case ValidityIndex::xb: return "XB";
    }
    return "?";
}

inline bool maximized(ValidityIndex v) { return v == ValidityIndex::pc || v == ValidityIndex::mpc; }

struct ValidityRow {
    int clusters = 0;
    bool ok = false;
    std::string error; ///< why the run or an index failed, when !ok
    std::array<double, 6> values{}; ///< in all_validity_indices order
};

struct ValidityReport {
    Algorithm algorithm = Algorithm::gk;
    std::vector<ValidityRow> rows;
    std::array<int, 6> optimum{}; ///< best C per index
    int consensus = 0;

    double value(int C, ValidityIndex v) const
    {
        for (const auto& r : rows)
            if (r.clusters == C && r.ok)
                return r.values[static_cast<std::size_t>(v)];
        return std::numeric_limits<double>::quiet_NaN();
    }
};

inline std::array<double, 6> evaluate_indices(const PartitionMatrix& U, const DataMatrix& D, const Eigen::MatrixXd& centers)
{
    return {pc(U), pe(U), mpc(U), partition_index(U, D, centers), separation_index(U, D, centers),
            xie_beni(U, D, centers)};
}

/// Optimum per index (first C wins ties) and the consensus: the most frequent
/// optimum, ties going to the smaller C.
inline void select_optima(ValidityReport& rep)
{
    bool any = false;
    for (std::size_t idx = 0; idx < 6; ++idx) {
        const bool maxim = maximized(all_validity_indices[idx]);
        int best_c = 0;
        double best = 0.0;
        for (const auto& r : rep.rows) {
            if (!r.ok)
                continue;
            const double v = r.values[idx];
            if (best_c == 0 || (maxim ? v > best : v < best)) {
                best = v;
                best_c = r.clusters;
            }
        }
        rep.optimum[idx] = best_c;
        any = any || best_c != 0;
    }
    if (!any)
        throw NumericalError("clustering failed for every cluster count in the sweep");
    std::map<int, int> votes;
    for (int c : rep.optimum)
        if (c != 0)
            ++votes[c];
    int best_votes = 0;
    for (const auto& [c, n] : votes)
        if (n > best_votes) {
            best_votes = n;
            rep.consensus = c;
        }
}

/// Clusters D once for every C in [c_min, c_max] and scores each partition.
/// A failing C is recorded and left out of the optimum selection.
inline ValidityReport sweep_clusters(const DataMatrix& D, const ClusterConfig& templ, int c_min, int c_max)
{
    if (c_min < 2 || c_max < c_min)
        throw ConfigError("sweep range must satisfy 2 <= C_min <= C_max");
    if (c_max >= D.samples())
        throw ConfigError("C_max " + std::to_string(c_max) + " must be below the sample count " +
                          std::to_string(D.samples()));
    ValidityReport rep;
    rep.algorithm = templ.algorithm;
    for (int C = c_min; C <= c_max; ++C) {
        ValidityRow row;
        row.clusters = C;
        ClusterConfig cfg = templ;
        cfg.clusters = C;
        if (cfg.algorithm == Algorithm::sc)
            cfg.sc.target_count = C;
        try {
            const ClusterResult res = run_clustering(D, cfg);
            row.values = evaluate_indices(res.partition, D, res.clusters.centers);
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rep.rows.push_back(std::move(row));
    }
    select_optima(rep);
    return rep;
}

/// CSV columns: C,PC,PE,MPC,SC,S,XB. Failed cluster counts are written as nan.
inline void write_validity_csv(std::ostream& os, const ValidityReport& rep)
{
    os << "C";
    for (auto v : all_validity_indices)
        os << ',' << to_string(v);
    os << '\n';
    os.precision(17);
    for (const auto& r : rep.rows) {
        os << r.clusters;
        for (double v : r.values) {
            if (r.ok)
                os << ',' << v;
            else
                os << ",nan";
        }
        os << '\n';
    }
}

/// CSV columns: index,direction,optimum_C, followed by a consensus row.
inline void write_optima_csv(std::ostream& os, const ValidityReport& rep)
{
    os << "index,direction,optimum_C\n";
    for (std::size_t i = 0; i < 6; ++i)
        os << to_string(all_validity_indices[i]) << ',' << (maximized(all_validity_indices[i]) ? "max" : "min") << ','
           << rep.optimum[i] << '\n';
    os << "consensus,mode," << rep.consensus << '\n';
}

} // namespace tsfuzzy
