#pragma once

// Subtractive (mountain-potential) clustering.
//
// Works on min-max normalized data. Every sample gets the potential
// P_k = sum_j exp(-4 |z_k - z_j|^2 / ra^2). The highest peak becomes the first
// centre; after each acceptance the potentials are reduced around the new
// centre with radius squash * ra. Candidates above accept_ratio * P_first are
// taken, those below reject_ratio * P_first end the search, and in between a
// candidate is kept only if (distance to nearest centre)/ra + ratio >= 1.
// Ties on potential go to the lowest row index.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tsfuzzy/clustering/updates.hpp"

namespace tsfuzzy {

struct ScResult {
    Eigen::MatrixXd centers; ///< count x d, original units
    std::size_t count = 0;
    std::vector<Eigen::Index> center_rows; ///< sample index of each centre
    std::vector<double> potentials;        ///< potential of each centre when it was accepted
    PartitionMatrix partition;             ///< memberships from normalized Euclidean distances
    Eigen::RowVectorXd offset;             ///< per-column minimum used for normalization
    Eigen::RowVectorXd scale;              ///< per-column range (1 for constant columns)
};

namespace detail {

inline Eigen::MatrixXd minmax_normalize(const Eigen::MatrixXd& Z, Eigen::RowVectorXd& lo, Eigen::RowVectorXd& range)
{
    lo = Z.colwise().minCoeff();
    range = Z.colwise().maxCoeff() - lo;
    for (Eigen::Index j = 0; j < range.size(); ++j)
        if (!(range(j) > 0.0))
            range(j) = 1.0;
    return (Z.rowwise() - lo).array().rowwise() / range.array();
}

inline Eigen::Index argmax_first(const Eigen::VectorXd& p)
{
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < p.size(); ++k)
        if (p(k) > p(best))
            best = k;
    return best;
}

} // namespace detail

inline ScResult run_sc(const DataMatrix& D, const ClusterConfig& cfg)
{
    ClusterConfig c = cfg;
    c.algorithm = Algorithm::sc;
    c.validate();
    const ScParams& sp = c.sc;
    const Eigen::Index N = D.samples();
    if (N < 2)
        throw DataError("subtractive clustering needs at least two samples");
    if (sp.target_count >= N)
        throw ConfigError("sc target count must be below the sample count");

    ScResult out;
    const Eigen::MatrixXd Zn = detail::minmax_normalize(D.values(), out.offset, out.scale);
    const double alpha = 4.0 / (sp.radius * sp.radius);
    const double rb = sp.squash * sp.radius;
    const double beta = 4.0 / (rb * rb);

    Eigen::VectorXd P = Eigen::VectorXd::Zero(N);
    for (Eigen::Index k = 0; k < N; ++k)
        for (Eigen::Index j = 0; j < N; ++j)
            P(k) += std::exp(-alpha * (Zn.row(k) - Zn.row(j)).squaredNorm());

    std::vector<Eigen::Index> rows;
    double first = 0.0;
    const auto accept = [&](Eigen::Index k) {
        const double pk = P(k);
        rows.push_back(k);
        out.potentials.push_back(pk);
        for (Eigen::Index j = 0; j < N; ++j)
            P(j) = std::max(0.0, P(j) - pk * std::exp(-beta * (Zn.row(j) - Zn.row(k)).squaredNorm()));
    };

    while (true) {
        const Eigen::Index k = detail::argmax_first(P);
        const double pk = P(k);
        if (!(pk > 0.0))
            break;
        if (rows.empty()) {
            first = pk;
            accept(k);
        } else if (sp.target_count > 0) {
            accept(k);
        } else {
            const double ratio = pk / first;
            if (ratio > sp.accept_ratio) {
                accept(k);
            } else if (ratio < sp.reject_ratio) {
                break;
            } else {
                double dmin = std::numeric_limits<double>::infinity();
                for (const auto r : rows)
                    dmin = std::min(dmin, (Zn.row(k) - Zn.row(r)).norm());
                if (dmin / sp.radius + ratio >= 1.0)
                    accept(k);
                else
                    P(k) = 0.0;
            }
        }
        if (sp.target_count > 0 && static_cast<int>(rows.size()) == sp.target_count)
            break;
    }

    if (rows.empty())
        throw NumericalError("subtractive clustering accepted no centre");
    if (sp.target_count > 0 && static_cast<int>(rows.size()) < sp.target_count)
        throw NumericalError("subtractive clustering found only " + std::to_string(rows.size()) + " of " +
                             std::to_string(sp.target_count) + " requested centres");

    out.count = rows.size();
    out.center_rows = rows;
    Eigen::MatrixXd Cn(static_cast<Eigen::Index>(rows.size()), D.dims());
    out.centers.resize(Cn.rows(), Cn.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Cn.row(static_cast<Eigen::Index>(i)) = Zn.row(rows[i]);
        out.centers.row(static_cast<Eigen::Index>(i)) = D.values().row(rows[i]);
    }
    out.partition = update_memberships(euclidean_distances(Zn, Cn), c.m);
    return out;
}

} // namespace tsfuzzy
