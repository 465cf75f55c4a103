#pragma once

// Gustafson-Kessel and fuzzy c-means clustering.
//
// Both run the same alternating loop: prototypes -> (GK only) covariances and
// induced norms -> distances -> memberships, stopping once the max-abs change
// of U drops to xi. FCM is the special case where every norm matrix is the
// identity. All reductions run in a fixed order, so a seed fully determines
// the trace.

#include <ostream>

#include "tsfuzzy/clustering/updates.hpp"

namespace tsfuzzy {

namespace detail {

inline ClusterResult run_alternating(const DataMatrix& D, const ClusterConfig& cfg, bool adaptive_norm)
{
    cfg.validate();
    if (D.samples() <= cfg.clusters)
        throw ConfigError("cluster count " + std::to_string(cfg.clusters) + " must be below the sample count " +
                          std::to_string(D.samples()));

    ClusterResult res;
    res.algorithm = adaptive_norm ? Algorithm::gk : Algorithm::fcm;
    PartitionMatrix U = init_partition(D.samples(), cfg.clusters, cfg.seed);

    auto distances = [&](const Eigen::MatrixXd& V) -> Eigen::MatrixXd {
        if (!adaptive_norm)
            return euclidean_distances(D.values(), V);
        return gk_distances(D, V, update_covariances(D, U, V, cfg.m, cfg.gamma), cfg.rho);
    };

    for (int l = 1; l <= cfg.max_iterations; ++l) {
        const Eigen::MatrixXd V = update_centers(D, U, cfg.m);
        const Eigen::MatrixXd G = distances(V);
        const double J = clustering_objective(U, G, cfg.m);
        PartitionMatrix next = update_memberships(G, cfg.m);
        const double delta = (next.mu - U.mu).cwiseAbs().maxCoeff();
        U = std::move(next);
        res.trace.push_back({l, J, delta});
        res.iterations = l;
        if (delta <= cfg.xi) {
            res.converged = true;
            break;
        }
    }

    // Report prototypes consistent with the returned partition.
    res.clusters.rho = cfg.rho;
    res.clusters.centers = update_centers(D, U, cfg.m);
    const auto dim = D.dims();
    if (adaptive_norm) {
        res.clusters.covariances = update_covariances(D, U, res.clusters.centers, cfg.m, cfg.gamma);
        for (const auto& F : res.clusters.covariances)
            res.clusters.norms.push_back(norm_matrix(F, cfg.rho));
    } else {
        res.clusters.norms.assign(static_cast<std::size_t>(cfg.clusters), Eigen::MatrixXd::Identity(dim, dim));
    }
    res.partition = std::move(U);
    return res;
}

} // namespace detail

inline ClusterResult run_gk(const DataMatrix& D, const ClusterConfig& cfg)
{
    return detail::run_alternating(D, cfg, true);
}

inline ClusterResult run_fcm(const DataMatrix& D, const ClusterConfig& cfg)
{
    return detail::run_alternating(D, cfg, false);
}

/// CSV columns: iteration,J_GK,delta_U,converged.
inline void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace, double xi)
{
    os << "iteration,J_GK,delta_U,converged\n";
    os.precision(17);
    for (const auto& r : trace)
        os << r.iteration << ',' << r.objective << ',' << r.delta_u << ',' << (r.delta_u <= xi ? 1 : 0) << '\n';
}

} // namespace tsfuzzy
