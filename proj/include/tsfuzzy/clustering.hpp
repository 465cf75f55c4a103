#pragma once

#include "tsfuzzy/clustering/gk.hpp"
#include "tsfuzzy/clustering/subtractive.hpp"
#include "tsfuzzy/clustering/types.hpp"
#include "tsfuzzy/clustering/updates.hpp"

namespace tsfuzzy {

/// Runs the configured algorithm. For SC the trace is empty, the run counts as
/// converged, and the cluster count is whatever the potential search produced
/// (or cfg.sc.target_count when that is set).
inline ClusterResult run_clustering(const DataMatrix& D, const ClusterConfig& cfg)
{
    switch (cfg.algorithm) {
    case Algorithm::gk: return run_gk(D, cfg);
    case Algorithm::fcm: return run_fcm(D, cfg);
    case Algorithm::sc: break;
    }
    ScResult sc = run_sc(D, cfg);
    ClusterResult res;
    res.algorithm = Algorithm::sc;
    res.partition = std::move(sc.partition);
    res.clusters.centers = std::move(sc.centers);
    res.clusters.rho = cfg.rho;
    res.converged = true;
    return res;
}

} // namespace tsfuzzy
