#pragma once

// Identification of a TS model from a fuzzy partition of the joined
// input-output space:
//
//   1. Gaussian premises from the memberships, using the input columns only.
//   2. Normalized rule truth values for every sample.
//   3. The global regression Y = pi * zeta + eps, where row k of pi is the
//      concatenation over rules of truth_ik * [1, x_k].
//   4. zeta by least squares through a complete orthogonal decomposition
//      (column-pivoted QR followed by an RZ step), which returns the
//      minimum-norm solution when pi is rank deficient.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsfuzzy/clustering.hpp"
#include "tsfuzzy/core.hpp"
#include "tsfuzzy/metrics.hpp"
#include "tsfuzzy/validity.hpp"

namespace tsfuzzy {

/// Relative floor for premise widths, as a fraction of the input column's range.
inline constexpr double width_floor_fraction = 1e-6;

inline Eigen::MatrixXd premise_means(const DataMatrix& D, const PartitionMatrix& U, double m)
{
    if (U.samples() != D.samples())
        throw DataError("partition and data disagree on the sample count");
    const auto X = D.inputs();
    Eigen::MatrixXd means(U.clusters(), D.input_dims());
    for (Eigen::Index i = 0; i < U.clusters(); ++i) {
        const Eigen::VectorXd w = detail::weights_pow(U.mu.row(i), m);
        const double mass = w.sum();
        if (!(mass > 0.0))
            throw NumericalError("cluster " + std::to_string(i) + " has no membership mass");
        means.row(i) = (X.transpose() * w).transpose() / mass;
    }
    return means;
}

/// sigma = sqrt(2 * sum_k mu^m (x - mean)^2 / sum_k mu^m), floored at a small fraction of the column range.
inline Eigen::MatrixXd premise_widths(const DataMatrix& D, const PartitionMatrix& U, double m, const Eigen::MatrixXd& means)
{
    const auto X = D.inputs();
    if (means.rows() != U.clusters() || means.cols() != X.cols())
        throw DataError("premise means have the wrong shape");
    Eigen::MatrixXd widths(U.clusters(), X.cols());
    for (Eigen::Index i = 0; i < U.clusters(); ++i) {
        const Eigen::VectorXd w = detail::weights_pow(U.mu.row(i), m);
        const double mass = w.sum();
        if (!(mass > 0.0))
            throw NumericalError("cluster " + std::to_string(i) + " has no membership mass");
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double spread = (w.array() * (X.col(j).array() - means(i, j)).square()).sum();
            const double range = X.col(j).maxCoeff() - X.col(j).minCoeff();
            const double floor = width_floor_fraction * (range > 0.0 ? range : 1.0);
            widths(i, j) = std::max(std::sqrt(2.0 * spread / mass), floor);
        }
    }
    return widths;
}

/// A model carrying only premises (all consequents zero).
inline TsModel premise_model(const Eigen::MatrixXd& means, const Eigen::MatrixXd& widths)
{
    std::vector<TsRule> rules;
    for (Eigen::Index i = 0; i < means.rows(); ++i) {
        TsRule r;
        for (Eigen::Index j = 0; j < means.cols(); ++j)
            r.premise.push_back({means(i, j), widths(i, j)});
        r.consequent = Eigen::VectorXd::Zero(means.cols() + 1);
        rules.push_back(std::move(r));
    }
    return TsModel(std::move(rules));
}

/// N x C matrix of w_ik / sum_i w_ik. A sample no rule fires on is assigned
/// entirely to its nearest rule.
inline Eigen::MatrixXd normalized_truth(const TsModel& premises, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        InferenceStats* stats = nullptr)
{
    const auto C = static_cast<Eigen::Index>(premises.rule_count());
    Eigen::MatrixXd T(X.rows(), C);
    for (Eigen::Index k = 0; k < X.rows(); ++k) {
        const Eigen::VectorXd x = X.row(k).transpose();
        const FiringVector fv = firing_vector(premises, x);
        if (fv.degenerate) {
            if (stats)
                ++stats->degenerate;
            T.row(k).setZero();
            T(k, static_cast<Eigen::Index>(nearest_rule(premises, x))) = 1.0;
        } else {
            T.row(k) = fv.w.transpose() / fv.total();
        }
    }
    return T;
}

inline Eigen::MatrixXd build_regressors(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                        const Eigen::Ref<const Eigen::MatrixXd>& truth)
{
    if (X.rows() != truth.rows())
        throw DataError("inputs and truth values disagree on the sample count");
    const Eigen::Index n = X.cols();
    const Eigen::Index C = truth.cols();
    Eigen::MatrixXd pi(X.rows(), C * (n + 1));
    for (Eigen::Index k = 0; k < X.rows(); ++k)
        for (Eigen::Index i = 0; i < C; ++i) {
            const double t = truth(k, i);
            pi(k, i * (n + 1)) = t;
            pi.block(k, i * (n + 1) + 1, 1, n) = t * X.row(k);
        }
    return pi;
}

struct LeastSquaresSolution {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residual;
    double residual_norm = 0.0;
    Eigen::Index rank = 0;
};

inline LeastSquaresSolution solve_consequents(const Eigen::MatrixXd& pi, const Eigen::VectorXd& Y)
{
    if (pi.rows() != Y.size())
        throw DataError("regressor matrix and target vector disagree on the sample count");
    if (pi.size() == 0 || pi.isZero(0.0))
        throw NumericalError("regressor matrix is identically zero");
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(pi);
    LeastSquaresSolution sol;
    sol.coefficients = cod.solve(Y);
    sol.residual = Y - pi * sol.coefficients;
    sol.residual_norm = sol.residual.norm();
    sol.rank = cod.rank();
    if (!sol.coefficients.allFinite())
        throw NumericalError("least-squares solution is not finite");
    return sol;
}

/// Splits a stacked coefficient vector into per-rule consequents and attaches them to the premises.
inline TsModel assemble_model(const TsModel& premises, const Eigen::VectorXd& zeta)
{
    const auto n1 = static_cast<Eigen::Index>(premises.input_dim() + 1);
    if (zeta.size() != n1 * static_cast<Eigen::Index>(premises.rule_count()))
        throw DataError("coefficient vector length does not match the rule base");
    std::vector<TsRule> rules = premises.rules();
    for (std::size_t i = 0; i < rules.size(); ++i)
        rules[i].consequent = zeta.segment(static_cast<Eigen::Index>(i) * n1, n1);
    return TsModel(std::move(rules));
}

struct FitConfig {
    ClusterConfig clustering;
    /// When > 0, the rule count is chosen by sweeping C = 2..sweep_max and taking the validity consensus.
    int sweep_max = 0;
};

struct FitReport {
    Algorithm algorithm = Algorithm::gk;
    std::size_t rules = 0;
    int iterations = 0;
    bool converged = false;
    bool swept = false;
    double residual_norm = 0.0;
    Eigen::Index rank = 0;
    MetricSet training;
    std::size_t degenerate = 0;
};

struct FitResult {
    TsModel model;
    FitReport report;
    ClusterResult clustering;
    std::optional<ValidityReport> sweep;
};

inline FitResult fit_model(const DataMatrix& D, const FitConfig& cfg)
{
    FitResult out;
    ClusterConfig cc = cfg.clustering;
    const auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            rethrow_with_context(e, std::string(name) + ": ");
        }
    };

    if (cfg.sweep_max > 0) {
        out.sweep = stage("rule-count sweep", [&] { return sweep_clusters(D, cc, 2, cfg.sweep_max); });
        cc.clusters = out.sweep->consensus;
        if (cc.algorithm == Algorithm::sc)
            cc.sc.target_count = cc.clusters;
        out.report.swept = true;
    }
    out.clustering = stage("clustering", [&] { return run_clustering(D, cc); });

    const PartitionMatrix& U = out.clustering.partition;
    const TsModel premises = stage("premise estimation", [&] {
        const Eigen::MatrixXd means = premise_means(D, U, cc.m);
        return premise_model(means, premise_widths(D, U, cc.m, means));
    });

    const Eigen::MatrixXd X = D.inputs();
    const Eigen::VectorXd Y = D.output();
    InferenceStats stats;
    const LeastSquaresSolution sol = stage("consequent estimation", [&] {
        return solve_consequents(build_regressors(X, normalized_truth(premises, X, &stats)), Y);
    });
    out.model = assemble_model(premises, sol.coefficients);

    const Eigen::VectorXd fitted = predict_batch(out.model, X);
    auto& rep = out.report;
    rep.algorithm = cc.algorithm;
    rep.rules = out.model.rule_count();
    rep.iterations = out.clustering.iterations;
    rep.converged = out.clustering.converged;
    rep.residual_norm = sol.residual_norm;
    rep.rank = sol.rank;
    rep.degenerate = stats.degenerate;
    rep.training = evaluate_metrics({Y.data(), static_cast<std::size_t>(Y.size())},
                                    {fitted.data(), static_cast<std::size_t>(fitted.size())});
    return out;
}

/// CSV columns: algorithm,rules,iterations,converged,swept,residual_norm,rank,RMSE,VE,CE,R,degenerate.
inline void write_fit_report_csv(std::ostream& os, const FitReport& r, const std::string& label = {})
{
    os << "algorithm,rules,iterations,converged,swept,residual_norm,rank,RMSE,VE,CE,R,degenerate\n";
    os.precision(17);
    os << (label.empty() ? to_string(r.algorithm) : label) << ',' << r.rules << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',' << (r.swept ? 1 : 0) << ',' << r.residual_norm << ',' << r.rank << ','
       << r.training.rmse << ',' << r.training.ve << ',' << r.training.ce << ',' << r.training.r << ','
       << r.degenerate << '\n';
}

} // namespace tsfuzzy
