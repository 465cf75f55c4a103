#pragma once

// Alternating-optimization steps shared by the fuzzy c-means family.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsfuzzy/clustering/types.hpp"

namespace tsfuzzy {

namespace detail {

// 53-bit uniform in the open interval (0,1). std::mt19937_64's output sequence is
// fixed by the standard, unlike the std:: distributions, so this is portable.
inline double open_unit(std::mt19937_64& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline Eigen::VectorXd weights_pow(const Eigen::Ref<const Eigen::RowVectorXd>& mu, double m)
{
    Eigen::VectorXd w(mu.size());
    for (Eigen::Index k = 0; k < mu.size(); ++k)
        w(k) = m == 2.0 ? mu(k) * mu(k) : std::pow(mu(k), m);
    return w;
}

} // namespace detail

inline PartitionMatrix init_partition(Eigen::Index n_samples, int n_clusters, std::uint64_t seed)
{
    if (n_clusters < 2)
        throw ConfigError("cluster count must be >= 2");
    if (n_clusters >= n_samples)
        throw ConfigError("cluster count " + std::to_string(n_clusters) + " must be below the sample count " +
                          std::to_string(n_samples));
    std::mt19937_64 rng(seed);
    PartitionMatrix U{Eigen::MatrixXd(n_clusters, n_samples)};
    for (Eigen::Index k = 0; k < n_samples; ++k) {
        for (Eigen::Index i = 0; i < n_clusters; ++i)
            U.mu(i, k) = detail::open_unit(rng);
        U.mu.col(k) /= U.mu.col(k).sum();
    }
    return U;
}

/// v_i = sum_k mu_ik^m Z_k / sum_k mu_ik^m. Returns C x d.
inline Eigen::MatrixXd update_centers(const DataMatrix& D, const PartitionMatrix& U, double m)
{
    if (U.samples() != D.samples())
        throw DataError("partition and data disagree on the sample count");
    const auto& Z = D.values();
    Eigen::MatrixXd V(U.clusters(), D.dims());
    for (Eigen::Index i = 0; i < U.clusters(); ++i) {
        const Eigen::VectorXd w = detail::weights_pow(U.mu.row(i), m);
        const double mass = w.sum();
        if (!(mass > 0.0))
            throw NumericalError("cluster " + std::to_string(i) + " has no membership mass");
        V.row(i) = (Z.transpose() * w).transpose() / mass;
    }
    return V;
}

/// Unregularized fuzzy covariance of every cluster.
inline std::vector<Eigen::MatrixXd> fuzzy_scatter(const DataMatrix& D, const PartitionMatrix& U,
                                                  const Eigen::MatrixXd& centers, double m)
{
    const auto& Z = D.values();
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(U.clusters()));
    for (Eigen::Index i = 0; i < U.clusters(); ++i) {
        const Eigen::VectorXd w = detail::weights_pow(U.mu.row(i), m);
        const double mass = w.sum();
        if (!(mass > 0.0))
            throw NumericalError("cluster " + std::to_string(i) + " has no membership mass");
        const Eigen::MatrixXd diff = Z.rowwise() - centers.row(i);
        Eigen::MatrixXd F = diff.transpose() * w.asDiagonal() * diff / mass;
        out.push_back(0.5 * (F + F.transpose()));
    }
    return out;
}

/// Covariance of the whole data set about its mean.
inline Eigen::MatrixXd total_scatter(const DataMatrix& D)
{
    const auto& Z = D.values();
    const Eigen::MatrixXd diff = Z.rowwise() - Z.colwise().mean();
    return diff.transpose() * diff / static_cast<double>(Z.rows());
}

/// Scale of the identity the covariances are blended toward: det(F_all)^(1/d),
/// or trace(F_all)/d when the data is flat in some direction.
inline double regularization_scale(const DataMatrix& D)
{
    const Eigen::MatrixXd F = total_scatter(D);
    const double d = static_cast<double>(F.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(F);
    if (llt.info() == Eigen::Success) {
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        const double s = std::exp(log_det / d);
        if (std::isfinite(s) && s > 0.0)
            return s;
    }
    return F.trace() / d;
}

inline Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& F, double gamma, double scale)
{
    Eigen::MatrixXd out = (1.0 - gamma) * F;
    out.diagonal().array() += gamma * scale;
    return out;
}

inline void require_positive_definite(const Eigen::MatrixXd& F, Eigen::Index cluster)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F, Eigen::EigenvaluesOnly);
    const double tr = F.trace();
    if (es.info() != Eigen::Success || !(tr > 0.0) || !(es.eigenvalues().minCoeff() > 1e-12 * tr))
        throw NumericalError("covariance of cluster " + std::to_string(cluster) + " is singular after regularization");
}

inline std::vector<Eigen::MatrixXd> update_covariances(const DataMatrix& D, const PartitionMatrix& U,
                                                       const Eigen::MatrixXd& centers, double m, double gamma)
{
    auto F = fuzzy_scatter(D, U, centers, m);
    const double scale = gamma > 0.0 ? regularization_scale(D) : 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
        if (gamma > 0.0)
            F[i] = regularize_covariance(F[i], gamma, scale);
        require_positive_definite(F[i], static_cast<Eigen::Index>(i));
    }
    return F;
}

namespace detail {

// Cholesky factor of F and the volume factor rho * det(F)^(1/d).
struct NormFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double scale = 1.0;
};

inline NormFactor factor_norm(const Eigen::MatrixXd& F, double rho)
{
    NormFactor nf;
    nf.llt.compute(F);
    if (nf.llt.info() != Eigen::Success)
        throw NumericalError("covariance matrix is not positive definite");
    const double log_det = 2.0 * nf.llt.matrixLLT().diagonal().array().log().sum();
    nf.scale = rho * std::exp(log_det / static_cast<double>(F.rows()));
    return nf;
}

} // namespace detail

/// Norm-inducing matrix rho * det(F)^(1/d) * F^-1, where d is the clustering-space dimension.
inline Eigen::MatrixXd norm_matrix(const Eigen::MatrixXd& F, double rho = 1.0)
{
    const auto nf = detail::factor_norm(F, rho);
    return nf.scale * nf.llt.solve(Eigen::MatrixXd::Identity(F.rows(), F.cols()));
}

inline double gk_distance(const Eigen::Ref<const Eigen::VectorXd>& z, const Eigen::Ref<const Eigen::VectorXd>& v,
                          const Eigen::MatrixXd& F, double rho = 1.0)
{
    if (z.size() != v.size() || F.rows() != z.size() || F.cols() != z.size())
        throw DataError("gk_distance: dimension mismatch");
    const auto nf = detail::factor_norm(F, rho);
    const Eigen::VectorXd y = nf.llt.matrixL().solve(z - v);
    return nf.scale * y.squaredNorm();
}

/// C x N matrix of squared adaptive-norm distances.
inline Eigen::MatrixXd gk_distances(const DataMatrix& D, const Eigen::MatrixXd& centers,
                                    const std::vector<Eigen::MatrixXd>& covariances, double rho)
{
    const auto& Z = D.values();
    Eigen::MatrixXd G(centers.rows(), Z.rows());
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        detail::NormFactor nf;
        try {
            nf = detail::factor_norm(covariances[static_cast<std::size_t>(i)], rho);
        } catch (const Error& e) {
            rethrow_with_context(e, "cluster " + std::to_string(i) + ": ");
        }
        Eigen::MatrixXd diff = (Z.rowwise() - centers.row(i)).transpose();
        nf.llt.matrixL().solveInPlace(diff);
        G.row(i) = nf.scale * diff.colwise().squaredNorm();
    }
    return G;
}

/// C x N matrix of squared Euclidean distances.
inline Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& centers)
{
    Eigen::MatrixXd G(centers.rows(), Z.rows());
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
        G.row(i) = (Z.rowwise() - centers.row(i)).rowwise().squaredNorm().transpose();
    return G;
}

/// mu_ik = 1 / sum_q (G_ik / G_qk)^(1/(m-1)). Samples sitting exactly on one or more
/// prototypes split their membership equally among those prototypes.
inline PartitionMatrix update_memberships(const Eigen::MatrixXd& distances, double m)
{
    const double e = 1.0 / (m - 1.0);
    const Eigen::Index C = distances.rows();
    PartitionMatrix U{Eigen::MatrixXd::Zero(C, distances.cols())};
    for (Eigen::Index k = 0; k < distances.cols(); ++k) {
        const auto g = distances.col(k);
        Eigen::Index zeros = 0;
        for (Eigen::Index i = 0; i < C; ++i)
            zeros += g(i) <= 0.0 ? 1 : 0;
        if (zeros > 0) {
            for (Eigen::Index i = 0; i < C; ++i)
                U.mu(i, k) = g(i) <= 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
            continue;
        }
        for (Eigen::Index i = 0; i < C; ++i) {
            double s = 0.0;
            for (Eigen::Index q = 0; q < C; ++q)
                s += e == 1.0 ? g(i) / g(q) : std::pow(g(i) / g(q), e);
            U.mu(i, k) = 1.0 / s;
        }
    }
    return U;
}

/// J = sum_i sum_k mu_ik^m G_ik^2.
inline double clustering_objective(const PartitionMatrix& U, const Eigen::MatrixXd& distances, double m)
{
    double J = 0.0;
    for (Eigen::Index k = 0; k < U.samples(); ++k)
        for (Eigen::Index i = 0; i < U.clusters(); ++i) {
            const double w = m == 2.0 ? U.mu(i, k) * U.mu(i, k) : std::pow(U.mu(i, k), m);
            J += w * distances(i, k);
        }
    return J;
}

} // namespace tsfuzzy
