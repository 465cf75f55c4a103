#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsfuzzy/error.hpp"

namespace tsfuzzy {

enum class Algorithm { gk, fcm, sc };

inline std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::gk: return "GK";
    case Algorithm::fcm: return "FCM";
    case Algorithm::sc: return "SC";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
    std::string up;
    for (char ch : s)
        up.push_back(static_cast<char>(ch >= 'a' && ch <= 'z' ? ch - 'a' + 'A' : ch));
    if (up == "GK") return Algorithm::gk;
    if (up == "FCM") return Algorithm::fcm;
    if (up == "SC") return Algorithm::sc;
    throw ConfigError("unknown clustering algorithm '" + std::string(s) + "' (expected GK, FCM or SC)");
}

/// N samples of the joined input-output space, one row per sample: [x_1 .. x_n, y].
class DataMatrix {
public:
    DataMatrix() = default;

    explicit DataMatrix(Eigen::MatrixXd z, std::vector<std::string> units = {}) : z_(std::move(z)), units_(std::move(units))
    {
        if (!z_.allFinite())
            throw DataError("data matrix contains non-finite entries");
        if (units_.empty())
            units_.assign(static_cast<std::size_t>(z_.cols()), std::string());
        if (units_.size() != static_cast<std::size_t>(z_.cols()))
            throw DataError("units metadata does not match the column count");
    }

    /// Joins inputs X (N x n) and output y (N) into [X | y].
    static DataMatrix join(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> units = {})
    {
        if (X.rows() != y.size())
            throw DataError("input and output sample counts differ");
        Eigen::MatrixXd z(X.rows(), X.cols() + 1);
        z << X, y;
        return DataMatrix(std::move(z), std::move(units));
    }

    Eigen::Index samples() const noexcept { return z_.rows(); }
    Eigen::Index dims() const noexcept { return z_.cols(); }
    Eigen::Index input_dims() const noexcept { return z_.cols() - 1; }

    const Eigen::MatrixXd& values() const noexcept { return z_; }
    auto inputs() const { return z_.leftCols(z_.cols() - 1); }
    auto output() const { return z_.col(z_.cols() - 1); }
    const std::vector<std::string>& units() const noexcept { return units_; }

private:
    Eigen::MatrixXd z_;
    std::vector<std::string> units_;
};

/// C x N fuzzy membership matrix; column k holds the memberships of sample k.
struct PartitionMatrix {
    Eigen::MatrixXd mu;

    Eigen::Index clusters() const noexcept { return mu.rows(); }
    Eigen::Index samples() const noexcept { return mu.cols(); }
};

/// Empty string when U is a valid fuzzy partition, otherwise a description of the first violation.
inline std::string partition_violation(const PartitionMatrix& U, double tol = 1e-9)
{
    const auto& mu = U.mu;
    if (mu.size() == 0)
        return "partition is empty";
    for (Eigen::Index k = 0; k < mu.cols(); ++k) {
        for (Eigen::Index i = 0; i < mu.rows(); ++i)
            if (!(mu(i, k) >= 0.0 && mu(i, k) <= 1.0))
                return "membership (" + std::to_string(i) + "," + std::to_string(k) + ") outside [0,1]";
        if (std::abs(mu.col(k).sum() - 1.0) > tol)
            return "column " + std::to_string(k) + " does not sum to 1";
    }
    const double n = static_cast<double>(mu.cols());
    for (Eigen::Index i = 0; i < mu.rows(); ++i) {
        const double s = mu.row(i).sum();
        if (!(s > 0.0) || !(s < n))
            return "cluster " + std::to_string(i) + " is empty or absorbs every sample";
    }
    return {};
}

/// Cluster prototypes plus, for the adaptive-norm algorithm, each cluster's
/// fuzzy covariance F_i and induced norm matrix M_i = rho * det(F_i)^(1/d) * F_i^-1.
struct ClusterSet {
    Eigen::MatrixXd centers; ///< C x d
    std::vector<Eigen::MatrixXd> covariances;
    std::vector<Eigen::MatrixXd> norms;
    double rho = 1.0;

    Eigen::Index clusters() const noexcept { return centers.rows(); }
};

/// Subtractive clustering parameters, on min-max normalized data.
struct ScParams {
    double radius = 0.5;
    double squash = 1.25;
    double accept_ratio = 0.5;
    double reject_ratio = 0.15;
    /// 0 lets the accept/reject rules decide the count; otherwise exactly this many
    /// potential peaks are taken in order.
    int target_count = 0;
};

struct ClusterConfig {
    Algorithm algorithm = Algorithm::gk;
    int clusters = 2;
    double m = 2.0;
    double xi = 0.001;
    int max_iterations = 500;
    std::uint64_t seed = 42;
    double gamma = 1e-3;
    double rho = 1.0;
    ScParams sc;

    void validate() const
    {
        if (!(m > 1.0))
            throw ConfigError("fuzziness m must be > 1");
        if (!(xi > 0.0))
            throw ConfigError("termination constant xi must be > 0");
        if (max_iterations < 1)
            throw ConfigError("max_iterations must be >= 1");
        if (!(gamma >= 0.0 && gamma <= 1.0))
            throw ConfigError("regularization gamma must lie in [0,1]");
        if (!(rho > 0.0))
            throw ConfigError("cluster volume rho must be > 0");
        if (algorithm != Algorithm::sc && clusters < 2)
            throw ConfigError("cluster count must be >= 2");
        if (algorithm == Algorithm::sc) {
            if (!(sc.radius > 0.0 && sc.radius <= 1.0))
                throw ConfigError("sc radius must lie in (0,1]");
            if (!(sc.squash > 0.0))
                throw ConfigError("sc squash factor must be > 0");
            if (!(sc.reject_ratio > 0.0 && sc.reject_ratio <= sc.accept_ratio && sc.accept_ratio <= 1.0))
                throw ConfigError("sc ratios must satisfy 0 < reject <= accept <= 1");
            if (sc.target_count < 0)
                throw ConfigError("sc target count must be >= 0");
        }
    }
};

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0; ///< J evaluated with the previous partition and the current prototypes/norms
    double delta_u = 0.0;   ///< max-abs change of the partition matrix
};

struct ClusterResult {
    Algorithm algorithm = Algorithm::gk;
    PartitionMatrix partition;
    ClusterSet clusters;
    std::vector<IterationRecord> trace;
    bool converged = false;
    int iterations = 0;
};

} // namespace tsfuzzy
