#pragma once

// Takagi-Sugeno rule base and forward inference.
//
// Membership functions use exp(-(x - mean)^2 / width^2), i.e. there is no
// factor 2 in the denominator. The width estimator in identify.hpp carries a
// matching factor 2 under the square root, so a fitted width is sqrt(2) times
// the fuzzy standard deviation and the two conventions agree overall.
//
// Rule firing uses the minimum t-norm over input dimensions. The model output
// is the firing-weighted mean of the affine rule consequents.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tsfuzzy/error.hpp"

namespace tsfuzzy {

/// Total firing below this is treated as "no rule fires".
inline constexpr double degeneracy_floor = 1e-12;

struct GaussianMf {
    double mean = 0.0;
    double width = 1.0;
};

inline double mf_eval(const GaussianMf& mf, double x)
{
    if (!(mf.width > 0.0) || !std::isfinite(mf.width))
        throw DataError("membership width must be positive and finite, got " + std::to_string(mf.width));
    if (!std::isfinite(x))
        throw DataError("membership evaluated at a non-finite input");
    const double d = (x - mf.mean) / mf.width;
    return std::exp(-d * d);
}

struct TsRule {
    std::vector<GaussianMf> premise;
    /// Affine consequent: intercept first, then one slope per input.
    Eigen::VectorXd consequent;

    std::size_t input_dim() const noexcept { return premise.size(); }
};

namespace detail {

inline void check_input(std::size_t expected, Eigen::Index got)
{
    if (static_cast<Eigen::Index>(expected) != got)
        throw DataError("input has " + std::to_string(got) + " entries, rule expects " + std::to_string(expected));
}

} // namespace detail

inline double firing_strength(const TsRule& rule, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    detail::check_input(rule.input_dim(), x.size());
    double w = 1.0;
    for (std::size_t j = 0; j < rule.premise.size(); ++j)
        w = std::min(w, mf_eval(rule.premise[j], x(static_cast<Eigen::Index>(j))));
    return w;
}

inline double rule_output(const TsRule& rule, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    detail::check_input(rule.input_dim(), x.size());
    if (rule.consequent.size() != x.size() + 1)
        throw DataError("consequent length must be input_dim + 1");
    return rule.consequent(0) + rule.consequent.tail(x.size()).dot(x);
}

/// An immutable rule base. All rules share the same input dimension.
class TsModel {
public:
    TsModel() = default;

    explicit TsModel(std::vector<TsRule> rules) : rules_(std::move(rules))
    {
        if (rules_.empty())
            throw DataError("a TS model needs at least one rule");
        input_dim_ = rules_.front().input_dim();
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& r = rules_[i];
            if (r.input_dim() != input_dim_)
                throw DataError("rule " + std::to_string(i) + " has a different input dimension");
            if (r.consequent.size() != static_cast<Eigen::Index>(input_dim_ + 1))
                throw DataError("rule " + std::to_string(i) + " consequent must have input_dim + 1 entries");
            for (const auto& mf : r.premise)
                if (!(mf.width > 0.0) || !std::isfinite(mf.width) || !std::isfinite(mf.mean))
                    throw DataError("rule " + std::to_string(i) + " has an invalid membership function");
            if (!r.consequent.allFinite())
                throw DataError("rule " + std::to_string(i) + " has non-finite consequent coefficients");
        }
    }

    const std::vector<TsRule>& rules() const noexcept { return rules_; }
    const TsRule& rule(std::size_t i) const { return rules_.at(i); }
    std::size_t rule_count() const noexcept { return rules_.size(); }
    std::size_t input_dim() const noexcept { return input_dim_; }
    bool empty() const noexcept { return rules_.empty(); }

private:
    std::vector<TsRule> rules_;
    std::size_t input_dim_ = 0;
};

struct FiringVector {
    Eigen::VectorXd w;
    bool degenerate = false;

    double total() const { return w.sum(); }
};

/// Counts inference events worth warning about. Not synchronized: use one per thread.
struct InferenceStats {
    std::size_t degenerate = 0;
};

inline FiringVector firing_vector(const TsModel& model, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    FiringVector fv;
    fv.w.resize(static_cast<Eigen::Index>(model.rule_count()));
    for (std::size_t i = 0; i < model.rule_count(); ++i)
        fv.w(static_cast<Eigen::Index>(i)) = firing_strength(model.rule(i), x);
    fv.degenerate = fv.total() < degeneracy_floor;
    return fv;
}

/// Rule whose premise centre is closest to x, each axis scaled by that rule's width.
inline std::size_t nearest_rule(const TsModel& model, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    detail::check_input(model.input_dim(), x.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.rule_count(); ++i) {
        const auto& premise = model.rule(i).premise;
        double d = 0.0;
        for (std::size_t j = 0; j < premise.size(); ++j) {
            const double t = (x(static_cast<Eigen::Index>(j)) - premise[j].mean) / premise[j].width;
            d += t * t;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline double predict(const TsModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, InferenceStats* stats = nullptr)
{
    if (model.empty())
        throw DataError("cannot predict with an empty model");
    const FiringVector fv = firing_vector(model, x);
    if (fv.degenerate) {
        if (stats)
            ++stats->degenerate;
        return rule_output(model.rule(nearest_rule(model, x)), x);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < model.rule_count(); ++i) {
        const double w = fv.w(static_cast<Eigen::Index>(i));
        num += w * rule_output(model.rule(i), x);
        den += w;
    }
    return num / den;
}

/// Row-wise predict. Rows are independent, so the result does not depend on evaluation order.
inline Eigen::VectorXd predict_batch(const TsModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     InferenceStats* stats = nullptr)
{
    if (X.rows() > 0 && X.cols() != static_cast<Eigen::Index>(model.input_dim()))
        throw DataError("batch has " + std::to_string(X.cols()) + " columns, model expects " +
                        std::to_string(model.input_dim()));
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index k = 0; k < X.rows(); ++k) {
        try {
            out(k) = predict(model, X.row(k).transpose(), stats);
        } catch (const Error& e) {
            rethrow_with_context(e, "row " + std::to_string(k) + ": ");
        }
    }
    return out;
}

} // namespace tsfuzzy
