#pragma once

// Forecast skill measures: RMSE, Nash-Sutcliffe coefficient of efficiency,
// signed volumetric error in percent and Pearson correlation.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "tsfuzzy/error.hpp"

namespace tsfuzzy {

struct MetricSet {
    double rmse = 0.0;
    double ce = 0.0;
    double ve = 0.0;
    double r = 0.0;
};

namespace detail {

inline void check_series(std::span<const double> y, std::span<const double> yhat)
{
    if (y.empty())
        throw DataError("metric needs a non-empty series");
    if (y.size() != yhat.size())
        throw DataError("observed and predicted series differ in length (" + std::to_string(y.size()) + " vs " +
                        std::to_string(yhat.size()) + ")");
}

inline double mean(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double residual_ss(std::span<const double> y, std::span<const double> yhat)
{
    double f = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k)
        f += (y[k] - yhat[k]) * (y[k] - yhat[k]);
    return f;
}

} // namespace detail

inline double rmse(std::span<const double> y, std::span<const double> yhat)
{
    detail::check_series(y, yhat);
    return std::sqrt(detail::residual_ss(y, yhat) / static_cast<double>(y.size()));
}

/// 1 - F/F0 with F the residual sum of squares and F0 the spread of y about its mean.
inline double ce(std::span<const double> y, std::span<const double> yhat)
{
    detail::check_series(y, yhat);
    const double ybar = detail::mean(y);
    double f0 = 0.0;
    for (double v : y)
        f0 += (v - ybar) * (v - ybar);
    if (!(f0 > 0.0))
        throw DataError("coefficient of efficiency is undefined for a constant observed series");
    return 1.0 - detail::residual_ss(y, yhat) / f0;
}

inline double ve(std::span<const double> y, std::span<const double> yhat)
{
    detail::check_series(y, yhat);
    double sy = 0.0;
    double sp = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        sy += y[k];
        sp += yhat[k];
    }
    if (sy == 0.0)
        throw DataError("volumetric error is undefined when the observed volume is zero");
    return (sy - sp) / sy * 100.0;
}

inline double r(std::span<const double> y, std::span<const double> yhat)
{
    detail::check_series(y, yhat);
    const double ybar = detail::mean(y);
    const double pbar = detail::mean(yhat);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double a = y[k] - ybar;
        const double b = yhat[k] - pbar;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw DataError("correlation is undefined for a constant series");
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

/// All four measures. A measure that is undefined for this pair is reported as NaN.
inline MetricSet evaluate_metrics(std::span<const double> y, std::span<const double> yhat)
{
    detail::check_series(y, yhat);
    const auto guarded = [&](auto fn) {
        try {
            return fn(y, yhat);
        } catch (const DataError&) {
            return std::nan("");
        }
    };
    return {rmse(y, yhat), guarded(ce), guarded(ve), guarded(r)};
}

} // namespace tsfuzzy
