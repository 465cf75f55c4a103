#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tsfuzzy/metrics.hpp"

using namespace tsfuzzy;

namespace {

using Series = std::vector<double>;

Series random_series(std::uint64_t seed, std::size_t n, double offset = 0.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(offset, 2.0);
    Series s(n);
    for (auto& v : s)
        v = g(rng);
    return s;
}

Series affine(const Series& s, double a, double b)
{
    Series out(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        out[k] = a * s[k] + b;
    return out;
}

} // namespace

TEST(Rmse, Examples)
{
    const Series y{1, 2, 3};
    EXPECT_EQ(rmse(y, y), 0.0);
    EXPECT_DOUBLE_EQ(rmse(y, affine(y, 1, 1)), 1.0);
    EXPECT_NEAR(rmse(Series{0, 0}, Series{3, 4}), std::sqrt(12.5), 1e-15);
}

TEST(Rmse, LengthErrors)
{
    EXPECT_THROW(rmse(Series{}, Series{}), DataError);
    EXPECT_THROW(rmse(Series{1, 2}, Series{1}), DataError);
}

TEST(Rmse, ShiftIdentity)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Series y = random_series(s, 50), p = random_series(s + 100, 50);
        const double c = 0.3 * static_cast<double>(s) - 2.0;
        double md = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k)
            md += (p[k] - y[k]) / static_cast<double>(y.size());
        const double e = rmse(y, p);
        EXPECT_NEAR(rmse(y, affine(p, 1, c)), std::sqrt(e * e + c * c + 2 * c * md), 1e-12);
    }
}

TEST(Efficiency, Examples)
{
    const Series y{1, 4, 2, 7};
    EXPECT_EQ(ce(y, y), 1.0);
    EXPECT_NEAR(ce(y, Series(4, 3.5)), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(ce(Series{0, 2}, Series{2, 0}), -3.0);
    EXPECT_THROW(ce(Series{3, 3, 3}, Series{1, 2, 3}), DataError);
}

TEST(Efficiency, IdentityWithRmse)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Series y = random_series(s, 40), p = random_series(s + 7, 40);
        double ybar = 0.0, f0 = 0.0;
        for (double v : y)
            ybar += v / 40.0;
        for (double v : y)
            f0 += (v - ybar) * (v - ybar);
        const double e = rmse(y, p);
        EXPECT_NEAR(ce(y, p), 1.0 - 40.0 * e * e / f0, 1e-12);
    }
}

TEST(VolumeError, Examples)
{
    const Series y{1, 2, 3, 4};
    EXPECT_EQ(ve(y, y), 0.0);
    EXPECT_NEAR(ve(y, affine(y, 0.9, 0)), 10.0, 1e-12);
    EXPECT_NEAR(ve(y, affine(y, 1.1, 0)), -10.0, 1e-12);
    EXPECT_THROW(ve(Series{1, -1}, Series{0, 0}), DataError);
}

TEST(Correlation, Examples)
{
    const Series y = random_series(3, 30);
    EXPECT_NEAR(r(y, affine(y, 2, 5)), 1.0, 1e-14);
    EXPECT_NEAR(r(y, affine(y, -1, 0)), -1.0, 1e-14);
    EXPECT_NEAR(r(Series{1, -1, 0}, Series{0, 0, 1}), 0.0, 1e-12);
    EXPECT_THROW(r(Series{1, 1}, Series{1, 2}), DataError);
    EXPECT_THROW(r(Series{1, 2}, Series{5, 5}), DataError);
}

TEST(Correlation, AffineInvariantAndBounded)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Series y = random_series(s, 25), p = random_series(s + 50, 25);
        const double base = r(y, p);
        EXPECT_LE(std::abs(base), 1.0);
        EXPECT_NEAR(r(affine(y, 3.0, -1.0), p), base, 1e-10);
        EXPECT_NEAR(r(y, affine(p, 0.01, 100.0)), base, 1e-10);
    }
}

TEST(MetricSetAll, UndefinedMeasuresAreNaN)
{
    const MetricSet m = evaluate_metrics(Series{2, 2, 2}, Series{1, 2, 3});
    EXPECT_NEAR(m.rmse, std::sqrt(2.0 / 3.0), 1e-15);
    EXPECT_TRUE(std::isnan(m.ce));
    EXPECT_TRUE(std::isnan(m.r));
    EXPECT_NEAR(m.ve, 0.0, 1e-12);
    EXPECT_THROW(evaluate_metrics(Series{1}, Series{}), DataError);
}
