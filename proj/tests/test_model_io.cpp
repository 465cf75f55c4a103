#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "tsfuzzy/model_io.hpp"

using namespace tsfuzzy;

namespace {

TsModel random_model(std::uint64_t seed, int C, int n)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1e3, 1e3), w(1e-6, 50.0);
    std::vector<TsRule> rules;
    for (int i = 0; i < C; ++i) {
        TsRule r;
        for (int j = 0; j < n; ++j)
            r.premise.push_back({u(rng), w(rng)});
        r.consequent.resize(n + 1);
        for (int j = 0; j <= n; ++j)
            r.consequent(j) = u(rng) / 3.0;
        rules.push_back(r);
    }
    return TsModel(rules);
}

void expect_identical(const TsModel& a, const TsModel& b)
{
    ASSERT_EQ(a.rule_count(), b.rule_count());
    ASSERT_EQ(a.input_dim(), b.input_dim());
    for (std::size_t i = 0; i < a.rule_count(); ++i) {
        for (std::size_t j = 0; j < a.input_dim(); ++j) {
            EXPECT_EQ(a.rule(i).premise[j].mean, b.rule(i).premise[j].mean);
            EXPECT_EQ(a.rule(i).premise[j].width, b.rule(i).premise[j].width);
        }
        EXPECT_EQ(a.rule(i).consequent, b.rule(i).consequent);
    }
}

} // namespace

TEST(ModelIo, RoundTripIsValueExact)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const TsModel m = random_model(s, 1 + static_cast<int>(s % 5), 1 + static_cast<int>(s % 4));
        const ModelMetadata meta{{"algorithm", "GK"}, {"stride", "10"}, {"note", "two words"}};
        const LoadedModel back = model_from_string(model_to_string(m, meta));
        expect_identical(m, back.model);
        EXPECT_EQ(back.meta, meta);
        EXPECT_EQ(model_to_string(back.model, back.meta), model_to_string(m, meta));
    }
}

TEST(ModelIo, ExtremeValuesSurvive)
{
    TsRule r;
    r.premise = {{std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}};
    r.consequent = Eigen::Vector2d(-0.1, 1.0 / 3.0);
    const TsModel m({r});
    expect_identical(m, model_from_string(model_to_string(m)).model);
}

TEST(ModelIo, ReportsLineOfBadInput)
{
    const std::string good = model_to_string(random_model(1, 2, 2));
    EXPECT_THROW(model_from_string("not-a-model 1\n"), DataError);
    EXPECT_THROW(model_from_string("tsfuzzy-model 99\n"), DataError);

    std::string bad = good;
    bad.replace(bad.find("width ") + 6, 1, "x");
    try {
        model_from_string(bad);
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
    EXPECT_THROW(model_from_string(good.substr(0, good.size() / 2)), DataError);
}
