#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tsfuzzy/experiment.hpp"

using namespace tsfuzzy;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tsfuzzy_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig config_from(const std::string& text)
{
    std::istringstream is(text);
    return parse_config(is, "test.cfg");
}

std::string config_error(const std::string& text)
{
    try {
        config_from(text).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::size_t count_files(const fs::path& dir, const std::string& prefix)
{
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        n += e.path().filename().string().rfind(prefix, 0) == 0 ? 1 : 0;
    return n;
}

// Event with three steady regimes (dry, moderate, heavy) of 100 samples each.
void write_three_regime_event(const fs::path& path)
{
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 0.02), h(0.0, 1.0);
    EventSeries s;
    const double rain[3] = {0.1, 1.0, 2.0};
    const double head[3] = {5.0, 20.0, 40.0};
    for (std::size_t k = 0; k < 300; ++k) {
        const std::size_t regime = k / 100;
        s.timestamps.push_back(30.0 * static_cast<double>(k));
        for (auto& r : s.rain)
            r.push_back(std::max(0.0, rain[regime] + g(rng)));
        s.head.push_back(head[regime] + h(rng));
    }
    std::ofstream os(path);
    write_event_csv(os, s);
}

void write_report(const fs::path& path, const std::string& rows)
{
    std::ofstream os(path);
    os << forecast_header << '\n' << rows;
}

} // namespace

// ---------------------------------------------------------------------------
// configuration

TEST(Config, ParsesKeysCommentsAndLists)
{
    const ExperimentConfig c = config_from("# experiment\n"
                                           "train = synth:3:6000\n"
                                           "validation = data/event.csv  # measured\n"
                                           "algorithms = gk, sc\n"
                                           "clusters = sweep\n"
                                           "c_max = 5\n"
                                           "strides = 1, 10\n"
                                           "normalization = both\n"
                                           "lag = 4, 5, 6\n"
                                           "synth.gauge_scale = 1, 2, 3\n");
    ASSERT_TRUE(c.train && c.validation);
    EXPECT_TRUE(c.train->synthetic());
    EXPECT_EQ(c.train->seed, 3u);
    EXPECT_EQ(c.train->duration, 6000.0);
    EXPECT_EQ(c.validation->path, "data/event.csv");
    EXPECT_EQ(c.algorithms, (std::vector<Algorithm>{Algorithm::gk, Algorithm::sc}));
    EXPECT_TRUE(c.sweep);
    EXPECT_EQ(c.c_max, 5);
    EXPECT_EQ(c.strides, (std::vector<int>{1, 10}));
    EXPECT_EQ(c.normalization, NormalizationMode::both);
    EXPECT_EQ(*c.lags, (ChannelLags{4, 5, 6}));
    EXPECT_EQ(c.synth.gauge_scale[2], 3.0);
    EXPECT_EQ(config_from("lag = 7\n").lags, uniform_lag(7));
    EXPECT_FALSE(config_from("lag = auto\n").lags);
}

TEST(Config, ErrorsNameKeyAndLine)
{
    EXPECT_NE(config_error("m = 2\nfuzziness = 2\n").find("test.cfg:2: unknown config key 'fuzziness'"),
              std::string::npos);
    EXPECT_NE(config_error("clusters = three\n").find("config key 'clusters'"), std::string::npos);
    EXPECT_NE(config_error("m = 2\nm = 3\n").find("repeats line 1"), std::string::npos);
    EXPECT_NE(config_error("just words\n").find("key = value"), std::string::npos);
    EXPECT_NE(config_error("strides = 0\n").find("strides"), std::string::npos);
    EXPECT_NE(config_error("algorithms = kmeans\n").find("algorithms"), std::string::npos);
    EXPECT_NE(config_error("m = 1\n").find("fuzziness"), std::string::npos);
    EXPECT_NE(config_error("normalization = maybe\n").find("normalization"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/exp.cfg"), ConfigError);
}

TEST(Config, CanonicalTextRoundTrips)
{
    ExperimentConfig c = config_from("train = synth:9\nalgorithms = SC\nstrides = 2, 5\nxi = 0.0001\nlag = 1,2,3\n");
    const ExperimentConfig back = config_from(canonical_config_text(c));
    EXPECT_EQ(canonical_config_text(back), canonical_config_text(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
    c.seed = 43;
    EXPECT_NE(config_hash(back), config_hash(c));
}

TEST(Config, ShippedExampleLoads)
{
    const ExperimentConfig c = load_config(TSFUZZY_SOURCE_DIR "/configs/synthetic.cfg");
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(combinations(c).size(), 24u);
}

TEST(Combinations, CartesianOrderAndLabels)
{
    const ExperimentConfig c = config_from("algorithms = GK, FCM, SC\nstrides = 1, 2, 5, 10\nnormalization = both\n");
    const auto combos = combinations(c);
    ASSERT_EQ(combos.size(), 24u);
    EXPECT_EQ(combos.front().label(), "GK_s1_dim");
    EXPECT_EQ(combos[1].label(), "GK_s1_norm");
    EXPECT_EQ(combos.back().label(), "SC_s10_norm");
}

// ---------------------------------------------------------------------------
// commands

TEST(Commands, SynthWritesEventAndManifest)
{
    const fs::path dir = scratch("synth");
    ExperimentConfig c;
    c.out = dir.string();
    c.seed = 7;
    const EventSeries s = cmd_synth(c);
    ASSERT_TRUE(fs::exists(dir / "storm_7.csv"));
    const EventSeries back = load_event_csv((dir / "storm_7.csv").string(), 30.0);
    EXPECT_EQ(back.head, s.head);

    const auto j = nlohmann::json::parse(read_file(dir / "manifest_synth.json"));
    EXPECT_EQ(j["command"], "synth");
    EXPECT_EQ(j["seed"], 7u);
    EXPECT_EQ(j["config_hash"], config_hash(c));
    EXPECT_EQ(j["config"]["seed"], "7");
    ASSERT_EQ(j["outputs"].size(), 1u);
    EXPECT_EQ(j["outputs"][0]["file"], "storm_7.csv");
    EXPECT_EQ(j["outputs"][0]["fnv1a64"], hex64(fnv1a64(read_file(dir / "storm_7.csv"))));
    for (const auto& e : fs::directory_iterator(dir))
        EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Commands, SweepFindsThreeRegimes)
{
    const fs::path dir = scratch("sweep");
    write_three_regime_event(dir / "event.csv");
    ExperimentConfig c = config_from("algorithms = GK, FCM\nclusters = sweep\nc_max = 6\nlag = 0\n");
    c.train = EventSource{(dir / "event.csv").string(), 0, 0.0};
    c.out = (dir / "out").string();
    const auto results = cmd_sweep(c);
    ASSERT_EQ(results.size(), 2u);
    for (const auto& r : results)
        EXPECT_EQ(r.report.consensus, 3) << r.combination.label();
    EXPECT_TRUE(fs::exists(dir / "out" / "validity_GK_s1_dim.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "optima_FCM_s1_dim.csv"));
    const std::string summary = read_file(dir / "out" / "sweep_summary.csv");
    EXPECT_NE(summary.find("GK_s1_dim,3"), std::string::npos) << summary;

    const std::string first = read_file(dir / "out" / "validity_GK_s1_dim.csv");
    cmd_sweep(c);
    EXPECT_EQ(read_file(dir / "out" / "validity_GK_s1_dim.csv"), first);
}

TEST(Commands, SweepRefusesTooManyClusters)
{
    ExperimentConfig c = config_from("train = synth:1:300\nalgorithms = GK\nclusters = sweep\nc_max = 9\nlag = 0\n");
    c.out = scratch("sweep_small").string();
    try {
        cmd_sweep(c);
        FAIL() << "expected refusal";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("C_max 9 must be below the sample count 9"), std::string::npos)
            << e.what();
        EXPECT_NE(std::string(e.what()).find("[GK_s1_dim]"), std::string::npos) << e.what();
    }
}

TEST(Commands, MissingSourceIsAConfigError)
{
    ExperimentConfig c;
    c.out = scratch("missing").string();
    EXPECT_THROW(cmd_train(c), ConfigError);
    c.train = EventSource{"/nonexistent/event.csv", 0, 0.0};
    EXPECT_THROW(cmd_train(c), DataError);
}

TEST(Commands, TrainOneModelPerCombination)
{
    const fs::path dir = scratch("train_one");
    ExperimentConfig c = config_from("train = synth:1\nalgorithms = GK\nstrides = 2\nlag = 6\n");
    c.out = dir.string();
    const auto results = cmd_train(c);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_EQ(count_files(dir, "model_"), 1u);
    const LoadedModel lm = model_from_string(read_file(dir / "model_GK_s2_dim.tsm"));
    EXPECT_EQ(lm.model.rule_count(), 3u);
    EXPECT_EQ(lm.meta.at("stride"), "2");
    EXPECT_EQ(lm.meta.at("lags"), "6 6 6");
    EXPECT_EQ(lm.meta.at("config_hash"), config_hash(c));
    EXPECT_TRUE(fs::exists(dir / "fit_GK_s2_dim.csv"));
    EXPECT_TRUE(fs::exists(dir / "trace_GK_s2_dim.csv"));
    EXPECT_TRUE(fs::exists(dir / "manifest_train.json"));
}

TEST(Commands, TrainFullGridIsDeterministic)
{
    const fs::path dir = scratch("train_grid");
    ExperimentConfig c = config_from("train = synth:1\nalgorithms = GK, FCM, SC\nstrides = 1, 2, 5, 10\n"
                                     "normalization = both\nlag = 6\n");
    c.out = dir.string();
    cmd_train(c);
    EXPECT_EQ(count_files(dir, "model_"), 24u);
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(dir))
        first[e.path().filename().string()] = read_file(e.path());
    cmd_train(c);
    for (const auto& [name, content] : first)
        EXPECT_EQ(read_file(dir / name), content) << name;
}

TEST(Commands, EvaluatePerfectFitAndSeparateNormalizedRows)
{
    const fs::path dir = scratch("evaluate");
    // exponent 1 makes the reservoir linear, so the M4 structure is exact
    ExperimentConfig c = config_from("train = synth:1\nvalidation = synth:2\nalgorithms = GK\nnormalization = both\n"
                                     "lag = 6\nsynth.exponent = 1\n");
    c.out = (dir / "models").string();
    cmd_train(c);
    c.out = (dir / "eval").string();
    const auto rows = cmd_evaluate(c, dir / "models");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].algorithm, "GK");
    EXPECT_EQ(rows[1].algorithm, "GK (N)");
    for (const auto& r : rows) {
        EXPECT_LT(r.metrics.rmse, 1e-6) << r.algorithm;
        EXPECT_NEAR(r.metrics.ce, 1.0, 1e-9) << r.algorithm;
        EXPECT_EQ(r.horizon, 30.0);
    }
    const std::string report = read_file(dir / "eval" / "forecast_report.csv");
    EXPECT_EQ(report.substr(0, report.find('\n')), forecast_header);
    EXPECT_NE(report.find("\nGK (N),1,30,validation,"), std::string::npos) << report;
    EXPECT_TRUE(fs::exists(dir / "eval" / "pred_GK_s1_norm.csv"));
}

TEST(Commands, EvaluateRowCountMatchesModels)
{
    const fs::path dir = scratch("evaluate_count");
    ExperimentConfig c = config_from("train = synth:1\nvalidation = synth:2\nalgorithms = GK, SC\nstrides = 1, 5\n"
                                     "lag = 6\n");
    c.out = (dir / "models").string();
    cmd_train(c);
    c.out = (dir / "eval").string();
    const auto rows = cmd_evaluate(c, dir / "models");
    EXPECT_EQ(rows.size(), count_files(dir / "models", "model_"));
    EXPECT_EQ(rows[0].algorithm, "GK");
    EXPECT_EQ(rows[1].scheme, 5);
    EXPECT_EQ(rows[1].horizon, 150.0);
    EXPECT_EQ(rows[2].algorithm, "SC");
}

TEST(Commands, EvaluateSchemeMismatch)
{
    const fs::path dir = scratch("evaluate_mismatch");
    ExperimentConfig c = config_from("train = synth:1\nvalidation = synth:2\nalgorithms = FCM\nstrides = 1, 2\nlag = 6\n");
    c.out = (dir / "models").string();
    cmd_train(c);
    c.strides = {1};
    c.out = (dir / "eval").string();
    try {
        cmd_evaluate(c, dir / "models");
        FAIL() << "expected a scheme mismatch";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("stride 2"), std::string::npos) << e.what();
    }
    c.strides = {1, 2};
    c.normalization = NormalizationMode::on;
    EXPECT_THROW(cmd_evaluate(c, dir / "models"), ConfigError);
    EXPECT_THROW(cmd_evaluate(c, dir / "absent"), DataError);
}

TEST(Commands, CompareRanksPerScheme)
{
    const fs::path dir = scratch("compare");
    write_report(dir / "a.csv", "SC,1,30,validation,2.0,1,0.8,0.9\n"
                                "GK,1,30,validation,1.0,1,0.9,0.95\n"
                                "FCM,1,30,validation,1.5,1,0.85,0.92\n"
                                "GK,10,300,validation,3.0,1,0.5,0.7\n"
                                "FCM,10,300,validation,4.0,1,0.4,0.6\n"
                                "GK (N),1,30,validation,0.01,1,0.9,0.95\n"
                                "SC,1,30,training,0.1,1,0.99,0.99\n");
    ExperimentConfig c;
    c.out = (dir / "out").string();
    const std::string md = cmd_compare(c, {(dir / "a.csv").string()});
    const auto ranked = rank_by_scheme([&] {
        std::ifstream is(dir / "a.csv");
        return read_forecast_report(is, "a.csv");
    }());
    ASSERT_EQ(ranked.size(), 3u);
    const auto& s1 = ranked.at({1, false});
    ASSERT_EQ(s1.size(), 3u);
    EXPECT_EQ(s1[0].algorithm, "GK");
    EXPECT_EQ(s1[1].algorithm, "FCM");
    EXPECT_EQ(s1[2].algorithm, "SC");
    EXPECT_EQ(ranked.at({10, false})[0].algorithm, "GK");
    EXPECT_EQ(ranked.at({1, true}).size(), 1u);
    EXPECT_NE(md.find("## Scheme s=1 (30 s ahead), original units"), std::string::npos) << md;
    EXPECT_NE(md.find("| 2 | FCM | 1.5 | +0.5 | +50.00 |"), std::string::npos) << md;
    EXPECT_NE(md.find("## Scheme s=1 (30 s ahead), normalized data"), std::string::npos);
    EXPECT_EQ(read_file(dir / "out" / "comparison.md"), md);
    EXPECT_TRUE(fs::exists(dir / "out" / "manifest_compare.json"));
}

TEST(Commands, CompareTiesKeepNameOrder)
{
    std::vector<ForecastRow> rows(3);
    rows[0].algorithm = "SC";
    rows[1].algorithm = "FCM";
    rows[2].algorithm = "GK";
    for (auto& r : rows) {
        r.scheme = 2;
        r.metrics.rmse = 0.5;
    }
    const auto ranked = rank_by_scheme(rows);
    const auto& list = ranked.at({2, false});
    EXPECT_EQ(list[0].algorithm, "FCM");
    EXPECT_EQ(list[1].algorithm, "GK");
    EXPECT_EQ(list[2].algorithm, "SC");

    const auto single = rank_by_scheme({rows[2]});
    EXPECT_EQ(single.at({2, false}).size(), 1u);
    EXPECT_NE(ranking_markdown(single).find("| 1 | GK | 0.5 | +0 | +0.00 |"), std::string::npos);
}

TEST(Commands, CompareInputErrors)
{
    const fs::path dir = scratch("compare_errors");
    ExperimentConfig c;
    c.out = (dir / "out").string();
    EXPECT_THROW(cmd_compare(c, {}), ConfigError);
    write_report(dir / "train_only.csv", "GK,1,30,training,1,1,1,1\n");
    EXPECT_THROW(cmd_compare(c, {(dir / "train_only.csv").string()}), DataError);
    write_report(dir / "short.csv", "GK,1,30\n");
    EXPECT_THROW(cmd_compare(c, {(dir / "short.csv").string()}), DataError);
    EXPECT_THROW(cmd_compare(c, {(dir / "absent.csv").string()}), DataError);
}

TEST(Output, AtomicWriteReplacesContent)
{
    const fs::path dir = scratch("atomic");
    write_file_atomic(dir / "sub" / "x.txt", "one");
    write_file_atomic(dir / "sub" / "x.txt", "two");
    EXPECT_EQ(read_file(dir / "sub" / "x.txt"), "two");
    EXPECT_FALSE(fs::exists(dir / "sub" / "x.txt.tmp"));
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}
