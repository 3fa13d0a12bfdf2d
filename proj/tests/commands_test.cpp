// Copyright 2026 The WMPA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wmpa/commands.hpp"

#include <filesystem>
#include <string>

#include "gtest/gtest.h"
#include "wmpa/run_config.hpp"

using namespace wmpa;

namespace {

std::string config_error(const std::string &text) {
    try {
        parse_run_config(text);
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::config) << e.what();
        return e.what();
    }
    ADD_FAILURE() << "accepted: " << text;
    return "";
}

bool contains(const std::string &haystack, const std::string &needle) {
    return haystack.find(needle) != std::string::npos;
}

RunConfig small_config() {
    RunConfig c = parse_run_config(R"(
protocol:
  delta_deg: 2.0
signal:
  thetas: [0.03, 0.1]
source: {rate: 8.0e5, duration: 1}
seeds: {first: 5, count: 6}
)");
    c.jobs = 3;
    return c;
}

}  // namespace

TEST(RunConfig, Defaults) {
    const RunConfig c = parse_run_config("");
    EXPECT_FALSE(c.protocol.given());
    EXPECT_EQ(c.rate, 8e5);
    EXPECT_EQ(c.duration, 10.0);
    EXPECT_EQ(c.seeds.size(), 1u);
    EXPECT_EQ(c.thetas.size(), 4u);
    EXPECT_EQ(c.fig2_magnifications, (std::vector<double>{3, 5, 10}));
}

TEST(RunConfig, FullDocument) {
    const RunConfig c = parse_run_config(R"(
protocol:
  coefficients: {alpha: 0.6, beta: 0.8, gamma: 0.8, eta: -0.6}
signal: {thetas: [0.01]}
noise: {visibility: 0.99, lcvr_jitter_std: 0.001, dark_rate: 3}
seeds: [4, 8, 15]
estimation: {calibration: ideal}
compare: {mode: equal-input, theta: 0.07}
train_check: {delta_points: 3, theta_points: 2}
output: {prefix: out/x}
jobs: 2
)");
    EXPECT_EQ(c.protocol.kind, ProtocolSpec::Kind::coefficients);
    EXPECT_EQ(c.protocol.make(0.2).alpha, 0.6);
    EXPECT_EQ(c.protocol.make(0.2).theta, 0.2);
    EXPECT_EQ(c.noise.dark_rate, 3.0);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 8, 15}));
    EXPECT_FALSE(c.simulated_calibration);
    EXPECT_EQ(c.compare_mode, CompareMode::equal_input);
    EXPECT_EQ(c.output_prefix, "out/x");
    EXPECT_EQ(c.jobs, 2);
}

TEST(RunConfig, ProtocolForms) {
    EXPECT_NEAR(amplification_params(parse_run_config("protocol: {ratio: -0.9}").protocol.make(0)).r, -0.9, 1e-15);
    EXPECT_NEAR(amplification_params(parse_run_config("protocol: {magnification: 10}").protocol.make(0)).h, 10.0, 1e-12);
    EXPECT_NEAR(amplification_params(parse_run_config("protocol: {delta_deg: 2}").protocol.make(0)).r,
                -std::tan(deg_to_rad(41.0)), 1e-12);
}

TEST(RunConfig, Diagnostics) {
    std::string msg = config_error("protocol:\n  delta_deg: 2\nnoise:\n  visibilty: 0.9\n");
    EXPECT_TRUE(contains(msg, "line 4")) << msg;
    EXPECT_TRUE(contains(msg, "noise.visibilty")) << msg;
    EXPECT_TRUE(contains(msg, "unknown key")) << msg;

    msg = config_error("source:\n  rate: fast\n");
    EXPECT_TRUE(contains(msg, "line 2")) << msg;
    EXPECT_TRUE(contains(msg, "source.rate")) << msg;

    msg = config_error("noise:\n  visibility: 1.5\n");
    EXPECT_TRUE(contains(msg, "noise")) << msg;
    EXPECT_TRUE(contains(msg, "visibility")) << msg;

    msg = config_error("compare:\n  mode: equal-photons\n");
    EXPECT_TRUE(contains(msg, "line 2")) << msg;
    EXPECT_TRUE(contains(msg, "compare.mode")) << msg;

    msg = config_error("seeds: []\n");
    EXPECT_TRUE(contains(msg, "seed")) << msg;

    msg = config_error("protocol: {delta_deg: 2, ratio: -0.9}\n");
    EXPECT_TRUE(contains(msg, "only one")) << msg;

    msg = config_error("protocol: {coefficients: {alpha: 0.5}}\n");
    EXPECT_TRUE(contains(msg, "normalized")) << msg;

    msg = config_error("signal:\n  thetas: [0.1, .nan]\n");
    EXPECT_TRUE(contains(msg, "signal.thetas")) << msg;

    msg = config_error("protocol: [1, 2\n");
    EXPECT_TRUE(contains(msg, "YAML")) << msg;

    msg = config_error("protocol: {ratio: -1}\n");
    EXPECT_TRUE(contains(msg, "protocol.ratio")) << msg;
}

TEST(RunConfig, SeedOverride) {
    RunConfig c = small_config();
    c.set_seed_base(100);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{100, 101, 102, 103, 104, 105}));
}

TEST(Commands, MissingProtocolIsUsageError) {
    const RunConfig c = parse_run_config("");
    for (auto fn : {cmd_calibrate, cmd_run, cmd_compare}) {
        try {
            fn(c);
            FAIL();
        } catch (const Error &e) {
            EXPECT_EQ(e.code(), ErrorCode::config);
            EXPECT_EQ(exit_code_for(e.code()), 2);
        }
    }
}

TEST(Commands, CalibrateRecoversTableRatio) {
    RunConfig c = small_config();
    c.duration = 10.0;
    const auto out = cmd_calibrate(c);
    EXPECT_EQ(out.table.size(), 6u);
    const auto &pooled = out.summary["results"]["pooled"];
    const double p = pooled["p_hat"].get<double>();
    const double se = std::sqrt(0.0048659656292148425 * (1 - 0.0048659656292148425) / (6 * 8e6));
    EXPECT_NEAR(p, 0.0048659656292148425, 5 * se);
    EXPECT_NEAR(pooled["r_hat"].get<double>(), -std::tan(deg_to_rad(41.0)), 2e-3);
    EXPECT_TRUE(out.warnings.empty());
}

TEST(Commands, CalibrateWarnsWithoutWeakSelection) {
    RunConfig c = small_config();
    c.protocol.value = 22.5;
    const auto out = cmd_calibrate(c);
    ASSERT_EQ(out.warnings.size(), 1u);
    EXPECT_NEAR(out.summary["results"]["pooled"]["p_hat"].get<double>(), 0.5, 1e-3);
}

TEST(Commands, RunRowsAndThreadIndependence) {
    RunConfig c = small_config();
    const auto a = cmd_run(c);
    EXPECT_EQ(a.table.size(), 12u);
    c.jobs = 1;
    const auto b = cmd_run(c);
    EXPECT_EQ(a.table.str(), b.table.str());
    EXPECT_EQ(a.summary.dump(), b.summary.dump());
    const auto pts = a.summary["results"]["points"];
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_NEAR(pts[1]["mean_theta_hat"].get<double>(), 0.1, 5e-3);
}

TEST(Commands, CsvEmbedsConfigAndUnits) {
    const auto out = cmd_run(small_config());
    const ParsedCsv p = parse_csv(out.table.str());
    bool units = false, config = false;
    for (const auto &[k, v] : p.meta) {
        units = units || k == "units";
        if (k == "config") {
            config = true;
            EXPECT_EQ(parse_json(v, "config")["protocol"]["delta_deg"].get<double>(), 2.0);
        }
    }
    EXPECT_TRUE(units);
    EXPECT_TRUE(config);
    EXPECT_EQ(p.columns.front(), "theta_true");
    EXPECT_TRUE(out.summary.contains("config"));
}

TEST(Commands, ReplayIsByteIdentical) {
    const auto dir = std::filesystem::temp_directory_path() / "wmpa_commands_test";
    std::filesystem::remove_all(dir);
    RunConfig c = small_config();
    const auto [csv1, sum1] = write_output(cmd_run(c), (dir / "a").string());
    c.jobs = 2;
    const auto [csv2, sum2] = write_output(cmd_run(c), (dir / "b").string());
    EXPECT_EQ(read_file(csv1), read_file(csv2));
    EXPECT_EQ(read_file(sum1), read_file(sum2));
    std::filesystem::remove_all(dir);
}

TEST(Commands, SweepCoversEveryDelta) {
    RunConfig c = small_config();
    c.sweep_deltas_deg = {2.0, 8.0};
    c.seeds = {1, 2};
    const auto out = cmd_sweep(c);
    EXPECT_EQ(out.table.size(), 2u * 2u * 2u);
    EXPECT_EQ(out.summary["results"]["settings"].size(), 2u);
}

TEST(Commands, CompareRatioAtHTen) {
    RunConfig c = parse_run_config(R"(
protocol: {magnification: 10}
compare: {theta: 0.05}
source: {rate: 1.0e4, duration: 1}
seeds: {first: 1, count: 60}
estimation: {calibration: ideal}
)");
    const auto out = cmd_compare(c);
    EXPECT_EQ(out.table.size(), 120u);
    const double ratio = out.summary["results"]["std_ratio"].get<double>();
    EXPECT_GT(ratio, 5.0);
    EXPECT_LT(ratio, 15.0);
    // V = 1: both visibility floors are zero and their ratio is undefined.
    EXPECT_TRUE(out.summary["results"]["floor_ratio"].is_null());
}

TEST(Commands, CompareWithoutAmplification) {
    RunConfig c = parse_run_config(R"(
protocol: {magnification: 1}
compare: {theta: 0.3}
source: {rate: 1.0e4, duration: 1}
seeds: {first: 1, count: 100}
estimation: {calibration: ideal}
)");
    const double ratio = cmd_compare(c).summary["results"]["std_ratio"].get<double>();
    EXPECT_NEAR(ratio, 1.0, 0.25);
}

TEST(Commands, ReproduceFigTwoShape) {
    RunConfig c = parse_run_config("seeds: {first: 1, count: 3}\nestimation: {calibration: ideal}\n");
    c.jobs = 4;
    const auto out = cmd_reproduce_fig2(c);
    EXPECT_EQ(out.table.size(), 3u * 4u * 3u);
    const auto p = parse_csv(out.table.str());
    EXPECT_EQ(p.columns, (std::vector<std::string>{"h", "r", "theta_true", "kappa_theory", "kappa_hat", "kappa_err",
                                                    "theta_hat", "theta_err", "seed"}));
    // h = 10, theta = 0.05 rows carry kappa_theory = 0.46852909...
    bool found = false;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto row = p.row_map(i);
        if (row.at("h") == "10" && row.at("theta_true") == "0.050000000000000003") {
            EXPECT_NEAR(parse_double(row.at("kappa_theory"), "k"), 0.46852909463041097, 1e-12);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Commands, TrainCheckGridPasses) {
    RunConfig c = parse_run_config("train_check: {delta_points: 4, theta_points: 5}\n");
    const auto out = cmd_train_check(c);
    EXPECT_EQ(out.table.size(), 20u);
    EXPECT_FALSE(out.check_failed);
    EXPECT_TRUE(out.summary["results"]["all_pass"].get<bool>());
}

TEST(Commands, TrainCheckCustomTrain) {
    RunConfig c = parse_run_config("protocol: {delta_deg: 3}\nsignal: {thetas: [0.2]}\n");
    const auto good = cmd_train_check(c, optics::build_figure1_train(3.0, 0.2));
    EXPECT_FALSE(good.check_failed);
    const auto bad = cmd_train_check(c, optics::build_figure1_train(4.0, 0.2));
    EXPECT_TRUE(bad.check_failed);
}

TEST(Commands, ShippedConfigsParse) {
    for (const char *name : {"calibrate", "run", "sweep", "fig2", "compare", "train_check"}) {
        EXPECT_NO_THROW(load_run_config(std::string(WMPA_SOURCE_DIR) + "/configs/" + name + ".yaml")) << name;
    }
}

TEST(ParallelMap, OrderAndErrors) {
    const auto v = parallel_map<int>(100, 8, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_map<int>(10, 4,
                                   [](std::size_t i) -> int {
                                       if (i == 7) throw Error(ErrorCode::io, "x");
                                       return 0;
                                   }),
                 Error);
}
