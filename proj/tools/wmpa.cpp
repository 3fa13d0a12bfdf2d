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

// wmpa: command-line driver for the amplified-phase simulator.
//
// Exit status: 0 success, 1 train-check out of tolerance, 2 usage/config,
// 3 numerical domain, 4 insufficient data, 5 I/O.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wmpa/commands.hpp"

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<double> delta;
    std::vector<double> thetas;
    std::string train_path;
    std::string dump_train_path;
};

wmpa::RunConfig resolve(const Options &o) {
    wmpa::RunConfig cfg = o.config_path.empty() ? wmpa::RunConfig{} : wmpa::load_run_config(o.config_path);
    if (o.seed) cfg.set_seed_base(*o.seed);
    if (o.out) cfg.output_prefix = *o.out;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.delta) {
        cfg.protocol.kind = wmpa::ProtocolSpec::Kind::delta;
        cfg.protocol.value = *o.delta;
    }
    if (!o.thetas.empty()) cfg.thetas = o.thetas;
    return cfg;
}

int finish(const wmpa::CommandOutput &out, const wmpa::RunConfig &cfg) {
    for (const auto &w : out.warnings) std::cerr << "warning: " << w << "\n";
    const auto [csv, summary] = wmpa::write_output(out, cfg.output_prefix);
    std::cout << out.summary["results"].dump(2) << "\n";
    std::cout << "wrote " << csv << "\n" << "wrote " << summary << "\n";
    return out.check_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Weak-measurement phase amplification simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", wmpa::kVersion);

    Options o;
    app.add_option("--config,-c", o.config_path, "YAML experiment configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "first seed; the configured seed count is kept");
    app.add_option("--out,-o", o.out, "output prefix: writes <prefix>.csv and <prefix>.summary.json");
    app.add_option("--jobs,-j", o.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto *calibrate = app.add_subcommand("calibrate", "zero-signal runs and the inferred ratio r");
    auto *run = app.add_subcommand("run", "calibrate, count and estimate theta");
    auto *sweep = app.add_subcommand("sweep", "run over sweep.deltas_deg");
    auto *compare = app.add_subcommand("compare", "amplified vs conventional interferometer");
    auto *fig2 = app.add_subcommand("reproduce-fig2", "amplified phase against signal phase for h = 3, 5, 10");
    auto *train = app.add_subcommand("train-check", "optical train against the abstract protocol");

    for (auto *sub : {calibrate, run, compare, train}) {
        sub->add_option("--delta", o.delta, "post-selection plate offset [deg]");
    }
    for (auto *sub : {run, sweep, fig2, train}) {
        sub->add_option("--theta", o.thetas, "signal phases [rad]");
    }
    train->add_option("--train", o.train_path, "train document (JSON) to check instead of the built-in table")
        ->check(CLI::ExistingFile);
    train->add_option("--dump-train", o.dump_train_path, "write the built-in table for --delta / --theta and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const wmpa::RunConfig cfg = resolve(o);
        if (*calibrate) return finish(wmpa::cmd_calibrate(cfg), cfg);
        if (*run) return finish(wmpa::cmd_run(cfg), cfg);
        if (*sweep) return finish(wmpa::cmd_sweep(cfg), cfg);
        if (*compare) return finish(wmpa::cmd_compare(cfg), cfg);
        if (*fig2) return finish(wmpa::cmd_reproduce_fig2(cfg), cfg);
        if (!o.dump_train_path.empty()) {
            if (cfg.protocol.kind != wmpa::ProtocolSpec::Kind::delta) {
                throw wmpa::Error(wmpa::ErrorCode::config, "--dump-train needs --delta or protocol.delta_deg");
            }
            const auto t = wmpa::optics::build_figure1_train(cfg.protocol.value, cfg.thetas.front());
            wmpa::write_file(o.dump_train_path, wmpa::optics::train_to_text(t));
            std::cout << "wrote " << o.dump_train_path << "\n";
            return 0;
        }
        std::optional<wmpa::optics::OpticalTrain> custom;
        if (!o.train_path.empty()) custom = wmpa::optics::train_from_text(wmpa::read_file(o.train_path));
        return finish(wmpa::cmd_train_check(cfg, custom), cfg);
    } catch (const wmpa::Error &e) {
        std::cerr << "wmpa: error: " << e.what() << "\n";
        return wmpa::exit_code_for(e.code());
    } catch (const std::exception &e) {
        std::cerr << "wmpa: error: internal: " << e.what() << "\n";
        return 70;
    }
}
