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

/**
 * @file
 * Drivers behind the `wmpa` subcommands. Each returns a CSV table (one row
 * per theta/seed atom) and a JSON summary; write_output() puts them on disk.
 *
 * Seeds run on worker threads; rows are collected by index so the output is
 * identical for any thread count.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wmpa/estimation.hpp"
#include "wmpa/montecarlo.hpp"
#include "wmpa/optics.hpp"
#include "wmpa/optics_io.hpp"
#include "wmpa/protocol.hpp"
#include "wmpa/report_io.hpp"
#include "wmpa/rng.hpp"
#include "wmpa/run_config.hpp"

namespace wmpa {

inline constexpr const char *kVersion = "0.1.0";

struct CommandOutput {
    std::string command;
    CsvTable table{{}};
    Json summary;
    std::vector<std::string> warnings;
    bool check_failed = false;  ///< train-check found a point out of tolerance
};

/// Runs fn(0..n-1) on up to `jobs` threads (0 = hardware concurrency) and
/// returns the results in index order. The first exception by index is rethrown.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)> &fn) {
    std::vector<std::optional<T>> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    const auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto &t : pool) t.join();
    }
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*results[i]));
    }
    return out;
}

namespace detail {

inline CommandOutput start_output(const std::string &command, const RunConfig &cfg,
                                  std::vector<std::string> columns) {
    CommandOutput out;
    out.command = command;
    out.table = CsvTable(std::move(columns));
    out.table.add_meta("wmpa", std::string(kVersion) + " " + command);
    out.table.add_meta("units", "theta kappa phase [rad]; delta angle [deg]; rate [counts/s]; duration [s]");
    out.table.add_meta("config", to_json(cfg).dump());
    out.summary = Json{{"command", command}, {"version", kVersion}, {"config", to_json(cfg)}};
    return out;
}

inline std::string b(bool v) { return v ? "1" : "0"; }
inline std::string d(double v) { return format_double(v); }
inline std::string i(std::int64_t v) { return std::to_string(v); }
inline std::string u(std::uint64_t v) { return std::to_string(v); }

/// Derived seed for the zero-signal calibration run.
inline std::uint64_t calibration_seed(const RunConfig &cfg) { return RngStream(cfg.seeds.front()).split(0xCA1).key(); }

inline CalibrationResult calibrate_protocol(const RunConfig &cfg, const ProtocolConfig &setting,
                                            std::vector<std::string> &warnings) {
    if (!cfg.simulated_calibration) return ideal_calibration(setting);
    ProtocolConfig zero = setting;
    zero.theta = 0.0;
    const CountData c = simulate_counts(zero, cfg.noise, cfg.rate, cfg.duration, calibration_seed(cfg));
    const CalibrationResult cal = calibrate_from_counts(c);
    if (cfg.protocol.kind == ProtocolSpec::Kind::coefficients &&
        (std::abs(setting.alpha - setting.beta) > kTolerance || std::abs(setting.mu - setting.nu) > kTolerance)) {
        warnings.push_back("simulated calibration assumes balanced pre-selection; use estimation.calibration: ideal");
    }
    return cal;
}

inline void warn_on_weak_selection(const CalibrationResult &cal, std::vector<std::string> &warnings) {
    if (cal.p_hat > 0.4) {
        warnings.push_back("post-selection probability " + format_double(cal.p_hat) +
                           " is not small: the setting gives little or no amplification (h = " +
                           format_double(cal.h_hat) + ")");
    }
}

struct RunRow {
    CountData counts;
    PhaseEstimate estimate;
};

inline std::vector<std::string> run_columns() {
    return {"theta_true", "seed",      "n_input",  "n_survivors",     "n_plus",      "n_minus",
            "sigma_x_hat", "sigma_x_err", "kappa_theory", "kappa_hat", "kappa_err", "theta_hat",
            "theta_err",  "analytic_sensitivity", "clamped"};
}

inline std::vector<std::string> run_cells(double theta, double kappa_theory, const RunRow &r) {
    const auto &e = r.estimate;
    return {d(theta),         u(r.counts.seed),  i(r.counts.n_input),   i(r.counts.n_survivors), i(r.counts.n_plus),
            i(r.counts.n_minus), d(e.sigma_x_hat), d(e.std_error_sigma_x), d(kappa_theory),          d(e.kappa_hat),
            d(e.std_error_kappa), d(e.theta_hat),  d(e.std_error_theta),  d(e.analytic_sensitivity), b(e.clamped)};
}

/// Aggregate over the seeds of one (setting, theta) point.
inline Json point_summary(double theta, double kappa_theory, const std::vector<RunRow> &rows) {
    RunningStats th, kap, err;
    std::int64_t within = 0, clamped = 0;
    for (const auto &r : rows) {
        th.add(r.estimate.theta_hat);
        kap.add(r.estimate.kappa_hat);
        err.add(r.estimate.std_error_theta);
        if (std::abs(r.estimate.kappa_hat - kappa_theory) <= 3.0 * r.estimate.std_error_kappa) ++within;
        if (r.estimate.clamped) ++clamped;
    }
    return Json{{"theta_true", theta},
                {"kappa_theory", kappa_theory},
                {"n_runs", th.count()},
                {"mean_kappa_hat", kap.mean()},
                {"mean_theta_hat", th.mean()},
                {"empirical_std_theta", number_or_null(th.stddev())},
                {"mean_theta_err", err.mean()},
                {"kappa_within_3_sigma", static_cast<double>(within) / static_cast<double>(rows.size())},
                {"n_clamped", clamped}};
}

/// Simulates every (theta, seed) atom of one setting.
inline std::vector<std::vector<RunRow>> run_grid(const RunConfig &cfg, const std::function<ProtocolConfig(double)> &make,
                                                 const CalibrationResult &cal) {
    const std::size_t n_seeds = cfg.seeds.size();
    const auto flat = parallel_map<RunRow>(cfg.thetas.size() * n_seeds, cfg.jobs, [&](std::size_t k) {
        const double theta = cfg.thetas[k / n_seeds];
        const std::uint64_t seed = cfg.seeds[k % n_seeds];
        RunRow row;
        row.counts = simulate_counts(make(theta), cfg.noise, cfg.rate, cfg.duration, seed);
        row.estimate = estimate_phase(row.counts, cal, cfg.noise);
        return row;
    });
    std::vector<std::vector<RunRow>> grid(cfg.thetas.size());
    for (std::size_t k = 0; k < flat.size(); ++k) grid[k / n_seeds].push_back(flat[k]);
    return grid;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
    return v;
}

}  // namespace detail

/// Zero-signal counting runs (one per seed) and the ratio r inferred from them.
inline CommandOutput cmd_calibrate(const RunConfig &cfg) {
    const ProtocolConfig setting = cfg.protocol.make(0.0);
    auto out = detail::start_output("calibrate", cfg,
                                    {"seed", "n_input", "n_survivors", "p_hat", "std_error_p", "r_hat",
                                     "delta_hat_deg", "h_hat"});
    const auto runs = parallel_map<CountData>(cfg.seeds.size(), cfg.jobs, [&](std::size_t k) {
        return simulate_counts(setting, cfg.noise, cfg.rate, cfg.duration, cfg.seeds[k]);
    });
    std::int64_t total_in = 0, total_surv = 0;
    for (const auto &c : runs) {
        const auto cal = calibrate_from_counts(c);
        out.table.add_row({detail::u(c.seed), detail::i(c.n_input), detail::i(c.n_survivors), detail::d(cal.p_hat),
                           detail::d(cal.std_error_p), detail::d(cal.r_hat), detail::d(cal.delta_hat_deg),
                           detail::d(cal.h_hat)});
        total_in += c.n_input;
        total_surv += c.n_survivors;
    }
    CountData pooled;
    pooled.n_input = total_in;
    pooled.n_survivors = total_surv;
    const CalibrationResult cal = calibrate_from_counts(pooled);
    detail::warn_on_weak_selection(cal, out.warnings);
    const CalibrationResult truth = ideal_calibration(setting);
    out.summary["results"] = Json{{"pooled", to_json(cal)}, {"ideal", to_json(truth)}, {"n_runs", runs.size()}};
    out.summary["warnings"] = out.warnings;
    return out;
}

/// Calibrate, then count and estimate at every signal phase.
inline CommandOutput cmd_run(const RunConfig &cfg) {
    const ProtocolConfig setting = cfg.protocol.make(0.0);
    auto out = detail::start_output("run", cfg, detail::run_columns());
    const CalibrationResult cal = detail::calibrate_protocol(cfg, setting, out.warnings);
    detail::warn_on_weak_selection(cal, out.warnings);
    const double r_true = amplification_params(setting).r;
    const auto grid = detail::run_grid(cfg, [&](double th) { return cfg.protocol.make(th); }, cal);
    Json points = Json::array();
    for (std::size_t t = 0; t < cfg.thetas.size(); ++t) {
        const double theta = cfg.thetas[t];
        const double kappa = amplified_phase_exact(theta, r_true);
        for (const auto &row : grid[t]) out.table.add_row(detail::run_cells(theta, kappa, row));
        points.push_back(detail::point_summary(theta, kappa, grid[t]));
    }
    out.summary["results"] = Json{{"calibration", to_json(cal)},
                                  {"r_true", r_true},
                                  {"h_true", magnification(r_true)},
                                  {"points", points}};
    out.summary["warnings"] = out.warnings;
    return out;
}

/// run over a list of post-selection offsets delta.
inline CommandOutput cmd_sweep(const RunConfig &cfg) {
    std::vector<std::string> cols{"delta_deg", "r", "h"};
    for (auto &c : detail::run_columns()) cols.push_back(c);
    auto out = detail::start_output("sweep", cfg, cols);
    Json settings = Json::array();
    for (double delta : cfg.sweep_deltas_deg) {
        const ProtocolConfig setting = ProtocolConfig::from_selection_angle(delta, 0.0);
        RunConfig local = cfg;
        local.protocol.kind = ProtocolSpec::Kind::delta;
        local.protocol.value = delta;
        const CalibrationResult cal = detail::calibrate_protocol(local, setting, out.warnings);
        const auto amp = amplification_params(setting);
        const auto grid = detail::run_grid(local, [&](double th) { return ProtocolConfig::from_selection_angle(delta, th); },
                                           cal);
        Json points = Json::array();
        for (std::size_t t = 0; t < cfg.thetas.size(); ++t) {
            const double theta = cfg.thetas[t];
            const double kappa = amplified_phase_exact(theta, amp.r);
            for (const auto &row : grid[t]) {
                std::vector<std::string> cells{detail::d(delta), detail::d(amp.r), detail::d(amp.h)};
                for (auto &c : detail::run_cells(theta, kappa, row)) cells.push_back(std::move(c));
                out.table.add_row(std::move(cells));
            }
            points.push_back(detail::point_summary(theta, kappa, grid[t]));
        }
        settings.push_back(Json{{"delta_deg", delta},
                                {"r_true", amp.r},
                                {"h_true", amp.h},
                                {"calibration", to_json(cal)},
                                {"points", points}});
    }
    out.summary["results"] = Json{{"settings", settings}};
    out.summary["warnings"] = out.warnings;
    return out;
}

/// Amplified vs conventional interferometer at the same photon budget.
inline CommandOutput cmd_compare(const RunConfig &cfg) {
    const ProtocolConfig setting = cfg.protocol.make(0.0);
    auto out = detail::start_output("compare", cfg,
                                    {"seed", "arm", "theta_hat", "theta_err", "kappa_hat", "sigma_x_hat",
                                     "n_detected", "clamped"});
    const CalibrationResult cal = detail::calibrate_protocol(cfg, setting, out.warnings);
    const auto per_seed = parallel_map<ComparisonReport>(cfg.seeds.size(), cfg.jobs, [&](std::size_t k) {
        return compare_protocols(cfg.compare_theta, cal, cfg.budget(), cfg.noise, {cfg.seeds[k]}, cfg.compare_mode);
    });
    ComparisonReport rep = per_seed.front();
    rep.rows.clear();
    for (const auto &r : per_seed) rep.rows.insert(rep.rows.end(), r.rows.begin(), r.rows.end());
    rep.amplified = detail::summarize_arm("amplified", rep.rows, rep.theta, cal.h_hat, cfg.noise.visibility);
    rep.conventional = detail::summarize_arm("conventional", rep.rows, rep.theta, 1.0, cfg.noise.visibility);
    for (const auto &row : rep.rows) {
        const auto &e = row.estimate;
        out.table.add_row({detail::u(row.seed), row.arm, detail::d(e.theta_hat), detail::d(e.std_error_theta),
                           detail::d(e.kappa_hat), detail::d(e.sigma_x_hat), detail::i(e.n_detected),
                           detail::b(e.clamped)});
    }
    if (rep.amplified.n_runs < 2) out.warnings.push_back("one seed: empirical spread is undefined");
    out.summary["results"] = to_json(rep);
    out.summary["warnings"] = out.warnings;
    return out;
}

/// Amplified phase against signal phase for each magnification.
inline CommandOutput cmd_reproduce_fig2(const RunConfig &cfg) {
    auto out = detail::start_output("reproduce-fig2", cfg,
                                    {"h", "r", "theta_true", "kappa_theory", "kappa_hat", "kappa_err", "theta_hat",
                                     "theta_err", "seed"});
    Json curves = Json::array();
    for (double h : cfg.fig2_magnifications) {
        const double r = 1.0 / h - 1.0;
        const auto make = [r](double th) { return ProtocolConfig::from_ratio(r, th); };
        const CalibrationResult cal = detail::calibrate_protocol(cfg, make(0.0), out.warnings);
        const auto grid = detail::run_grid(cfg, make, cal);
        Json points = Json::array();
        for (std::size_t t = 0; t < cfg.thetas.size(); ++t) {
            const double theta = cfg.thetas[t];
            const double kappa = amplified_phase_exact(theta, r);
            for (const auto &row : grid[t]) {
                const auto &e = row.estimate;
                out.table.add_row({detail::d(h), detail::d(r), detail::d(theta), detail::d(kappa),
                                   detail::d(e.kappa_hat), detail::d(e.std_error_kappa), detail::d(e.theta_hat),
                                   detail::d(e.std_error_theta), detail::u(row.counts.seed)});
            }
            points.push_back(detail::point_summary(theta, kappa, grid[t]));
        }
        curves.push_back(Json{{"h", h}, {"r", r}, {"calibration", to_json(cal)}, {"points", points}});
    }
    out.summary["results"] = Json{{"curves", curves}};
    out.summary["warnings"] = out.warnings;
    return out;
}

/// Optical-train audit: the figure-1 table against the abstract protocol on a
/// (delta, theta) grid, or a user-supplied train against the configured protocol.
/// A user train is read on the middle rail right after the element labelled
/// "BD2" when there is one (the analyser optics follow it), else at its end.
inline CommandOutput cmd_train_check(const RunConfig &cfg, const std::optional<optics::OpticalTrain> &custom = {}) {
    auto out = detail::start_output("train-check", cfg,
                                    {"delta_deg", "theta", "fidelity", "prob_train", "prob_protocol", "prob_diff",
                                     "sigma_x_train", "sigma_x_protocol", "pass"});
    constexpr double kFidelityTol = 1e-12;
    constexpr double kProbTol = 1e-12;
    std::vector<optics::EquivalenceCheck> checks;
    if (custom) {
        const double theta = cfg.thetas.front();
        const ProtocolConfig setting = cfg.protocol.make(theta);
        const optics::OpticalTrain &train = *custom;
        const bool has_bd2 = std::any_of(train.elements.begin(), train.elements.end(),
                                         [](const optics::OpticalElement &e) { return e.label == "BD2"; });
        const auto sel = optics::postselect_middle_rail(
            optics::simulate_train(has_bd2 ? train.prefix_through("BD2") : train, optics::figure1_input()));
        const auto outcome = run_protocol(setting);
        optics::EquivalenceCheck c;
        c.delta_deg = cfg.protocol.kind == ProtocolSpec::Kind::delta ? cfg.protocol.value : std::nan("");
        c.theta = theta;
        c.fidelity = fidelity(optics::pointer_from_output(sel.pol_state), outcome.pointer);
        c.prob_train = sel.prob;
        c.prob_protocol = outcome.success_prob;
        c.sigma_x_train = sigma_x_expectation(sel.pol_state);
        c.sigma_x_protocol = sigma_x_expectation(outcome.pointer);
        checks.push_back(c);
    } else {
        const auto deltas = detail::linspace(cfg.train_delta_min_deg, cfg.train_delta_max_deg, cfg.train_delta_points);
        const auto thetas = detail::linspace(0.0, cfg.train_theta_max, cfg.train_theta_points);
        checks = parallel_map<optics::EquivalenceCheck>(deltas.size() * thetas.size(), cfg.jobs, [&](std::size_t k) {
            return optics::check_figure1_equivalence(deltas[k / thetas.size()], thetas[k % thetas.size()]);
        });
    }
    std::int64_t n_pass = 0;
    double min_fid = 1.0, max_diff = 0.0;
    for (const auto &c : checks) {
        const bool pass = c.fidelity >= 1.0 - kFidelityTol && c.prob_diff() <= kProbTol;
        n_pass += pass ? 1 : 0;
        min_fid = std::min(min_fid, c.fidelity);
        max_diff = std::max(max_diff, c.prob_diff());
        out.table.add_row({detail::d(c.delta_deg), detail::d(c.theta), detail::d(c.fidelity), detail::d(c.prob_train),
                           detail::d(c.prob_protocol), detail::d(c.prob_diff()), detail::d(c.sigma_x_train),
                           detail::d(c.sigma_x_protocol), detail::b(pass)});
    }
    out.check_failed = n_pass != static_cast<std::int64_t>(checks.size());
    out.summary["results"] = Json{{"n_points", checks.size()},
                                  {"n_pass", n_pass},
                                  {"min_fidelity", min_fid},
                                  {"max_prob_diff", max_diff},
                                  {"fidelity_tolerance", kFidelityTol},
                                  {"prob_tolerance", kProbTol},
                                  {"custom_train", custom.has_value()},
                                  {"all_pass", !out.check_failed}};
    out.summary["warnings"] = out.warnings;
    return out;
}

/// Writes `<prefix>.csv` and `<prefix>.summary.json`; returns the two paths.
inline std::pair<std::string, std::string> write_output(const CommandOutput &out, const std::string &prefix) {
    const std::filesystem::path base(prefix);
    if (base.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(base.parent_path(), ec);
        if (ec) throw Error(ErrorCode::io, "cannot create directory '" + base.parent_path().string() + "'");
    }
    const std::string csv = prefix + ".csv";
    const std::string summary = prefix + ".summary.json";
    write_file(csv, out.table.str());
    write_file(summary, out.summary.dump(2) + "\n");
    return {csv, summary};
}

}  // namespace wmpa
