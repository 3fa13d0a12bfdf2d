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
 * Calibration of the amplification ratio, phase inference from counts, the
 * shot-noise sensitivity law and the unamplified-interferometer baseline.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "wmpa/error.hpp"
#include "wmpa/montecarlo.hpp"
#include "wmpa/protocol.hpp"
#include "wmpa/rng.hpp"

namespace wmpa {

struct CalibrationResult {
    double p_hat = 0.5;        ///< post-selection probability at zero signal
    double r_hat = 0.0;        ///< alpha gamma / (beta eta)
    double delta_hat_deg = 22.5;
    double h_hat = 1.0;
    double std_error_p = 0.0;  ///< binomial; 0 when the trial count is unknown
};

/// r from the zero-signal success probability p, assuming the balanced
/// table geometry where sin(2 delta) = sqrt(p) and r = -tan(45deg - 2 delta).
inline CalibrationResult calibrate_r(double p_hat, std::int64_t n_trials = 0) {
    if (!std::isfinite(p_hat) || p_hat < 0.0 || p_hat > 1.0) {
        throw Error(ErrorCode::validation, "calibration probability must lie in [0, 1]");
    }
    if (p_hat <= 0.0 || p_hat >= 1.0) {
        throw Error(ErrorCode::boundary,
                    p_hat <= 0.0 ? "p = 0: pre/post selection orthogonal, nothing to calibrate"
                                 : "p = 1: no post-selection, nothing to calibrate");
    }
    const double sp = std::sqrt(p_hat);
    const double sq = std::sqrt(1.0 - p_hat);
    CalibrationResult c;
    c.p_hat = p_hat;
    c.r_hat = (sp - sq) / (sp + sq);
    c.delta_hat_deg = 0.5 * rad_to_deg(std::asin(sp));
    c.h_hat = magnification(c.r_hat);
    if (n_trials > 0) c.std_error_p = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n_trials));
    return c;
}

/// p_hat = survivors / arrivals of a zero-signal run.
inline CalibrationResult calibrate_from_counts(const CountData &c) {
    if (c.n_input <= 0) throw Error(ErrorCode::insufficient_data, "calibration run recorded no photons");
    return calibrate_r(static_cast<double>(c.n_survivors) / static_cast<double>(c.n_input), c.n_input);
}

/// Calibration with the exact p and r of a known configuration.
inline CalibrationResult ideal_calibration(const ProtocolConfig &cfg) {
    cfg.validate();
    const auto amp = amplification_params(cfg);
    CalibrationResult c;
    c.p_hat = cfg.overlap() * cfg.overlap();
    c.r_hat = amp.r;
    c.h_hat = amp.h;
    c.delta_hat_deg = 0.5 * rad_to_deg(std::asin(std::sqrt(std::clamp(c.p_hat, 0.0, 1.0))));
    return c;
}

/// Delta theta = Delta<sigma_x> / (h sin(h theta)) with the binomial
/// Delta<sigma_x> = sqrt((1 - cos^2(h theta)) / N), i.e. 1 / (h sqrt N).
inline double analytic_sensitivity(double theta, double h, std::int64_t n_detected) {
    if (n_detected <= 0) throw Error(ErrorCode::insufficient_data, "sensitivity needs N > 0");
    const double s = std::sin(h * theta);
    if (!std::isfinite(s) || std::abs(s) < kTolerance) {
        throw Error(ErrorCode::undefined_sensitivity, "sin(h theta) = 0: no first-order response");
    }
    const double c = std::cos(h * theta);
    const double d_sigma = std::sqrt(std::max(0.0, 1.0 - c * c) / static_cast<double>(n_detected));
    return d_sigma / (std::abs(h) * std::abs(s));
}

struct PhaseEstimate {
    double kappa_hat = 0.0;
    double theta_hat = 0.0;
    double sigma_x_hat = 0.0;
    double std_error_sigma_x = 0.0;
    double std_error_kappa = 0.0;
    double analytic_sensitivity = 0.0;  ///< at (theta_hat, h_hat, n_detected)
    double std_error_theta = 0.0;
    bool clamped = false;               ///< sigma_x_hat / V fell outside [-1, 1]
    std::int64_t n_detected = 0;
};

/// theta from counts: kappa = arccos(sigma_x / V), theta = inverse of the
/// amplification map. kappa is taken non-negative (only <sigma_x> is measured).
inline PhaseEstimate estimate_phase(const CountData &c, const CalibrationResult &cal, const NoiseModel &noise) {
    if (!(std::abs(cal.r_hat) < 1.0)) {
        throw Error(ErrorCode::validation, "estimation needs |r| < 1");
    }
    if (!(noise.visibility > 0.0)) {
        throw Error(ErrorCode::validation, "visibility 0 carries no phase information");
    }
    const SigmaXEstimate sx = sigma_x_from_counts(c);
    const double v = noise.visibility;
    const double n = static_cast<double>(sx.n);

    PhaseEstimate e;
    e.n_detected = sx.n;
    e.sigma_x_hat = sx.estimate;
    e.std_error_sigma_x = sx.std_error;
    const double ratio = sx.estimate / v;
    e.clamped = ratio > 1.0 || ratio < -1.0;
    e.kappa_hat = std::acos(std::clamp(ratio, -1.0, 1.0));
    e.theta_hat = invert_amplification(e.kappa_hat, cal.r_hat);

    // Delta-method errors. At the fringe extremes both numerator and
    // denominator vanish; use the V = 1 limit sqrt(1 - cos^2)/sin = 1 there.
    const double sin_k = std::sin(e.kappa_hat);
    e.std_error_kappa = sin_k > kTolerance ? sx.std_error / (v * sin_k) : 1.0 / (v * std::sqrt(n));

    const double h = cal.h_hat;
    const double sin_h = std::abs(std::sin(h * e.theta_hat));
    if (sin_h > kTolerance) {
        e.analytic_sensitivity = analytic_sensitivity(e.theta_hat, h, sx.n);
        e.std_error_theta = sx.std_error / (v * std::abs(h) * sin_h);
    } else {
        e.analytic_sensitivity = 1.0 / (std::abs(h) * std::sqrt(n));
        e.std_error_theta = 1.0 / (v * std::abs(h) * std::sqrt(n));
    }
    return e;
}

/// Smallest phase distinguishable from zero when the zero-phase fringe already reads V.
inline double precision_floor(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw Error(ErrorCode::validation, "visibility must lie in [0, 1]");
    }
    return std::acos(visibility);
}

struct BaselineResult {
    PhaseEstimate estimate;
    CountData counts;
    double precision_floor = 0.0;
};

/// Unamplified interferometer: one arm blocked, kappa == theta, no post-selection loss.
inline ProtocolConfig conventional_config(double theta) { return ProtocolConfig::from_ratio(0.0, theta); }

inline BaselineResult conventional_baseline(double theta, std::int64_t n_detected, double visibility,
                                            std::uint64_t seed) {
    NoiseModel noise;
    noise.visibility = visibility;
    noise.validate();
    BaselineResult b;
    b.counts = simulate_detected(conventional_config(theta), noise, n_detected, seed);
    b.estimate = estimate_phase(b.counts, calibrate_r(0.5), noise);
    b.precision_floor = precision_floor(visibility);
    return b;
}

/// Mean and variance with Chan's pairwise merge, so partial aggregates over
/// seed chunks combine in any order.
class RunningStats {
  public:
    void add(double x) {
        RunningStats one;
        one.n_ = 1;
        one.mean_ = x;
        merge(one);
    }

    void merge(const RunningStats &o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(n_ + o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * static_cast<double>(o.n_) / n;
        m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
        n_ += o.n_;
    }

    std::int64_t count() const { return n_; }
    double mean() const { return n_ > 0 ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
    /// Sample (n - 1) variance.
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : std::numeric_limits<double>::quiet_NaN(); }
    double stddev() const { return std::sqrt(variance()); }
    double std_error_of_mean() const { return stddev() / std::sqrt(static_cast<double>(n_)); }

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

enum class CompareMode { equal_detected, equal_input };

inline std::string_view to_string(CompareMode m) {
    return m == CompareMode::equal_detected ? "equal-detected" : "equal-input";
}

inline CompareMode parse_compare_mode(std::string_view s) {
    if (s == "equal-detected") return CompareMode::equal_detected;
    if (s == "equal-input") return CompareMode::equal_input;
    throw Error(ErrorCode::config, "unknown comparison mode '" + std::string(s) +
                                       "' (expected equal-detected or equal-input)");
}

struct PhotonBudget {
    double rate = 8e5;     ///< [counts/s]
    double duration = 10;  ///< [s]

    std::int64_t photons() const { return std::llround(rate * duration); }
};

struct ComparisonRow {
    std::uint64_t seed = 0;
    std::string arm;  ///< "amplified" or "conventional"
    PhaseEstimate estimate;
};

struct ArmSummary {
    std::string arm;
    double h = 1.0;
    double mean_theta_hat = 0.0;
    double bias = 0.0;
    double empirical_std = 0.0;
    double mean_std_error = 0.0;
    double analytic_sensitivity = std::numeric_limits<double>::quiet_NaN();  ///< at true theta, mean N
    double precision_floor = 0.0;
    double mean_n_detected = 0.0;
    std::int64_t n_runs = 0;
    std::int64_t n_clamped = 0;
};

struct ComparisonReport {
    double theta = 0.0;
    CompareMode mode = CompareMode::equal_detected;
    PhotonBudget budget;
    NoiseModel noise;
    CalibrationResult calibration;
    std::vector<ComparisonRow> rows;
    ArmSummary amplified;
    ArmSummary conventional;

    /// conventional std / amplified std.
    double std_ratio() const { return conventional.empirical_std / amplified.empirical_std; }
    /// conventional floor / amplified floor (== h).
    double floor_ratio() const { return conventional.precision_floor / amplified.precision_floor; }
};

namespace detail {

inline ArmSummary summarize_arm(const std::string &arm, const std::vector<ComparisonRow> &rows, double theta,
                                double h, double visibility) {
    RunningStats th, se, nd;
    ArmSummary s;
    s.arm = arm;
    s.h = h;
    for (const auto &row : rows) {
        if (row.arm != arm) continue;
        th.add(row.estimate.theta_hat);
        se.add(row.estimate.std_error_theta);
        nd.add(static_cast<double>(row.estimate.n_detected));
        if (row.estimate.clamped) ++s.n_clamped;
    }
    s.n_runs = th.count();
    s.mean_theta_hat = th.mean();
    s.bias = th.mean() - theta;
    s.empirical_std = th.stddev();
    s.mean_std_error = se.mean();
    s.mean_n_detected = nd.mean();
    const auto n = static_cast<std::int64_t>(std::llround(nd.mean()));
    if (n > 0 && std::abs(std::sin(h * theta)) > kTolerance) {
        s.analytic_sensitivity = analytic_sensitivity(theta, h, n);
    }
    s.precision_floor = precision_floor(visibility) / std::abs(h);
    return s;
}

}  // namespace detail

/// Runs the amplified and the conventional pipelines over `seeds` at the same
/// photon budget. In equal-detected mode both arms analyse budget.photons()
/// photons; in equal-input mode the amplified arm counts for the full
/// duration and pays the post-selection loss.
inline ComparisonReport compare_protocols(double theta, const CalibrationResult &cal, const PhotonBudget &budget,
                                          const NoiseModel &noise, const std::vector<std::uint64_t> &seeds,
                                          CompareMode mode = CompareMode::equal_detected) {
    if (seeds.empty()) throw Error(ErrorCode::validation, "comparison needs at least one seed");
    if (!(budget.rate > 0.0) || !(budget.duration > 0.0)) {
        throw Error(ErrorCode::validation, "photon budget must be positive");
    }
    noise.validate();
    if (mode == CompareMode::equal_detected && noise.dark_rate > 0.0) {
        throw Error(ErrorCode::validation, "equal-detected mode does not model dark counts");
    }

    ComparisonReport rep;
    rep.theta = theta;
    rep.mode = mode;
    rep.budget = budget;
    rep.noise = noise;
    rep.calibration = cal;

    const ProtocolConfig amplified_cfg = ProtocolConfig::from_ratio(cal.r_hat, theta);
    const ProtocolConfig conventional_cfg = conventional_config(theta);
    const CalibrationResult conventional_cal = calibrate_r(0.5);
    NoiseModel conventional_noise = noise;
    conventional_noise.dark_rate = 0.0;

    for (std::uint64_t seed : seeds) {
        const CountData amp = mode == CompareMode::equal_detected
                                  ? simulate_detected(amplified_cfg, noise, budget.photons(), seed)
                                  : simulate_counts(amplified_cfg, noise, budget.rate, budget.duration, seed);
        rep.rows.push_back({seed, "amplified", estimate_phase(amp, cal, noise)});

        const std::uint64_t conventional_seed = RngStream(seed).split(0xC0).key();
        const CountData conv = simulate_detected(conventional_cfg, conventional_noise, budget.photons(), conventional_seed);
        rep.rows.push_back({seed, "conventional", estimate_phase(conv, conventional_cal, conventional_noise)});
    }

    rep.amplified = detail::summarize_arm("amplified", rep.rows, theta, cal.h_hat, noise.visibility);
    rep.conventional = detail::summarize_arm("conventional", rep.rows, theta, 1.0, noise.visibility);
    return rep;
}

}  // namespace wmpa
