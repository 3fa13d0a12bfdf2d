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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All seeds are fixed.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wmpa/estimation.hpp"
#include "wmpa/montecarlo.hpp"
#include "wmpa/optics.hpp"
#include "wmpa/protocol.hpp"
#include "wmpa/qstate.hpp"

using namespace wmpa;

namespace {

int g_failures = 0;

void report(int id, const char *name, bool pass, const std::string &detail) {
    std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char *f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t n) {
    std::vector<std::uint64_t> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(first + i);
    return s;
}

const double kRate = 8e5;      // [counts/s]
const double kDuration = 10.0;  // [s]
const double kThetas[] = {0.03, 0.05, 0.08, 0.1};
const double kRatios[] = {-2.0 / 3.0, -0.8, -0.9};

// Mean kappa_hat at (r = -0.9, theta = 0.03), filled by criterion 1.
double g_mean_kappa_h10_003 = std::nan("");

void fig2_reproduction() {
    const auto seeds = seed_range(1, 100);
    double worst = 2.0;
    std::string worst_at;
    bool pass = true;
    for (double r : kRatios) {
        for (double theta : kThetas) {
            const ProtocolConfig cfg = ProtocolConfig::from_ratio(r, theta);
            const double kappa = amplified_phase_exact(theta, r);
            CalibrationResult cal;
            cal.r_hat = r;
            cal.h_hat = magnification(r);
            int within = 0;
            RunningStats mean;
            for (auto seed : seeds) {
                const CountData c = simulate_counts(cfg, NoiseModel{}, kRate, kDuration, seed);
                const PhaseEstimate e = estimate_phase(c, cal, NoiseModel{});
                if (std::abs(e.kappa_hat - kappa) <= 3.0 * e.std_error_kappa) ++within;
                mean.add(e.kappa_hat);
            }
            const double frac = within / static_cast<double>(seeds.size());
            if (frac < worst) {  // first point wins ties
                worst = frac;
                worst_at = "r=" + fmt("%.4f", r) + " theta=" + fmt("%.2f", theta);
            }
            pass = pass && frac >= 0.95;
            if (r == -0.9 && theta == 0.03) g_mean_kappa_h10_003 = mean.mean();
        }
    }
    report(1, "fig2 reproduction", pass,
           "12 points x 100 seeds, worst fraction within 3 SE = " + fmt("%.2f", worst) + " at " + worst_at +
               " (need >= 0.95)");
}

void one_order_amplification() {
    const double theta = 0.03, r = -0.9;
    const double exact = amplified_phase_exact(theta, r) / theta;
    const double simulated = g_mean_kappa_h10_003 / theta;
    const bool pass = simulated >= 9.0 && simulated <= 10.0 && exact >= 9.0 && exact <= 10.0;
    report(2, "one-order amplification", pass,
           "mean kappa_hat/theta over 100 runs = " + fmt("%.4f", simulated) + ", exact kappa/theta = " +
               fmt("%.4f", exact) + " (need [9, 10])");
}

void calibration_identity() {
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> dist(0.5, 20.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double delta = dist(rng);
        const double s = std::sin(deg_to_rad(2.0 * delta));
        const double r = calibrate_r(s * s).r_hat;
        worst = std::max(worst, std::abs(r + std::tan(deg_to_rad(45.0 - 2.0 * delta))));
    }
    report(3, "calibration identity", worst <= 1e-10,
           "50 random delta in (0.5, 20) deg, max |r - (-tan(45 - 2 delta))| = " + fmt("%.3g", worst) +
               " (need <= 1e-10)");
}

void train_equivalence() {
    double min_fid = 1.0, max_dp = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double delta = 0.5 + (20.0 - 0.5) * i / 19.0;
        for (int j = 0; j < 20; ++j) {
            const double theta = 3.0 * j / 19.0;
            const auto c = optics::check_figure1_equivalence(delta, theta);
            min_fid = std::min(min_fid, c.fidelity);
            max_dp = std::max(max_dp, c.prob_diff());
        }
    }
    const bool pass = min_fid >= 1.0 - 1e-12 && max_dp <= 1e-12;
    report(4, "optical-train equivalence", pass,
           "20x20 grid delta in [0.5, 20] deg, theta in [0, 3] rad: min fidelity = 1 - " +
               fmt("%.3g", 1.0 - min_fid) + ", max |dP| = " + fmt("%.3g", max_dp) + " (need <= 1e-12 each)");
}

void inversion_round_trip() {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> th(-0.5, 0.5);
    std::uniform_real_distribution<double> rr(-0.95, 0.95);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double theta = th(rng), r = rr(rng);
        worst = std::max(worst, std::abs(invert_amplification(amplified_phase_exact(theta, r), r) - theta));
    }
    report(5, "inversion round trip", worst <= 1e-12,
           "10^4 pairs, max |theta' - theta| = " + fmt("%.3g", worst) + " (need <= 1e-12)");
}

void sensitivity_law() {
    const double theta = 0.05;
    const std::int64_t n = 10000;
    PhotonBudget budget;
    budget.rate = 1e4;
    budget.duration = 1.0;
    const auto rep = compare_protocols(theta, calibrate_r(1.0 / 362.0), budget, NoiseModel{}, seed_range(1, 200),
                                       CompareMode::equal_detected);
    const double predicted = analytic_sensitivity(theta, 10.0, n);
    const double std_dev = rep.amplified.empirical_std / predicted - 1.0;
    const double ratio_dev = rep.std_ratio() / 10.0 - 1.0;
    const bool pass = std::abs(std_dev) <= 0.2 && std::abs(ratio_dev) <= 0.2;
    report(6, "sensitivity law", pass,
           "h=10 theta=0.05 N=1e4, 200 seeds: std(theta_hat) = " + fmt("%.4g", rep.amplified.empirical_std) +
               " vs formula " + fmt("%.4g", predicted) + " (" + fmt("%+.1f", 100 * std_dev) +
               "%); conventional/amplified std = " + fmt("%.3f", rep.std_ratio()) + " vs 10 (" +
               fmt("%+.1f", 100 * ratio_dev) + "%) (need within 20% each)");
}

void precision_floors() {
    const double a = precision_floor(0.9993), b = precision_floor(0.999975);
    const bool pass = a >= 0.03 && a <= 0.05 && b >= 0.005 && b <= 0.012;
    report(7, "precision floors", pass,
           "arccos(0.9993) = " + fmt("%.5f", a) + " (need [0.03, 0.05]), arccos(0.999975) = " + fmt("%.5f", b) +
               " (need [0.005, 0.012])");
}

void degenerate_case() {
    // alpha gamma + beta eta == 0 exactly in floating point.
    const auto pre = PureState2::real(kInvSqrt2, kInvSqrt2);
    const auto post = PureState2::real(kInvSqrt2, -kInvSqrt2);
    const auto pointer = PureState2::real(kInvSqrt2, kInvSqrt2);
    double worst = 0.0;
    const int n = 2000;
    for (int k = 1; k < n; ++k) {
        const double theta = std::numbers::pi * k / n;
        const auto joint = apply_unitary(controlled_phase_unitary(theta), tensor(pre, pointer));
        const auto pr = project_system(joint, post);
        worst = std::max(worst, std::abs(sigma_x_expectation(pr.pointer)));
    }
    // theta = 0: nothing survives, so there is no pointer to read at all.
    const auto zero = project_system(tensor(pre, pointer), post);
    const bool null_at_zero = zero.pointer.norm_sq() <= kDegenerateNormSq;
    bool flagged = false;
    try {
        ProtocolConfig cfg;
        cfg.eta = -kInvSqrt2;
        cfg.theta = 0.7;
        run_protocol(cfg);
    } catch (const Error &e) {
        flagged = e.code() == ErrorCode::global_phase_degenerate;
    }
    report(8, "degenerate case", worst <= 1e-12 && null_at_zero && flagged,
           "overlap 0: max |<sigma_x>| over " + std::to_string(n - 1) + " theta in (0, pi) = " + fmt("%.3g", worst) +
               (null_at_zero ? ", theta=0 pointer is null" : ", theta=0 pointer NOT null") +
               (flagged ? ", run_protocol flags it" : ", run_protocol does NOT flag it"));
}

}  // namespace

int main() {
    fig2_reproduction();
    one_order_amplification();
    calibration_identity();
    train_equivalence();
    inversion_round_trip();
    sensitivity_law();
    precision_floors();
    degenerate_case();
    std::printf("%d of 8 criteria passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
