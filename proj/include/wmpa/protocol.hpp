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
 * Weak-measurement phase amplification on a system qubit and a pointer qubit.
 *
 * The system is pre-selected in alpha|0> + beta|1>, the pointer prepared in
 * mu|up> + nu|down>. A controlled phase imprints exp(i theta) on |1 down>,
 * then the system is post-selected on gamma|0> + eta|1>. When the pre- and
 * post-selected states are nearly orthogonal the pointer's relative phase
 * kappa is a magnified copy of theta:
 *
 *     tan(kappa) = sin(theta) / (cos(theta) + r),   r = alpha gamma / (beta eta)
 *
 * with small-signal gain h = 1 / (1 + r).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "wmpa/error.hpp"
#include "wmpa/qstate.hpp"

namespace wmpa {

/// |alpha gamma + beta eta| below this makes the signal a pure global phase.
inline constexpr double kOverlapThreshold = 1e-9;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct ProtocolConfig {
    double alpha = kInvSqrt2;
    double beta = kInvSqrt2;
    double mu = kInvSqrt2;
    double nu = kInvSqrt2;
    double gamma = kInvSqrt2;
    double eta = kInvSqrt2;
    double theta = 0.0;  ///< signal phase [rad]

    void validate() const {
        const auto check_pair = [](double a, double b, const char *name) {
            if (!std::isfinite(a) || !std::isfinite(b)) {
                throw Error(ErrorCode::validation, std::string(name) + " coefficients must be finite");
            }
            if (std::abs(a * a + b * b - 1.0) > kTolerance) {
                throw Error(ErrorCode::validation, std::string(name) + " coefficients not normalized");
            }
        };
        check_pair(alpha, beta, "pre-selection");
        check_pair(mu, nu, "pointer");
        check_pair(gamma, eta, "post-selection");
        if (!std::isfinite(theta)) throw Error(ErrorCode::validation, "theta must be finite");
    }

    PureState2 pre_selection() const { return PureState2::real(alpha, beta); }
    PureState2 pointer() const { return PureState2::real(mu, nu); }
    PureState2 post_selection() const { return PureState2::real(gamma, eta); }

    /// <psi_f|psi_i> = alpha gamma + beta eta.
    double overlap() const { return alpha * gamma + beta * eta; }

    /// The optical-table setting: balanced pre-selection and pointer, post-selection
    /// sin(45deg - 2 delta)|0> - cos(45deg - 2 delta)|1>.
    static ProtocolConfig from_selection_angle(double delta_deg, double theta) {
        const double a = deg_to_rad(45.0 - 2.0 * delta_deg);
        ProtocolConfig cfg;
        cfg.gamma = std::sin(a);
        cfg.eta = -std::cos(a);
        cfg.theta = theta;
        cfg.validate();
        return cfg;
    }

    /// Balanced pre-selection and pointer with post-selection chosen so that
    /// alpha gamma / (beta eta) == r.
    static ProtocolConfig from_ratio(double r, double theta) {
        if (!std::isfinite(r)) throw Error(ErrorCode::validation, "ratio r must be finite");
        const double a = std::atan(-r);
        ProtocolConfig cfg;
        cfg.gamma = std::sin(a);
        cfg.eta = -std::cos(a);
        cfg.theta = theta;
        cfg.validate();
        return cfg;
    }
};

struct AmplificationParams {
    double r = 0.0;  ///< alpha gamma / (beta eta)
    double h = 1.0;  ///< small-signal magnification 1 / (1 + r)
};

struct ProtocolOutcome {
    double success_prob = 0.0;
    UnnormalizedState2 pointer;
    double kappa_exact = 0.0;
    double kappa_first_order = 0.0;
};

inline Unitary4 controlled_phase_unitary(double theta) {
    if (!std::isfinite(theta)) throw Error(ErrorCode::validation, "theta must be finite");
    return Unitary4::diagonal({1.0, 1.0, 1.0, std::polar(1.0, theta)});
}

/// kappa = atan2(sin theta, cos theta + r), in (-pi, pi].
inline double amplified_phase_exact(double theta, double r) {
    const double num = std::sin(theta);
    const double den = std::cos(theta) + r;
    if (std::abs(num) < kTolerance && std::abs(den) < kTolerance) {
        throw Error(ErrorCode::undefined_phase, "sin(theta) and cos(theta) + r both vanish");
    }
    return std::atan2(num, den);
}

inline double magnification(double r) {
    if (!std::isfinite(r) || std::abs(1.0 + r) < kTolerance) {
        throw Error(ErrorCode::divergent_magnification, "magnification diverges at r = -1");
    }
    return 1.0 / (1.0 + r);
}

/// Solves tan(kappa) = sin(theta) / (cos(theta) + r) for theta.
/// Rearranged: sin(theta - kappa) = r sin(kappa); the principal arcsin branch
/// sends kappa -> 0 to theta -> 0 and is exact whenever |r| < 1.
inline double invert_amplification(double kappa, double r) {
    double x = r * std::sin(kappa);
    if (!std::isfinite(x) || std::abs(x) > 1.0 + kTolerance) {
        throw Error(ErrorCode::no_solution,
                    "measured kappa is inconsistent with r (|r sin kappa| > 1)");
    }
    x = std::clamp(x, -1.0, 1.0);
    return kappa + std::asin(x);
}

inline AmplificationParams amplification_params(const ProtocolConfig &cfg) {
    const double denom = cfg.beta * cfg.eta;
    if (denom == 0.0) {
        throw Error(ErrorCode::validation, "beta * eta == 0: the phase never reaches the pointer");
    }
    AmplificationParams p;
    p.r = cfg.alpha * cfg.gamma / denom;
    p.h = magnification(p.r);
    return p;
}

/// Post-selected (unnormalized) pointer, computed in closed form:
///   mu (alpha gamma + beta eta)|up> + nu (alpha gamma + beta eta e^{i theta})|down>.
/// No degeneracy check; run_protocol() adds that.
inline UnnormalizedState2 post_selected_pointer(const ProtocolConfig &cfg) {
    const double ag = cfg.alpha * cfg.gamma;
    const double be = cfg.beta * cfg.eta;
    UnnormalizedState2 p;
    p.a0 = cfg.mu * (ag + be);
    p.a1 = cfg.nu * (ag + be * std::polar(1.0, cfg.theta));
    return p;
}

inline void require_non_degenerate(const ProtocolConfig &cfg) {
    if (std::abs(cfg.overlap()) < kOverlapThreshold) {
        throw Error(ErrorCode::global_phase_degenerate,
                    "pre- and post-selected states are orthogonal; the phase is global and unobservable");
    }
}

inline ProtocolOutcome run_protocol(const ProtocolConfig &cfg) {
    cfg.validate();
    require_non_degenerate(cfg);

    ProtocolOutcome out;
    out.pointer = post_selected_pointer(cfg);
    out.success_prob = out.pointer.norm_sq();
    if (cfg.beta * cfg.eta == 0.0) {
        // No coupling: the pointer never moves.
        return out;
    }
    const auto amp = amplification_params(cfg);
    out.kappa_exact = amplified_phase_exact(cfg.theta, amp.r);
    out.kappa_first_order = amp.h * cfg.theta;
    return out;
}

/// Normalized first-order pointer mu|up> + nu e^{i kappa}|down>.
inline PureState2 amplified_pointer_first_order(const ProtocolConfig &cfg) {
    cfg.validate();
    require_non_degenerate(cfg);
    const auto amp = amplification_params(cfg);
    const double kappa = amplified_phase_exact(cfg.theta, amp.r);
    return PureState2::make(cfg.mu, cfg.nu * std::polar(1.0, kappa));
}

}  // namespace wmpa
