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
 * Photon-counting simulation of the amplified interferometer.
 *
 * One run counts for a fixed duration at a fixed source rate:
 *   arrivals    ~ Poisson(rate * duration)
 *   survivors   ~ Binomial(arrivals, P_s)
 *   "+" clicks  ~ Binomial(survivors, (1 + V cos kappa) / 2)
 * where P_s and kappa come from the exact post-selected pointer. Per-photon
 * Bernoulli trials are collapsed into the equivalent binomial draws.
 *
 * Every draw comes from its own child of RngStream(seed), so enabling one
 * noise source does not reshuffle the others.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "wmpa/error.hpp"
#include "wmpa/protocol.hpp"
#include "wmpa/qstate.hpp"
#include "wmpa/rng.hpp"

namespace wmpa {

struct NoiseModel {
    double visibility = 1.0;       ///< interference contrast V in [0, 1]
    double lcvr_jitter_std = 0.0;  ///< Gaussian retardance jitter per run [rad]
    double dark_rate = 0.0;        ///< per detector [counts/s]

    void validate() const {
        if (!(visibility >= 0.0 && visibility <= 1.0)) {
            throw Error(ErrorCode::validation, "visibility must lie in [0, 1]");
        }
        if (!(lcvr_jitter_std >= 0.0) || !std::isfinite(lcvr_jitter_std)) {
            throw Error(ErrorCode::validation, "LCVR jitter std must be finite and >= 0");
        }
        if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) {
            throw Error(ErrorCode::validation, "dark rate must be finite and >= 0");
        }
    }
};

/// Detector clicks of one run plus everything needed to replay it.
///
/// Without dark counts n_plus + n_minus == n_survivors <= n_input. Dark
/// counts are added to both detectors on top of the survivors.
struct CountData {
    std::int64_t n_plus = 0;
    std::int64_t n_minus = 0;
    std::int64_t n_input = 0;      ///< photons reaching post-selection
    std::int64_t n_survivors = 0;  ///< photons passing post-selection
    double duration = 0.0;         ///< [s]; 0 for fixed-detected runs
    double rate = 0.0;             ///< [counts/s]; 0 for fixed-detected runs
    std::uint64_t seed = 0;
    double theta_applied = 0.0;    ///< signal phase after jitter [rad]
    bool fixed_detected = false;   ///< survivors fixed instead of Poisson arrivals
    ProtocolConfig config;
    NoiseModel noise;

    std::int64_t n_detected() const { return n_plus + n_minus; }
};

namespace detail {

enum Stream : std::uint64_t { jitter = 1, arrivals = 2, selection = 3, analysis = 4, dark_plus = 5, dark_minus = 6 };

inline std::int64_t draw_binomial(RngStream rng, std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<std::int64_t>(n, p)(rng.engine());
}

inline std::int64_t draw_poisson(RngStream rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng.engine());
}

/// Applies jitter (if any) and returns the exact outcome at the jittered phase.
inline ProtocolOutcome jittered_outcome(const RngStream &root, ProtocolConfig &cfg, const NoiseModel &noise) {
    if (noise.lcvr_jitter_std > 0.0) {
        RngStream rng = root.split(Stream::jitter);
        cfg.theta += std::normal_distribution<double>(0.0, noise.lcvr_jitter_std)(rng.engine());
    }
    return run_protocol(cfg);
}

}  // namespace detail

/// P(+) for one surviving photon: (1 + V cos kappa) / 2 with kappa the relative
/// phase of the exact pointer. A pointer with one empty slot has no coherence.
inline double plus_probability(const UnnormalizedState2 &pointer, double visibility) {
    if (std::norm(pointer.a0) <= kDegenerateNormSq || std::norm(pointer.a1) <= kDegenerateNormSq) {
        return 0.5;
    }
    return 0.5 * (1.0 + visibility * std::cos(relative_phase(pointer)));
}

inline CountData simulate_counts(const ProtocolConfig &cfg, const NoiseModel &noise, double rate,
                                 double duration, std::uint64_t seed) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorCode::validation, "rate must be > 0");
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw Error(ErrorCode::validation, "duration must be > 0");
    }
    cfg.validate();
    noise.validate();

    const RngStream root(seed);
    ProtocolConfig applied = cfg;
    const ProtocolOutcome outcome = detail::jittered_outcome(root, applied, noise);

    CountData c;
    c.duration = duration;
    c.rate = rate;
    c.seed = seed;
    c.config = cfg;
    c.noise = noise;
    c.theta_applied = applied.theta;

    c.n_input = detail::draw_poisson(root.split(detail::arrivals), rate * duration);
    c.n_survivors = detail::draw_binomial(root.split(detail::selection), c.n_input, outcome.success_prob);
    c.n_plus = detail::draw_binomial(root.split(detail::analysis), c.n_survivors,
                                     plus_probability(outcome.pointer, noise.visibility));
    c.n_minus = c.n_survivors - c.n_plus;
    if (noise.dark_rate > 0.0) {
        c.n_plus += detail::draw_poisson(root.split(detail::dark_plus), noise.dark_rate * duration);
        c.n_minus += detail::draw_poisson(root.split(detail::dark_minus), noise.dark_rate * duration);
    }
    return c;
}

/// Run with exactly `n_detected` post-selected photons (the "equal detected
/// photons" budget). Loss information is not simulated: n_input == n_survivors.
inline CountData simulate_detected(const ProtocolConfig &cfg, const NoiseModel &noise,
                                   std::int64_t n_detected, std::uint64_t seed) {
    if (n_detected <= 0) throw Error(ErrorCode::validation, "detected photon count must be > 0");
    cfg.validate();
    noise.validate();
    if (noise.dark_rate > 0.0) {
        throw Error(ErrorCode::validation, "dark counts need a counting duration; use simulate_counts");
    }

    const RngStream root(seed);
    ProtocolConfig applied = cfg;
    const ProtocolOutcome outcome = detail::jittered_outcome(root, applied, noise);

    CountData c;
    c.seed = seed;
    c.config = cfg;
    c.noise = noise;
    c.theta_applied = applied.theta;
    c.fixed_detected = true;
    c.n_input = n_detected;
    c.n_survivors = n_detected;
    c.n_plus = detail::draw_binomial(root.split(detail::analysis), n_detected,
                                     plus_probability(outcome.pointer, noise.visibility));
    c.n_minus = n_detected - c.n_plus;
    return c;
}

struct SigmaXEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
};

inline SigmaXEstimate sigma_x_from_counts(std::int64_t n_plus, std::int64_t n_minus) {
    if (n_plus < 0 || n_minus < 0) throw Error(ErrorCode::validation, "negative counts");
    const std::int64_t n = n_plus + n_minus;
    if (n == 0) throw Error(ErrorCode::insufficient_data, "no detected photons");
    SigmaXEstimate s;
    s.n = n;
    s.estimate = static_cast<double>(n_plus - n_minus) / static_cast<double>(n);
    s.std_error = std::sqrt(std::max(0.0, 1.0 - s.estimate * s.estimate) / static_cast<double>(n));
    return s;
}

inline SigmaXEstimate sigma_x_from_counts(const CountData &c) { return sigma_x_from_counts(c.n_plus, c.n_minus); }

}  // namespace wmpa
