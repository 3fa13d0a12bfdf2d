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
 * Pure states on one qubit (2 amplitudes) and on a system qubit tensored
 * with a pointer qubit (4 amplitudes).
 *
 * The joint basis order is fixed everywhere to
 *     |0 up>, |0 down>, |1 up>, |1 down>
 * i.e. index = 2 * system + pointer. Pointer "up"/"down" is the same slot as
 * polarization H/V.
 *
 * Global phases are never stripped; compare states with fidelity().
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include "wmpa/error.hpp"

namespace wmpa {

using Amplitude = std::complex<double>;

/// Tolerance for every normalization and unitarity check.
inline constexpr double kTolerance = 1e-12;

/// Below this norm^2 a state has no usable direction.
inline constexpr double kDegenerateNormSq = 1e-24;

inline constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

inline bool is_finite(Amplitude a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

inline constexpr std::size_t joint_index(std::size_t system, std::size_t pointer) {
    return 2 * system + pointer;
}

/// Normalized single-qubit state a0|0> + a1|1>.
class PureState2 {
  public:
    static PureState2 make(Amplitude a0, Amplitude a1) {
        if (!is_finite(a0) || !is_finite(a1)) {
            throw Error(ErrorCode::validation, "qubit amplitudes must be finite");
        }
        const double n = std::norm(a0) + std::norm(a1);
        if (std::abs(n - 1.0) > kTolerance) {
            throw Error(ErrorCode::validation,
                        "qubit state not normalized (|a0|^2+|a1|^2 = " + std::to_string(n) + ")");
        }
        return PureState2(a0, a1);
    }

    /// Real superposition c0|0> + c1|1>, as used for all selection and pointer states.
    static PureState2 real(double c0, double c1) { return make(c0, c1); }

    static PureState2 zero() { return PureState2(1.0, 0.0); }
    static PureState2 one() { return PureState2(0.0, 1.0); }
    static PureState2 plus() { return PureState2(kInvSqrt2, kInvSqrt2); }
    static PureState2 minus() { return PureState2(kInvSqrt2, -kInvSqrt2); }

    Amplitude a0() const { return a0_; }
    Amplitude a1() const { return a1_; }
    Amplitude operator[](std::size_t i) const { return i == 0 ? a0_ : a1_; }

    /// The orthogonal state, with the convention (-a1*, a0*).
    PureState2 orthogonal() const { return PureState2(-std::conj(a1_), std::conj(a0_)); }

  private:
    PureState2(Amplitude a0, Amplitude a1) : a0_(a0), a1_(a1) {}

    Amplitude a0_;
    Amplitude a1_;
};

/// Single-qubit vector that has lost norm to a projection.
struct UnnormalizedState2 {
    Amplitude a0{};
    Amplitude a1{};

    double norm_sq() const { return std::norm(a0) + std::norm(a1); }

    PureState2 normalized() const {
        const double n = norm_sq();
        if (!(n > kDegenerateNormSq)) {
            throw Error(ErrorCode::degenerate_state, "cannot normalize a zero-norm state");
        }
        const double s = 1.0 / std::sqrt(n);
        // Rounding may leave |1 - norm| ~ 1e-16, well inside kTolerance.
        return PureState2::make(a0 * s, a1 * s);
    }
};

inline UnnormalizedState2 as_unnormalized(const PureState2 &s) { return {s.a0(), s.a1()}; }

/// Joint system (x) pointer state, unit norm.
class JointState {
  public:
    using Amps = std::array<Amplitude, 4>;

    static JointState make(const Amps &amps) {
        double n = 0.0;
        for (const auto &a : amps) {
            if (!is_finite(a)) throw Error(ErrorCode::validation, "joint amplitudes must be finite");
            n += std::norm(a);
        }
        if (std::abs(n - 1.0) > kTolerance) {
            throw Error(ErrorCode::validation,
                        "joint state not normalized (norm^2 = " + std::to_string(n) + ")");
        }
        return JointState(amps);
    }

    const Amps &amps() const { return amps_; }
    Amplitude operator[](std::size_t i) const { return amps_[i]; }
    Amplitude at(std::size_t system, std::size_t pointer) const {
        return amps_[joint_index(system, pointer)];
    }

  private:
    explicit JointState(const Amps &amps) : amps_(amps) {}
    Amps amps_;
};

/// 4x4 unitary acting on JointState, row-major.
class Unitary4 {
  public:
    using Matrix = std::array<std::array<Amplitude, 4>, 4>;

    static Unitary4 make(const Matrix &m) {
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                if (!is_finite(m[i][j])) {
                    throw Error(ErrorCode::validation, "unitary entries must be finite");
                }
            }
        }
        // U^dagger U == I entry-wise.
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                Amplitude acc = 0.0;
                for (std::size_t k = 0; k < 4; ++k) acc += std::conj(m[k][i]) * m[k][j];
                const Amplitude expected = (i == j) ? 1.0 : 0.0;
                if (std::abs(acc - expected) > kTolerance) {
                    throw Error(ErrorCode::validation, "matrix is not unitary within tolerance");
                }
            }
        }
        return Unitary4(m);
    }

    static Unitary4 identity() { return diagonal({1.0, 1.0, 1.0, 1.0}); }

    static Unitary4 diagonal(const std::array<Amplitude, 4> &d) {
        Matrix m{};
        for (std::size_t i = 0; i < 4; ++i) m[i][i] = d[i];
        return make(m);
    }

    Amplitude operator()(std::size_t row, std::size_t col) const { return m_[row][col]; }
    const Matrix &matrix() const { return m_; }

  private:
    explicit Unitary4(const Matrix &m) : m_(m) {}
    Matrix m_;
};

inline JointState tensor(const PureState2 &system, const PureState2 &pointer) {
    JointState::Amps amps{};
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t p = 0; p < 2; ++p) amps[joint_index(s, p)] = system[s] * pointer[p];
    }
    return JointState::make(amps);
}

inline JointState apply_unitary(const Unitary4 &u, const JointState &s) {
    JointState::Amps out{};
    for (std::size_t i = 0; i < 4; ++i) {
        Amplitude acc = 0.0;
        for (std::size_t k = 0; k < 4; ++k) acc += u(i, k) * s[k];
        out[i] = acc;
    }
    return JointState::make(out);
}

struct Projection {
    double prob = 0.0;
    UnnormalizedState2 pointer;
};

/// Partial inner product <target|_S s: conditions the system factor on `target`.
inline Projection project_system(const JointState &s, const PureState2 &target) {
    UnnormalizedState2 pointer;
    pointer.a0 = std::conj(target.a0()) * s.at(0, 0) + std::conj(target.a1()) * s.at(1, 0);
    pointer.a1 = std::conj(target.a0()) * s.at(0, 1) + std::conj(target.a1()) * s.at(1, 1);
    return {pointer.norm_sq(), pointer};
}

/// <sigma_x> of the normalized version of `p`.
inline double sigma_x_expectation(const UnnormalizedState2 &p) {
    const double n = p.norm_sq();
    if (!(n > kDegenerateNormSq)) {
        throw Error(ErrorCode::degenerate_state, "sigma_x of a zero-norm pointer is undefined");
    }
    return 2.0 * std::real(std::conj(p.a0) * p.a1) / n;
}

inline double sigma_x_expectation(const PureState2 &p) {
    return sigma_x_expectation(as_unnormalized(p));
}

/// arg(a1 / a0): the latitude angle of the pointer on the Bloch sphere.
inline double relative_phase(const UnnormalizedState2 &p) {
    if (std::norm(p.a0) <= kDegenerateNormSq || std::norm(p.a1) <= kDegenerateNormSq) {
        throw Error(ErrorCode::degenerate_state, "relative phase needs both amplitudes nonzero");
    }
    return std::arg(std::conj(p.a0) * p.a1);
}

/// |<a|b>|^2 for normalized states.
inline double fidelity(const PureState2 &a, const PureState2 &b) {
    return std::norm(std::conj(a.a0()) * b.a0() + std::conj(a.a1()) * b.a1());
}

/// Fidelity of the normalized directions of two unnormalized vectors.
inline double fidelity(const UnnormalizedState2 &a, const UnnormalizedState2 &b) {
    return fidelity(a.normalized(), b.normalized());
}

inline double fidelity(const JointState &a, const JointState &b) {
    Amplitude acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) acc += std::conj(a[i]) * b[i];
    return std::norm(acc);
}

}  // namespace wmpa
