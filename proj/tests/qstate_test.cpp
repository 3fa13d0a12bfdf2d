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

#include "wmpa/qstate.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "gtest/gtest.h"
#include "wmpa/protocol.hpp"

using namespace wmpa;

namespace {

void expect_amp_near(Amplitude actual, Amplitude expected, double tol = 1e-14) {
    EXPECT_NEAR(actual.real(), expected.real(), tol);
    EXPECT_NEAR(actual.imag(), expected.imag(), tol);
}

PureState2 random_qubit(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Amplitude a(g(rng), g(rng)), b(g(rng), g(rng));
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    return PureState2::make(a / n, b / n);
}

JointState random_joint(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    JointState::Amps amps;
    double n = 0;
    for (auto &a : amps) {
        a = {g(rng), g(rng)};
        n += std::norm(a);
    }
    for (auto &a : amps) a /= std::sqrt(n);
    return JointState::make(amps);
}

// Random 4x4 unitary from Gram-Schmidt on a complex Gaussian matrix.
Unitary4 random_unitary(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Unitary4::Matrix cols{};
    for (auto &c : cols)
        for (auto &x : c) x = {g(rng), g(rng)};
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            Amplitude dot = 0;
            for (std::size_t i = 0; i < 4; ++i) dot += std::conj(cols[k][i]) * cols[j][i];
            for (std::size_t i = 0; i < 4; ++i) cols[j][i] -= dot * cols[k][i];
        }
        double n = 0;
        for (auto &x : cols[j]) n += std::norm(x);
        for (auto &x : cols[j]) x /= std::sqrt(n);
    }
    Unitary4::Matrix m{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m[i][j] = cols[j][i];
    return Unitary4::make(m);
}

}  // namespace

TEST(Tensor, BasisCase) {
    const auto s = tensor(PureState2::zero(), PureState2::zero());
    expect_amp_near(s[0], 1.0);
    expect_amp_near(s[1], 0.0);
    expect_amp_near(s[2], 0.0);
    expect_amp_near(s[3], 0.0);
}

TEST(Tensor, BalancedPreparation) {
    const auto s = tensor(PureState2::plus(), PureState2::plus());
    for (std::size_t i = 0; i < 4; ++i) expect_amp_near(s[i], 0.5);
}

TEST(Tensor, ProductWithBasisPointer) {
    const auto s = tensor(PureState2::real(0.6, 0.8), PureState2::zero());
    expect_amp_near(s[0], 0.6);
    expect_amp_near(s[1], 0.0);
    expect_amp_near(s[2], 0.8);
    expect_amp_near(s[3], 0.0);
}

TEST(Tensor, RejectsUnnormalizedInput) {
    EXPECT_THROW(PureState2::real(1.0, 1.0), Error);
    EXPECT_THROW(PureState2::make({std::nan(""), 0.0}, 1.0), Error);
    try {
        PureState2::real(0.5, 0.5);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::validation);
    }
}

TEST(ApplyUnitary, Identity) {
    std::mt19937_64 rng(7);
    const auto s = random_joint(rng);
    const auto out = apply_unitary(Unitary4::identity(), s);
    for (std::size_t i = 0; i < 4; ++i) expect_amp_near(out[i], s[i], 0.0);
}

TEST(ApplyUnitary, ControlledPhasePi) {
    const auto s = tensor(PureState2::plus(), PureState2::plus());
    const auto out = apply_unitary(controlled_phase_unitary(std::numbers::pi), s);
    expect_amp_near(out[0], 0.5);
    expect_amp_near(out[1], 0.5);
    expect_amp_near(out[2], 0.5);
    expect_amp_near(out[3], -0.5);
}

TEST(ApplyUnitary, ControlledPhaseSmall) {
    // Expected: multiply the |1 down> amplitude by cos(0.1) + i sin(0.1) directly.
    const auto s = tensor(PureState2::plus(), PureState2::plus());
    const auto out = apply_unitary(controlled_phase_unitary(0.1), s);
    expect_amp_near(out[0], 0.5);
    expect_amp_near(out[1], 0.5);
    expect_amp_near(out[2], 0.5);
    expect_amp_near(out[3], Amplitude(0.5 * std::cos(0.1), 0.5 * std::sin(0.1)));
}

TEST(ApplyUnitary, RejectsNonUnitary) {
    Unitary4::Matrix m{};
    for (std::size_t i = 0; i < 4; ++i) m[i][i] = 1.0;
    m[0][1] = 1e-6;
    EXPECT_THROW(Unitary4::make(m), Error);
    m[0][1] = 0.0;
    m[3][3] = 1.0 + 1e-9;
    EXPECT_THROW(Unitary4::make(m), Error);
}

TEST(ApplyUnitary, NormPreservedForRandomUnitaries) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const auto u = random_unitary(rng);
        const auto s = random_joint(rng);
        const auto out = apply_unitary(u, s);
        double n = 0;
        for (const auto &a : out.amps()) n += std::norm(a);
        EXPECT_LT(std::abs(n - 1.0), 1e-12);
    }
}

TEST(ProjectSystem, BasisCase) {
    const auto pr = project_system(tensor(PureState2::zero(), PureState2::zero()), PureState2::zero());
    EXPECT_NEAR(pr.prob, 1.0, 1e-15);
    expect_amp_near(pr.pointer.a0, 1.0);
    expect_amp_near(pr.pointer.a1, 0.0);
}

TEST(ProjectSystem, OrthogonalPostSelection) {
    const auto pr = project_system(tensor(PureState2::plus(), PureState2::plus()), PureState2::minus());
    EXPECT_NEAR(pr.prob, 0.0, 1e-15);
    expect_amp_near(pr.pointer.a0, 0.0);
    expect_amp_near(pr.pointer.a1, 0.0);
}

TEST(ProjectSystem, PostLcvrStateBruteForce) {
    // Independent evaluation of the post-selected pointer of the LCVR state
    // 1/2 (|0>|H> + |0>|V> + |1>|H> + e^{i theta}|1>|V>) on sin41|0> - cos41|1>.
    const double theta = 0.05;
    const double g = std::sin(deg_to_rad(41.0));
    const double e = -std::cos(deg_to_rad(41.0));
    const auto s = apply_unitary(controlled_phase_unitary(theta), tensor(PureState2::plus(), PureState2::plus()));
    const auto pr = project_system(s, PureState2::real(g, e));
    // mpmath, 40 digits.
    EXPECT_NEAR(pr.prob, 0.005175359935491499, 1e-15);
    expect_amp_near(pr.pointer.a0, -0.04932527561613236);
    expect_amp_near(pr.pointer.a1, Amplitude(-0.04885368038978096, -0.01885987893007825));
}

TEST(ProjectSystem, CompletenessProperty) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        const auto s = random_joint(rng);
        const auto t = random_qubit(rng);
        const double p = project_system(s, t).prob + project_system(s, t.orthogonal()).prob;
        EXPECT_NEAR(p, 1.0, 1e-12);
    }
}

TEST(ProjectSystem, PreSelectedRecoversPointer) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto sys = random_qubit(rng);
        const auto ptr = random_qubit(rng);
        const auto pr = project_system(tensor(sys, ptr), sys);
        EXPECT_NEAR(pr.prob, 1.0, 1e-12);
        expect_amp_near(pr.pointer.a0, ptr.a0(), 1e-12);
        expect_amp_near(pr.pointer.a1, ptr.a1(), 1e-12);
    }
}

TEST(SigmaX, PlusState) { EXPECT_NEAR(sigma_x_expectation(PureState2::plus()), 1.0, 1e-15); }

TEST(SigmaX, RotatedPointer) {
    const auto p = PureState2::make(kInvSqrt2, kInvSqrt2 * std::polar(1.0, 0.3));
    EXPECT_NEAR(sigma_x_expectation(p), 0.955336489125606, 1e-14);
}

TEST(SigmaX, NoCoherence) {
    EXPECT_NEAR(sigma_x_expectation(UnnormalizedState2{0.0, Amplitude(0.0, 0.3)}), 0.0, 0.0);
}

TEST(SigmaX, DegenerateStateThrows) {
    try {
        sigma_x_expectation(UnnormalizedState2{});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_state);
    }
}

TEST(SigmaX, RangeAndEqualityProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_qubit(rng);
        const double sx = sigma_x_expectation(p);
        EXPECT_LE(sx, 1.0 + 1e-15);
        EXPECT_GE(sx, -1.0 - 1e-15);
    }
    // Equals 1 exactly when a0 == a1 up to a global phase.
    for (int trial = 0; trial < 100; ++trial) {
        const Amplitude phase = std::polar(1.0, 0.1 * trial);
        const auto p = PureState2::make(kInvSqrt2 * phase, kInvSqrt2 * phase);
        EXPECT_NEAR(sigma_x_expectation(p), 1.0, 1e-15);
        EXPECT_NEAR(fidelity(p, PureState2::plus()), 1.0, 1e-15);
    }
}

TEST(Fidelity, GlobalPhaseInsensitive) {
    const auto a = PureState2::make(0.6, Amplitude(0.0, 0.8));
    const auto b = PureState2::make(0.6 * std::polar(1.0, 1.3), Amplitude(0.0, 0.8) * std::polar(1.0, 1.3));
    EXPECT_NEAR(fidelity(a, b), 1.0, 1e-15);
    EXPECT_NEAR(fidelity(PureState2::zero(), PureState2::one()), 0.0, 0.0);
}
