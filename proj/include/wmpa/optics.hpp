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
 * Jones-calculus model of a beam-displacer interferometer.
 *
 * A single photon lives on a small set of parallel rails (transverse beam
 * lines) and carries H/V polarization. Rail 0 is the lower ("down") path,
 * rail 1 the upper path. Beam displacers keep H on its rail and walk V up by
 * one rail. Wave plates and retarders act on the polarization of the rails
 * they cover.
 *
 * Conventions:
 *   HWP at angle phi:   [[cos 2phi,  sin 2phi],
 *                        [sin 2phi, -cos 2phi]]
 *   LCVR retardance t:  diag(1, e^{i t})
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "wmpa/error.hpp"
#include "wmpa/protocol.hpp"
#include "wmpa/qstate.hpp"

namespace wmpa::optics {

inline constexpr int kMinRail = -2;
inline constexpr int kMaxRail = 2;
inline constexpr int kRailCount = kMaxRail - kMinRail + 1;

enum class Polarization { H = 0, V = 1 };

struct Mode {
    int rail = 0;
    Polarization pol = Polarization::H;
};

inline bool rail_in_range(int rail) { return rail >= kMinRail && rail <= kMaxRail; }

using Jones = std::array<std::array<Amplitude, 2>, 2>;

inline Jones hwp_jones(double angle_deg) {
    const double two_phi = 2.0 * deg_to_rad(angle_deg);
    const double c = std::cos(two_phi);
    const double s = std::sin(two_phi);
    return {{{c, s}, {s, -c}}};
}

inline Jones lcvr_jones(double retardance) {
    return {{{1.0, 0.0}, {0.0, std::polar(1.0, retardance)}}};
}

/// Amplitudes over every (rail, polarization) mode of the working range.
class ModeState {
  public:
    ModeState() { amps_.fill(0.0); }

    static ModeState single(Mode m, Amplitude a = 1.0) {
        ModeState s;
        s.at(m.rail, m.pol) = a;
        return s;
    }

    Amplitude operator()(int rail, Polarization pol) const { return amps_[index(rail, pol)]; }
    Amplitude &at(int rail, Polarization pol) { return amps_[index(rail, pol)]; }

    double norm_sq() const {
        double n = 0.0;
        for (const auto &a : amps_) n += std::norm(a);
        return n;
    }

    double rail_norm_sq(int rail) const {
        return std::norm((*this)(rail, Polarization::H)) + std::norm((*this)(rail, Polarization::V));
    }

  private:
    static std::size_t index(int rail, Polarization pol) {
        if (!rail_in_range(rail)) {
            throw Error(ErrorCode::rail_overflow,
                        "rail " + std::to_string(rail) + " outside working range [" +
                            std::to_string(kMinRail) + ", " + std::to_string(kMaxRail) + "]");
        }
        return static_cast<std::size_t>(rail - kMinRail) * 2 + static_cast<std::size_t>(pol);
    }

    std::array<Amplitude, 2 * kRailCount> amps_;
};

/// Rails an element covers. `all` overrides the explicit list.
struct RailSet {
    bool all = true;
    std::vector<int> rails;

    static RailSet every() { return {}; }
    static RailSet of(std::vector<int> r) { return {false, std::move(r)}; }

    bool contains(int rail) const {
        return all || std::find(rails.begin(), rails.end(), rail) != rails.end();
    }
};

struct HalfWavePlate {
    double angle_deg = 0.0;
    RailSet rails;
};

struct LiquidCrystalRetarder {
    double retardance = 0.0;  ///< [rad], in [0, 2 pi)
    RailSet rails;
};

struct BeamDisplacer {
    // Physical dimensions; the mode model only uses the one-rail walk.
    double length_mm = 39.70;
    double walkoff_mm = 4.21;
};

/// Transmits H, reflects V. Identity on amplitudes: the ports are read out by
/// pbs_ports().
struct PolarizingBeamSplitter {};

/// Absorbs everything on the covered rails.
struct Block {
    RailSet rails;
};

using ElementKind =
    std::variant<HalfWavePlate, LiquidCrystalRetarder, BeamDisplacer, PolarizingBeamSplitter, Block>;

struct OpticalElement {
    ElementKind kind;
    std::string label;
};

inline std::string element_tag(const ElementKind &e) {
    struct Visitor {
        std::string operator()(const HalfWavePlate &) const { return "HWP"; }
        std::string operator()(const LiquidCrystalRetarder &) const { return "LCVR"; }
        std::string operator()(const BeamDisplacer &) const { return "BD"; }
        std::string operator()(const PolarizingBeamSplitter &) const { return "PBS"; }
        std::string operator()(const Block &) const { return "Block"; }
    };
    return std::visit(Visitor{}, e);
}

/// Maps a phase into [0, 2 pi).
inline double wrap_retardance(double t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(t, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

struct OpticalTrain {
    std::vector<OpticalElement> elements;

    void validate() const {
        const auto check_rails = [](const RailSet &rs, const std::string &what) {
            if (rs.all) return;
            for (int r : rs.rails) {
                if (!rail_in_range(r)) {
                    throw Error(ErrorCode::validation,
                                what + " covers rail " + std::to_string(r) + " outside working range");
                }
            }
        };
        for (const auto &el : elements) {
            const std::string what = el.label.empty() ? element_tag(el.kind) : el.label;
            if (const auto *hwp = std::get_if<HalfWavePlate>(&el.kind)) {
                if (!std::isfinite(hwp->angle_deg)) {
                    throw Error(ErrorCode::validation, what + ": HWP angle must be finite");
                }
                check_rails(hwp->rails, what);
            } else if (const auto *lc = std::get_if<LiquidCrystalRetarder>(&el.kind)) {
                if (!(lc->retardance >= 0.0 && lc->retardance < 2.0 * std::numbers::pi)) {
                    throw Error(ErrorCode::validation, what + ": LCVR retardance must lie in [0, 2pi)");
                }
                check_rails(lc->rails, what);
            } else if (const auto *blk = std::get_if<Block>(&el.kind)) {
                check_rails(blk->rails, what);
            }
        }
    }

    /// Elements up to and including the one labelled `label`.
    OpticalTrain prefix_through(const std::string &label) const {
        OpticalTrain out;
        for (const auto &el : elements) {
            out.elements.push_back(el);
            if (el.label == label) return out;
        }
        throw Error(ErrorCode::validation, "no element labelled '" + label + "'");
    }
};

inline ModeState apply_jones(const ModeState &s, const Jones &m, const RailSet &rails) {
    ModeState out = s;
    for (int rail = kMinRail; rail <= kMaxRail; ++rail) {
        if (!rails.contains(rail)) continue;
        const Amplitude h = s(rail, Polarization::H);
        const Amplitude v = s(rail, Polarization::V);
        out.at(rail, Polarization::H) = m[0][0] * h + m[0][1] * v;
        out.at(rail, Polarization::V) = m[1][0] * h + m[1][1] * v;
    }
    return out;
}

inline ModeState apply_bd(const ModeState &s) {
    ModeState out;
    for (int rail = kMinRail; rail <= kMaxRail; ++rail) {
        out.at(rail, Polarization::H) += s(rail, Polarization::H);
        const Amplitude v = s(rail, Polarization::V);
        if (v == Amplitude(0.0)) continue;
        if (rail + 1 > kMaxRail) {
            throw Error(ErrorCode::rail_overflow,
                        "beam displacer walks V off rail " + std::to_string(rail));
        }
        out.at(rail + 1, Polarization::V) += v;
    }
    return out;
}

inline ModeState apply_element(const ModeState &s, const ElementKind &e) {
    struct Visitor {
        const ModeState &s;
        ModeState operator()(const HalfWavePlate &x) const {
            return apply_jones(s, hwp_jones(x.angle_deg), x.rails);
        }
        ModeState operator()(const LiquidCrystalRetarder &x) const {
            return apply_jones(s, lcvr_jones(x.retardance), x.rails);
        }
        ModeState operator()(const BeamDisplacer &) const { return apply_bd(s); }
        ModeState operator()(const PolarizingBeamSplitter &) const { return s; }
        ModeState operator()(const Block &x) const {
            ModeState out = s;
            for (int rail = kMinRail; rail <= kMaxRail; ++rail) {
                if (!x.rails.contains(rail)) continue;
                out.at(rail, Polarization::H) = 0.0;
                out.at(rail, Polarization::V) = 0.0;
            }
            return out;
        }
    };
    return std::visit(Visitor{s}, e);
}

inline ModeState simulate_train(const OpticalTrain &train, const ModeState &input) {
    train.validate();
    ModeState s = input;
    for (const auto &el : train.elements) s = apply_element(s, el.kind);
    return s;
}

/// The rail the recombined, post-selected beam leaves on.
inline constexpr int kOutputRail = 1;

/// Pre- and post-selection plates for the figure-1 table. delta in degrees.
///
/// HWP3 and HWP4 are listed at 67.5 deg and -22.5 deg - delta. A half-wave
/// plate turned by 90 deg is the same plate up to a sign, and with this Jones
/// convention those two settings are the ones that prepare (|0>+|1>)/sqrt2 (x) |+>
/// and post-select sin(45 - 2 delta)|0> - cos(45 - 2 delta)|1> without an extra
/// relative sign between the rails.
inline OpticalTrain build_figure1_train(double delta_deg, double theta) {
    if (!(delta_deg > 0.0 && delta_deg < 22.5)) {
        throw Error(ErrorCode::validation, "delta must lie in (0, 22.5) degrees");
    }
    if (!std::isfinite(theta)) throw Error(ErrorCode::validation, "theta must be finite");

    OpticalTrain t;
    auto add = [&t](ElementKind e, std::string label) { t.elements.push_back({std::move(e), std::move(label)}); };
    add(HalfWavePlate{22.5, RailSet::every()}, "HWP1");
    add(BeamDisplacer{}, "BD1");
    add(HalfWavePlate{22.5, RailSet::of({0})}, "HWP2");
    add(HalfWavePlate{67.5, RailSet::of({1})}, "HWP3");
    add(LiquidCrystalRetarder{wrap_retardance(theta), RailSet::of({1})}, "LCVR1");
    add(LiquidCrystalRetarder{0.0, RailSet::of({0})}, "LCVR2");
    add(HalfWavePlate{-22.5 - delta_deg, RailSet::of({1})}, "HWP4");
    add(HalfWavePlate{22.5 - delta_deg, RailSet::of({0})}, "HWP5");
    add(BeamDisplacer{}, "BD2");
    add(Block{RailSet::of({-2, -1, 0, 2})}, "SELECT");
    add(HalfWavePlate{22.5, RailSet::of({kOutputRail})}, "HWP6");
    add(PolarizingBeamSplitter{}, "PBS");
    return t;
}

/// The laser after the input polarizer: H on the lower rail.
inline ModeState figure1_input() { return ModeState::single({0, Polarization::H}); }

struct RailSelection {
    double prob = 0.0;
    UnnormalizedState2 pol_state;  ///< (H, V) amplitudes
};

inline RailSelection postselect_rail(const ModeState &s, int rail) {
    RailSelection sel;
    sel.pol_state.a0 = s(rail, Polarization::H);
    sel.pol_state.a1 = s(rail, Polarization::V);
    sel.prob = sel.pol_state.norm_sq();
    if (!(sel.prob > kDegenerateNormSq)) {
        throw Error(ErrorCode::degenerate_state, "no amplitude on the selected rail");
    }
    return sel;
}

inline RailSelection postselect_middle_rail(const ModeState &s) { return postselect_rail(s, kOutputRail); }

/// On the output rail the path-carrying H slot and the reference V slot are
/// swapped relative to the pointer basis: pointer up <-> V, down <-> H.
/// <sigma_x> is unchanged by the swap.
inline UnnormalizedState2 pointer_from_output(const UnnormalizedState2 &hv) { return {hv.a1, hv.a0}; }

struct PortProbabilities {
    double transmitted = 0.0;  ///< H port ("+" detector after HWP6)
    double reflected = 0.0;    ///< V port ("-" detector)
};

inline PortProbabilities pbs_ports(const ModeState &s, int rail) {
    return {std::norm(s(rail, Polarization::H)), std::norm(s(rail, Polarization::V))};
}

/// Re-orders the 2-rail part of a state polarization-major: (H0, H1, V0, V1).
inline std::array<Amplitude, 4> polarization_major(const ModeState &s) {
    return {s(0, Polarization::H), s(1, Polarization::H), s(0, Polarization::V), s(1, Polarization::V)};
}

/// Path-major order (0H, 0V, 1H, 1V) matching the JointState basis.
inline std::array<Amplitude, 4> path_major(const ModeState &s) {
    return {s(0, Polarization::H), s(0, Polarization::V), s(1, Polarization::H), s(1, Polarization::V)};
}

struct EquivalenceCheck {
    double delta_deg = 0.0;
    double theta = 0.0;
    double fidelity = 0.0;       ///< train pointer vs protocol pointer
    double prob_train = 0.0;
    double prob_protocol = 0.0;
    double sigma_x_train = 0.0;
    double sigma_x_protocol = 0.0;

    double prob_diff() const { return std::abs(prob_train - prob_protocol); }
};

/// Simulates the figure-1 table through the second beam displacer and compares
/// the middle-rail state with the abstract protocol.
inline EquivalenceCheck check_figure1_equivalence(double delta_deg, double theta) {
    const OpticalTrain train = build_figure1_train(delta_deg, theta).prefix_through("BD2");
    const auto sel = postselect_middle_rail(simulate_train(train, figure1_input()));
    const auto outcome = run_protocol(ProtocolConfig::from_selection_angle(delta_deg, theta));

    EquivalenceCheck c;
    c.delta_deg = delta_deg;
    c.theta = theta;
    const UnnormalizedState2 train_pointer = pointer_from_output(sel.pol_state);
    c.fidelity = fidelity(train_pointer, outcome.pointer);
    c.prob_train = sel.prob;
    c.prob_protocol = outcome.success_prob;
    c.sigma_x_train = sigma_x_expectation(sel.pol_state);
    c.sigma_x_protocol = sigma_x_expectation(outcome.pointer);
    return c;
}

}  // namespace wmpa::optics
