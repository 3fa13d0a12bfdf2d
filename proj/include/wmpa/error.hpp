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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmpa {

enum class ErrorCode {
    validation,               ///< malformed input (non-normalized state, non-unitary matrix, bad range)
    degenerate_state,         ///< zero-norm state where a direction is needed
    global_phase_degenerate,  ///< pre/post selection orthogonal: the signal is a pure global phase
    undefined_phase,          ///< atan2(0, 0)
    divergent_magnification,  ///< r == -1
    no_solution,              ///< |r sin(kappa)| > 1 during inversion
    undefined_sensitivity,    ///< sin(h theta) == 0
    rail_overflow,            ///< beam walked outside the working rail range
    insufficient_data,        ///< no detected photons
    boundary,                 ///< calibration probability at 0 or 1
    config,                   ///< configuration file / usage problem
    io,                       ///< file read / write failure
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::validation: return "validation";
        case ErrorCode::degenerate_state: return "degenerate-state";
        case ErrorCode::global_phase_degenerate: return "global-phase-degenerate";
        case ErrorCode::undefined_phase: return "undefined-phase";
        case ErrorCode::divergent_magnification: return "divergent-magnification";
        case ErrorCode::no_solution: return "no-solution";
        case ErrorCode::undefined_sensitivity: return "undefined-sensitivity";
        case ErrorCode::rail_overflow: return "rail-overflow";
        case ErrorCode::insufficient_data: return "insufficient-data";
        case ErrorCode::boundary: return "boundary";
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Process exit status for an error category: 2 usage/config, 3 numerical domain, 4 data, 5 I/O.
inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::config:
        case ErrorCode::validation:
            return 2;
        case ErrorCode::insufficient_data:
            return 4;
        case ErrorCode::io:
            return 5;
        default:
            return 3;
    }
}

}  // namespace wmpa
