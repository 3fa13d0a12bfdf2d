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

#include <array>
#include <cstdint>
#include <random>

namespace wmpa {

/// SplitMix64 step; used only to derive well-mixed keys for child streams.
inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seedable, splittable random stream. The key fully determines every draw;
/// split(i) derives an independent child keyed by (parent key, i).
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : key_(seed), engine_(make_engine(seed)) {}

    RngStream split(std::uint64_t child) const {
        std::uint64_t state = key_ ^ (0xD1B54A32D192ED03ull * (child + 1));
        splitmix64(state);
        return RngStream(splitmix64(state));
    }

    std::uint64_t key() const { return key_; }
    std::mt19937_64 &engine() { return engine_; }

  private:
    static std::mt19937_64 make_engine(std::uint64_t key) {
        std::uint64_t state = key;
        std::array<std::uint32_t, 8> words{};
        for (std::size_t i = 0; i < words.size(); i += 2) {
            const std::uint64_t w = splitmix64(state);
            words[i] = static_cast<std::uint32_t>(w);
            words[i + 1] = static_cast<std::uint32_t>(w >> 32);
        }
        std::seed_seq seq(words.begin(), words.end());
        return std::mt19937_64(seq);
    }

    std::uint64_t key_;
    std::mt19937_64 engine_;
};

}  // namespace wmpa
