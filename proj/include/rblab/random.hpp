// Copyright 2026 The rblab Authors
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

#include <cstdint>
#include <random>

// Distributions are written out by hand: the standard library's distribution
// objects are implementation-defined, which would break cross-platform
// reproducibility of seeded runs.
namespace rblab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent generator for task (a, b) of a run seeded with `seed`.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(a + 0x1234567ULL));
    h = splitmix64(h ^ splitmix64(b + 0x89ABCDEFULL));
    return Rng(h);
}

/// Uniform integer in [0, n).
inline int uniform_index(Rng &rng, int n) {
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<int>(v % range);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool fair_coin(Rng &rng) { return (rng() >> 63) != 0; }

inline int binomial(Rng &rng, int trials, double p) {
    int k = 0;
    for (int i = 0; i < trials; ++i) {
        k += uniform01(rng) < p;
    }
    return k;
}

}  // namespace rblab
