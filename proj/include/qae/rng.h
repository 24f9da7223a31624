// Copyright 2026 The qae Authors
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

#ifndef QAE_RNG_H
#define QAE_RNG_H

#include <cstdint>
#include <random>

namespace qae {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of an independent sub-stream, a pure function of (seed, tag, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    return mix64(mix64(mix64(seed) ^ tag) ^ index);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, tag, index));
}

// Stream tags; values are arbitrary but fixed, since they determine every dataset and initialization.
namespace stream {
inline constexpr std::uint64_t kTrainInput = 0x7472696e;
inline constexpr std::uint64_t kTrainReference = 0x72656665;
inline constexpr std::uint64_t kTest = 0x74657374;
inline constexpr std::uint64_t kTestPhase = 0x70686173;
inline constexpr std::uint64_t kInit = 0x696e6974;
inline constexpr std::uint64_t kDataset = 0x64617461;
}  // namespace stream

/// Uniform draw from the open interval (low, high).
inline double uniform_open(Rng &rng, double low, double high) {
    std::uniform_real_distribution<double> dist(low, high);
    double x;
    do {
        x = dist(rng);
    } while (x <= low || x >= high);
    return x;
}

}  // namespace qae

#endif
