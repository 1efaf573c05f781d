// Copyright 2026 The mbqcnn Authors
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

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace mbqcnn {

/// First `take` entries of a Fisher-Yates shuffle of 0..n-1 driven by
/// mt19937_64(seed). The index draws are explicit so the result does not
/// depend on the standard library's std::shuffle.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed, std::size_t take) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < take && i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    return idx;
}

inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    return seeded_permutation(n, seed, n);
}

}  // namespace mbqcnn
