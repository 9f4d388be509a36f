/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace waku {

  // The standard distributions are implementation-defined; these helpers only
  // use raw mt19937_64 output so seeded runs reproduce across platforms.

  /// Uniform integer in [0, n). n must be positive.
  inline std::uint64_t uniform_below(std::mt19937_64 &rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform double in [0, 1).
  inline double uniform_unit(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }

  /// k items chosen uniformly without replacement (all of them if k >= size).
  template <class T>
  std::vector<T> sample(std::vector<T> items, std::size_t k, std::mt19937_64 &rng) {
    if (k > items.size()) {
      k = items.size();
    }
    for (std::size_t i = 0; i < k; ++i) {
      auto j = i + uniform_below(rng, items.size() - i);
      std::swap(items[i], items[j]);
    }
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(k), items.end());
    return items;
  }

}  // namespace waku
