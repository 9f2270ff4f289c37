/*
 * Copyright 2026 The mieeg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mieeg/train/mask.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>

#include "mieeg/error.hpp"

namespace mieeg::train {

std::size_t mask_size(std::size_t h_prime, double alpha, bool* clamped) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("mask ratio must lie in (0, 1)");
  if (h_prime < 2) throw InvalidArgument("masking needs at least two tokens");
  const auto raw = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(h_prime)));
  const std::size_t size = std::clamp<std::size_t>(raw, 1, h_prime - 1);
  if (clamped) *clamped = size != raw;
  return size;
}

std::vector<int> sample_mask_set(std::size_t h_prime, double alpha, std::mt19937_64& rng) {
  bool clamped = false;
  const std::size_t size = mask_size(h_prime, alpha, &clamped);
  if (clamped) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::cerr << "warning: mask size round(" << alpha << " * " << h_prime << ") clamped to " << size << "\n";
  }
  // Partial Fisher-Yates: the first `size` slots are a uniform subset.
  std::vector<int> idx(h_prime);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, h_prime - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<char> mask_flags(const std::vector<std::vector<int>>& mask_sets, std::size_t h_prime) {
  std::vector<char> flags(mask_sets.size() * h_prime, 0);
  for (std::size_t b = 0; b < mask_sets.size(); ++b)
    for (int i : mask_sets[b]) {
      if (i < 0 || static_cast<std::size_t>(i) >= h_prime) throw InvalidArgument("mask index out of range");
      flags[b * h_prime + static_cast<std::size_t>(i)] = 1;
    }
  return flags;
}

}  // namespace mieeg::train
