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

#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace mieeg::train {

/// round(alpha * h_prime) clamped to [1, h_prime - 1]; `clamped` reports whether the clamp fired.
std::size_t mask_size(std::size_t h_prime, double alpha, bool* clamped = nullptr);

/// Uniform draw without replacement of mask_size(h_prime, alpha) token indices, ascending.
/// Warns once per process on stderr when the size had to be clamped.
std::vector<int> sample_mask_set(std::size_t h_prime, double alpha, std::mt19937_64& rng);

/// Per-row flags for a batch laid out as consecutive blocks of h_prime rows.
std::vector<char> mask_flags(const std::vector<std::vector<int>>& mask_sets, std::size_t h_prime);

}  // namespace mieeg::train
