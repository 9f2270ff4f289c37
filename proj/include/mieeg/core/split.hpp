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

#include <vector>

#include "mieeg/core/trial.hpp"

namespace mieeg {

struct CalibrationSplit {
  std::vector<Trial> calibration;
  std::vector<Trial> test;
};

/// Chronological split: the first ceil(fraction * n) trials calibrate, the rest test.
/// Throws when n < 2, fraction is outside (0, 1), or either side would be empty.
CalibrationSplit split_calibration(const std::vector<Trial>& trials, double fraction);

/// Number of calibration trials split_calibration would produce.
std::size_t calibration_count(std::size_t n, double fraction);

}  // namespace mieeg
