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

#include "mieeg/core/split.hpp"

#include <cmath>

#include "mieeg/error.hpp"

namespace mieeg {

std::size_t calibration_count(std::size_t n, double fraction) {
  if (n < 2) throw InvalidArgument("need at least 2 trials to split, got " + std::to_string(n));
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("calibration fraction must lie in (0, 1)");
  // Guard against 0.3 * 100 = 30.000000000000004 style round-up.
  const double raw = fraction * static_cast<double>(n);
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  if (k == 0 || k >= n) throw InvalidArgument("calibration fraction leaves one side empty");
  return k;
}

CalibrationSplit split_calibration(const std::vector<Trial>& trials, double fraction) {
  const std::size_t k = calibration_count(trials.size(), fraction);
  CalibrationSplit out;
  out.calibration.assign(trials.begin(), trials.begin() + static_cast<std::ptrdiff_t>(k));
  out.test.assign(trials.begin() + static_cast<std::ptrdiff_t>(k), trials.end());
  return out;
}

}  // namespace mieeg
