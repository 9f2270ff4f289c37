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

#include <Eigen/Core>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mieeg {

/// Electrode name -> 2-D scalp position (azimuthal-equidistant projection, unit
/// head radius: Cz at the origin, the Fpz-T7-Oz-T8 circumference on r = 1,
/// +x toward the right ear, +y toward the nose). Lookup is case-insensitive.
class Montage {
 public:
  Montage() = default;

  /// Idealized spherical 10-10 layout (rows Fp..O, columns 7..8) plus the
  /// legacy 10-20 aliases T3/T4/T5/T6.
  static const Montage& standard_1010();

  void add(std::string_view name, Eigen::Vector2d position);
  bool contains(std::string_view name) const;
  Eigen::Vector2d position(std::string_view name) const;  // throws InvalidArgument on unknown names
  std::vector<std::string> names() const;                 // display spellings, insertion order
  std::size_t size() const { return coords_.size(); }

  /// Name of the electrode mirrored across the midline (C3 <-> C4, Cz -> Cz).
  static std::string mirror_name(std::string_view name);

 private:
  std::map<std::string, Eigen::Vector2d> coords_;  // key: upper-cased name
  std::vector<std::string> display_;
};

std::string normalize_electrode(std::string_view name);

}  // namespace mieeg

namespace mieeg {

/// The 23 sensorimotor electrodes of the canonical channel template
/// (FC, C, CP rows plus T7/T8), in template order.
const std::vector<std::string>& template_electrodes();

}  // namespace mieeg
