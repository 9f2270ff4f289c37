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

#include "mieeg/core/montage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "mieeg/error.hpp"

namespace mieeg {
namespace {

using Eigen::Vector3d;

constexpr double kDeg = std::numbers::pi / 180.0;

// Midline point of row `row` (+4 = Fpz, 0 = Cz, -4 = Oz): 22.5 degree steps from the vertex.
Vector3d midline_point(int row) {
  const double polar = row * 22.5 * kDeg;
  return {0.0, std::sin(polar), std::cos(polar)};
}

// Left end of row `row` on the Fpz-T7-Oz circumference: 18 degree steps from T7.
Vector3d left_end(int row) {
  const double from_front = (90.0 - row * 18.0) * kDeg;
  return {-std::sin(from_front), std::cos(from_front), 0.0};
}

// Point `col`/4 of the way from the row's midline point to its left end,
// measured along the circle through (left end, midline point, right end).
Vector3d row_point(int row, int col) {
  const Vector3d left = left_end(row);
  const Vector3d mid = midline_point(row);
  const Vector3d chord_mid(0.0, left.y(), left.z());
  const Vector3d up = mid - chord_mid;
  const double h = up.norm();
  const double a = -left.x();
  const Vector3d u(1.0, 0.0, 0.0);
  const Vector3d v = up / h;
  const double k = (h * h - a * a) / (2.0 * h);  // circle centre along v
  const double radius = h - k;
  const double end_angle = std::numbers::pi + std::atan2(k, a);  // left end sits at (-a, -k) from the centre
  const double start_angle = std::numbers::pi / 2.0;
  const double angle = start_angle + (end_angle - start_angle) * col / 4.0;
  Vector3d p = chord_mid + k * v + radius * (std::cos(angle) * u + std::sin(angle) * v);
  return p.normalized();
}

Eigen::Vector2d project(const Vector3d& p) {
  const double polar = std::acos(std::clamp(p.z(), -1.0, 1.0));
  const double r = polar / (std::numbers::pi / 2.0);
  const double planar = std::hypot(p.x(), p.y());
  if (planar < 1e-15) return Eigen::Vector2d::Zero();
  return {r * p.x() / planar, r * p.y() / planar};
}

struct RowSpec {
  const char* prefix;
  int row;
  const char* edge_prefix;  // name prefix used at column 4 (FT7, TP7, T7, ...)
  std::vector<int> cols;    // columns present on each side, 0 = midline
};

Montage build_standard() {
  Montage m;
  const std::vector<RowSpec> rows = {
      {"Fp", 4, "Fp", {0, 4}},        {"AF", 3, "AF", {0, 2, 4}},         {"F", 2, "F", {0, 1, 2, 3, 4}},
      {"FC", 1, "FT", {0, 1, 2, 3, 4}}, {"C", 0, "T", {0, 1, 2, 3, 4}},   {"CP", -1, "TP", {0, 1, 2, 3, 4}},
      {"P", -2, "P", {0, 1, 2, 3, 4}},  {"PO", -3, "PO", {0, 2, 4}},      {"O", -4, "O", {0, 4}},
  };
  for (const auto& spec : rows) {
    for (int col : spec.cols) {
      const Eigen::Vector2d left = project(row_point(spec.row, col));
      if (col == 0) {
        m.add(std::string(spec.prefix) + "z", left);
        continue;
      }
      const bool edge = col == 4;
      std::string stem = edge ? spec.edge_prefix : spec.prefix;
      int left_num = 2 * col - 1;
      // Fp1/Fp2 and O1/O2 are the only members of their rows besides the midline.
      if (spec.row == 4 || spec.row == -4) left_num = 1;
      m.add(stem + std::to_string(left_num), left);
      m.add(stem + std::to_string(left_num + 1), Eigen::Vector2d(-left.x(), left.y()));
    }
  }
  m.add("T3", m.position("T7"));
  m.add("T4", m.position("T8"));
  m.add("T5", m.position("P7"));
  m.add("T6", m.position("P8"));
  return m;
}

}  // namespace

std::string normalize_electrode(std::string_view name) {
  std::string s;
  s.reserve(name.size());
  for (char ch : name)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return s;
}

const Montage& Montage::standard_1010() {
  static const Montage m = build_standard();
  return m;
}

void Montage::add(std::string_view name, Eigen::Vector2d position) {
  const auto key = normalize_electrode(name);
  if (coords_.count(key)) throw InvalidArgument("duplicate electrode in montage: " + std::string(name));
  if (position.squaredNorm() > 1.2 * 1.2) throw InvalidArgument("electrode outside head disc: " + std::string(name));
  coords_.emplace(key, position);
  display_.emplace_back(name);
}

bool Montage::contains(std::string_view name) const { return coords_.count(normalize_electrode(name)) > 0; }

Eigen::Vector2d Montage::position(std::string_view name) const {
  auto it = coords_.find(normalize_electrode(name));
  if (it == coords_.end()) throw InvalidArgument("unknown electrode: " + std::string(name));
  return it->second;
}

std::vector<std::string> Montage::names() const { return display_; }

std::string Montage::mirror_name(std::string_view name) {
  std::string s(name);
  if (s.empty()) return s;
  std::size_t i = s.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
  if (i == s.size()) return s;  // midline: ends in z
  const int num = std::stoi(s.substr(i));
  const int mirrored = (num % 2 == 1) ? num + 1 : num - 1;
  return s.substr(0, i) + std::to_string(mirrored);
}

}  // namespace mieeg

namespace mieeg {

const std::vector<std::string>& template_electrodes() {
  static const std::vector<std::string> names = {"FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6", "C5",
                                                 "C3",  "C1",  "Cz",  "C2",  "C4",  "C6",  "CP5", "CP3",
                                                 "CP1", "CPz", "CP2", "CP4", "CP6", "T7",  "T8"};
  return names;
}

}  // namespace mieeg
