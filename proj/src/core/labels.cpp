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

#include "mieeg/core/labels.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mieeg/error.hpp"

namespace mieeg {

std::string canonical_label(std::string_view raw) {
  std::string s;
  for (char ch : raw) {
    if (ch == ' ' || ch == '-') ch = '_';
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "both_feet" || s == "foot") return "feet";
  if (s == "left") return "left_hand";
  if (s == "right") return "right_hand";
  return s;
}

LabelVocab::LabelVocab(std::vector<std::string> names) {
  std::set<std::string> seen;
  for (auto& n : names) {
    n = canonical_label(n);
    if (!seen.insert(n).second) throw InvalidArgument("duplicate label in vocabulary: " + n);
  }
  names_ = std::move(names);
}

LabelVocab LabelVocab::unified() { return LabelVocab({"left_hand", "right_hand", "feet", "tongue", "rest"}); }

bool LabelVocab::contains(std::string_view name) const {
  const auto c = canonical_label(name);
  return std::find(names_.begin(), names_.end(), c) != names_.end();
}

int LabelVocab::id_of(std::string_view name) const {
  const auto c = canonical_label(name);
  auto it = std::find(names_.begin(), names_.end(), c);
  if (it == names_.end()) throw InvalidArgument("label not in vocabulary: " + c);
  return static_cast<int>(it - names_.begin());
}

const std::string& LabelVocab::name_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
    throw InvalidArgument("label id out of range: " + std::to_string(id));
  return names_[static_cast<std::size_t>(id)];
}

std::vector<int> LabelVocab::map_into(const LabelVocab& target) const {
  std::vector<int> out;
  out.reserve(names_.size());
  for (const auto& n : names_) out.push_back(target.id_of(n));
  return out;
}

}  // namespace mieeg
