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

#include <string>
#include <string_view>
#include <vector>

namespace mieeg {

/// Ordered list of class names; class id == index.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(std::vector<std::string> names);

  /// The union vocabulary shared by every dataset: left_hand, right_hand, feet, tongue, rest.
  static LabelVocab unified();

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  int id_of(std::string_view name) const;  // throws InvalidArgument when absent
  bool contains(std::string_view name) const;
  const std::string& name_of(int id) const;

  /// Injective map from this vocabulary's ids into `target`'s ids.
  std::vector<int> map_into(const LabelVocab& target) const;

 private:
  std::vector<std::string> names_;
};

/// Canonical spelling for dataset-specific class names ("both feet" -> "feet", "Left Hand" -> "left_hand").
std::string canonical_label(std::string_view raw);

}  // namespace mieeg
