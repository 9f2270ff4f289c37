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

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mieeg {

/// One EEG epoch: channels x samples.
struct Trial {
  Eigen::MatrixXd data;
  std::optional<int> label;
  double fs = 0.0;
  std::vector<std::string> channels;
  std::string subject_id;
  std::string session_id;

  Eigen::Index num_channels() const { return data.rows(); }
  Eigen::Index num_samples() const { return data.cols(); }

  /// Same metadata, new samples. Used by every transform that maps trial -> trial.
  Trial with_data(Eigen::MatrixXd new_data) const;
};

/// Throws InvalidArgument naming the first violated invariant.
void validate(const Trial& trial);

bool all_finite(const Eigen::MatrixXd& m);

}  // namespace mieeg
