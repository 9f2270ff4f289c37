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
#include <string>
#include <vector>

#include "mieeg/core/montage.hpp"
#include "mieeg/core/trial.hpp"

namespace mieeg::spatial {

/// Canonical electrode set every dataset is interpolated onto.
struct TemplateSpec {
  std::vector<std::string> electrodes;
  Montage montage;

  /// The 23 sensorimotor electrodes on the built-in 10-10 montage.
  static TemplateSpec standard();
};

/// Rows: template electrodes. Columns: source channels. Rows are convex weights.
struct TemplateWeights {
  Eigen::MatrixXd matrix;
  std::vector<std::string> source_channels;
  std::vector<std::string> template_channels;
};

/// d(i, k) = || pos(template_i) - pos(source_k) ||_2 on the projected scalp.
Eigen::MatrixXd electrode_distances(const TemplateSpec& tmpl, const std::vector<std::string>& source_channels,
                                    const Montage& montage);

/// Inverse-distance weights. A row containing an exact zero distance is one-hot
/// at the first zero; otherwise w_ik = (1/d_ik) / sum_l (1/d_il). Infinite
/// distances get weight 0; a row with every distance infinite is an error.
Eigen::MatrixXd interp_weights(const Eigen::MatrixXd& distances);

/// Convenience: distances + weights with channel bookkeeping.
TemplateWeights template_weights(const TemplateSpec& tmpl, const std::vector<std::string>& source_channels,
                                 const Montage& montage);

/// X'(i, t) = sum_k W(i, k) X(k, t). Trial channels must match weights.source_channels exactly.
Trial apply_template(const Trial& trial, const TemplateWeights& weights);

}  // namespace mieeg::spatial
