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

#include "mieeg/spatial/template.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "mieeg/error.hpp"

namespace mieeg::spatial {

TemplateSpec TemplateSpec::standard() { return {template_electrodes(), Montage::standard_1010()}; }

Eigen::MatrixXd electrode_distances(const TemplateSpec& tmpl, const std::vector<std::string>& source_channels,
                                    const Montage& montage) {
  std::set<std::string> seen;
  for (const auto& e : tmpl.electrodes)
    if (!seen.insert(normalize_electrode(e)).second) throw InvalidArgument("duplicate template electrode: " + e);
  Eigen::MatrixXd d(static_cast<Eigen::Index>(tmpl.electrodes.size()), static_cast<Eigen::Index>(source_channels.size()));
  for (std::size_t i = 0; i < tmpl.electrodes.size(); ++i) {
    const Eigen::Vector2d ti = tmpl.montage.position(tmpl.electrodes[i]);
    for (std::size_t k = 0; k < source_channels.size(); ++k)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (ti - montage.position(source_channels[k])).norm();
  }
  return d;
}

Eigen::MatrixXd interp_weights(const Eigen::MatrixXd& distances) {
  if (distances.cols() == 0) throw InvalidArgument("no source channels");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(distances.rows(), distances.cols());
  for (Eigen::Index i = 0; i < distances.rows(); ++i) {
    Eigen::Index exact = -1;
    for (Eigen::Index k = 0; k < distances.cols(); ++k) {
      const double d = distances(i, k);
      if (std::isnan(d) || d < 0) throw InvalidArgument("distances must be finite and non-negative");
      if (d == 0.0 && exact < 0) exact = k;
    }
    if (exact >= 0) {
      w(i, exact) = 1.0;
      continue;
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < distances.cols(); ++k)
      if (std::isfinite(distances(i, k))) total += 1.0 / distances(i, k);
    if (total == 0.0) throw InvalidArgument("template row " + std::to_string(i) + " has all distances infinite");
    for (Eigen::Index k = 0; k < distances.cols(); ++k)
      if (std::isfinite(distances(i, k))) w(i, k) = (1.0 / distances(i, k)) / total;
  }
  return w;
}

TemplateWeights template_weights(const TemplateSpec& tmpl, const std::vector<std::string>& source_channels,
                                 const Montage& montage) {
  return {interp_weights(electrode_distances(tmpl, source_channels, montage)), source_channels, tmpl.electrodes};
}

Trial apply_template(const Trial& trial, const TemplateWeights& weights) {
  if (trial.channels != weights.source_channels)
    throw InvalidArgument("channel mismatch between trial and template weights");
  Trial out = trial.with_data(weights.matrix * trial.data);
  out.channels = weights.template_channels;
  return out;
}

}  // namespace mieeg::spatial
