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

#include "mieeg/core/trial.hpp"

namespace mieeg::spatial {

/// Euclidean-alignment reference for one subject (or subject-session).
struct AlignReference {
  Eigen::MatrixXd r_bar;       // mean trial covariance plus ridge
  Eigen::MatrixXd r_inv_sqrt;  // symmetric inverse square root of r_bar
  std::size_t n = 0;           // trials the reference was fitted on
  double epsilon = 0.0;        // ridge actually added to the diagonal

  Eigen::Index dim() const { return r_bar.rows(); }
};

/// Ridge scale: epsilon = kRidgeScale * trace / C.
inline constexpr double kRidgeScale = 1e-8;
/// Eigenvalues below kEigenFloor * lambda_max are clamped before inversion.
inline constexpr double kEigenFloor = 1e-12;

/// Symmetric inverse square root by eigendecomposition with an eigenvalue floor.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& spd, double floor_ratio = kEigenFloor);

/// R = (1/n) sum X X^T + epsilon I. Trials may differ in length but not channel count.
AlignReference ea_reference(const std::vector<Trial>& trials);
AlignReference ea_reference(const std::vector<Eigen::MatrixXd>& trials);

/// X~ = R^{-1/2} X'.
Trial ea_whiten(const Trial& trial, const AlignReference& ref);
Eigen::MatrixXd ea_whiten(const Eigen::MatrixXd& x, const AlignReference& ref);

/// (1/n) sum X X^T without ridge.
Eigen::MatrixXd mean_covariance(const std::vector<Trial>& trials);

std::string to_json(const AlignReference& ref);
AlignReference align_reference_from_json(const std::string& text);

}  // namespace mieeg::spatial
