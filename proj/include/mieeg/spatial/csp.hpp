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
#include <vector>

#include "mieeg/core/trial.hpp"

namespace mieeg::spatial {

/// Two-class common spatial patterns followed by Fisher LDA on log-variance features.
struct CspLdaModel {
  Eigen::MatrixXd filters;      // 2m x C, rows are spatial filters
  Eigen::VectorXd eigenvalues;  // generalized eigenvalue of each filter, descending
  Eigen::VectorXd lda_weights;  // over log-variance features
  double lda_bias = 0.0;

  Eigen::VectorXd features(const Eigen::MatrixXd& x) const;
  /// Positive -> second class.
  double decision(const Eigen::MatrixXd& x) const;
};

/// Solves Sigma_a w = lambda (Sigma_a + Sigma_b) w on trace-normalized class covariances
/// and keeps the m largest- and m smallest-eigenvalue filters. Throws when the composite
/// covariance stays singular after the ridge.
CspLdaModel csp_fit(const std::vector<Eigen::MatrixXd>& class_a, const std::vector<Eigen::MatrixXd>& class_b, int m = 3);
CspLdaModel csp_fit(const std::vector<Trial>& class_a, const std::vector<Trial>& class_b, int m = 3);

/// All generalized eigenvalues (ascending) of the CSP problem; exposed for diagnostics.
Eigen::VectorXd csp_eigenvalues(const Eigen::MatrixXd& sigma_a, const Eigen::MatrixXd& sigma_b);

/// Fisher discriminant: w = S_w^{-1} (mu_b - mu_a), bias at the midpoint.
void fit_lda(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b, Eigen::VectorXd& weights,
             double& bias);

/// CSP+LDA over any number of labelled classes: one model for two classes,
/// one-vs-rest with argmax of decision values otherwise.
class CspLdaClassifier {
 public:
  static CspLdaClassifier fit(const std::vector<Trial>& trials, int m = 3);
  int predict(const Eigen::MatrixXd& x) const;
  double accuracy(const std::vector<Trial>& trials) const;  // fraction in [0, 1]

 private:
  std::vector<int> classes_;
  std::vector<CspLdaModel> models_;
};

}  // namespace mieeg::spatial
