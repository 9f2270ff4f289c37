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

// Reference (tape-free) forms of the pretraining objective. The training path
// uses the differentiable ops in ops.hpp; these are what the tests pin.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mieeg/error.hpp"

namespace mieeg::nn {

/// (1/|M|) sum_{i in M} ||z_hat_i - z_i||^2 over rows; 0 for an empty mask set.
template <typename Derived>
typename Derived::Scalar rec_loss(const Eigen::MatrixBase<Derived>& z_hat, const Eigen::MatrixBase<Derived>& z,
                                  const std::vector<int>& mask_set) {
  using S = typename Derived::Scalar;
  if (z_hat.rows() != z.rows() || z_hat.cols() != z.cols()) throw InvalidArgument("rec_loss: shape mismatch");
  if (mask_set.empty()) return S(0);
  S acc = 0;
  for (int i : mask_set) {
    if (i < 0 || i >= z.rows()) throw InvalidArgument("rec_loss: mask index out of range");
    acc += (z_hat.row(i) - z.row(i)).squaredNorm();
  }
  return acc / static_cast<S>(mask_set.size());
}

/// -log softmax(s)_y, computed with max subtraction.
template <typename Derived>
typename Derived::Scalar ce_loss(const Eigen::MatrixBase<Derived>& logits, int y) {
  using S = typename Derived::Scalar;
  if (y < 0 || y >= logits.size()) throw InvalidArgument("ce_loss: label outside logits");
  const S m = logits.maxCoeff();
  S sum = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += std::exp(logits(i) - m);
  return -(logits(y) - m - std::log(sum));
}

template <typename S>
S joint_loss(S rec, S cls) {
  return rec + cls;
}

/// v = (1/H') sum_i c_i over the rows of c.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 1, Eigen::Dynamic> pool_tokens(const Eigen::MatrixBase<Derived>& c) {
  if (c.rows() < 1) throw InvalidArgument("pool_tokens: empty sequence");
  return c.colwise().mean();
}

/// Copy of `tokens` with rows in `mask_set` replaced by `embedding`.
template <typename Derived, typename Row>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> mask_apply(const Eigen::MatrixBase<Derived>& tokens,
                                                                                  const std::vector<int>& mask_set,
                                                                                  const Eigen::MatrixBase<Row>& embedding) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out = tokens;
  for (int i : mask_set) {
    if (i < 0 || i >= tokens.rows()) throw InvalidArgument("mask_apply: index out of range");
    out.row(i) = embedding;
  }
  return out;
}

}  // namespace mieeg::nn
