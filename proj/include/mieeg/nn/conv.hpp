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

#include <memory>
#include <vector>

#include "mieeg/nn/tape.hpp"
#include "mieeg/tokenizer/tokenizer.hpp"

namespace mieeg::nn {

/// Differentiable temporal + spatial convolution of a batch of constant trials
/// (each C x T, equal T): returns (B*W) x F, the stacked S matrices of
/// tokenizer::spatial_compress(tokenizer::temporal_embed(...)).
///
/// Both stages are linear, so the spatial filter is applied first
/// (F x C times C x T) and the temporal kernel second; the temporal bias
/// enters as bias(f) * sum_c spatial(f, c).
template <typename S>
Var<S> temporal_spatial_conv(Tape<S>& tape, const std::vector<Matrix<S>>& trials, const Var<S>& kernels,
                             const Var<S>& temporal_bias, const Var<S>& spatial, const Var<S>& spatial_bias, int stride) {
  if (trials.empty()) throw InvalidArgument("empty batch");
  const Eigen::Index c = trials.front().rows(), t = trials.front().cols();
  const Eigen::Index f = kernels.rows(), k = kernels.cols();
  if (spatial.rows() != f || spatial.cols() != c) throw InvalidArgument("spatial filter shape mismatch");
  if (t < k) throw InvalidArgument("trial shorter than the temporal kernel");
  const Eigen::Index width = tokenizer::conv_output_length(t, stride);
  const Eigen::Index pad = tokenizer::same_padding_left(t, static_cast<int>(k), stride);
  const Eigen::Index padded = std::max<Eigen::Index>((width - 1) * stride + k, pad + t);
  const Eigen::Index n = static_cast<Eigen::Index>(trials.size());

  const Matrix<S>& kv = kernels.value();
  const Matrix<S>& ws = spatial.value();
  const Eigen::Matrix<S, Eigen::Dynamic, 1> ws_rowsum = ws.rowwise().sum();
  const Eigen::Matrix<S, Eigen::Dynamic, 1> bias_total =
      temporal_bias.value().reshaped().cwiseProduct(ws_rowsum) + spatial_bias.value().reshaped();

  auto mixed = std::make_shared<std::vector<Matrix<S>>>();  // per trial F x padded
  mixed->reserve(trials.size());
  Matrix<S> out(n * width, f);
  for (Eigen::Index b = 0; b < n; ++b) {
    const Matrix<S>& x = trials[static_cast<std::size_t>(b)];
    if (x.rows() != c || x.cols() != t) throw InvalidArgument("batch trials must share one shape");
    Matrix<S> y = Matrix<S>::Zero(f, padded);
    y.middleCols(pad, t).noalias() = ws * x;
    for (Eigen::Index m = 0; m < f; ++m)
      for (Eigen::Index w = 0; w < width; ++w)
        out(b * width + w, m) = kv.row(m).dot(y.row(m).segment(w * stride, k)) + bias_total(m);
    mixed->push_back(std::move(y));
  }

  auto inputs = std::make_shared<std::vector<Matrix<S>>>(trials);
  return tape.op(std::move(out), {kernels, temporal_bias, spatial, spatial_bias},
                 [=](Tape<S>& tp, int self) {
                   const Matrix<S>& g = tp.grad(self);
                   const Matrix<S>& kv2 = tp.value(kernels.id());
                   const Matrix<S>& ws2 = tp.value(spatial.id());
                   const Eigen::Matrix<S, Eigen::Dynamic, 1> rowsum = ws2.rowwise().sum();
                   const Eigen::Matrix<S, Eigen::Dynamic, 1> gsum = g.colwise().sum().transpose();
                   if (tp.requires_grad(spatial_bias.id())) tp.grad(spatial_bias.id()).reshaped() += gsum;
                   if (tp.requires_grad(temporal_bias.id()))
                     tp.grad(temporal_bias.id()).reshaped() += gsum.cwiseProduct(rowsum);
                   const bool gk = tp.requires_grad(kernels.id());
                   const bool gs = tp.requires_grad(spatial.id());
                   Matrix<S> time_grad(f, padded);
                   for (Eigen::Index b = 0; b < n; ++b) {
                     const Matrix<S>& y = (*mixed)[static_cast<std::size_t>(b)];
                     if (gs) time_grad.setZero();
                     for (Eigen::Index m = 0; m < f; ++m)
                       for (Eigen::Index w = 0; w < width; ++w) {
                         const S gw = g(b * width + w, m);
                         if (gk) tp.grad(kernels.id()).row(m) += gw * y.row(m).segment(w * stride, k);
                         if (gs) time_grad.row(m).segment(w * stride, k) += gw * kv2.row(m);
                       }
                     if (gs)
                       tp.grad(spatial.id()).noalias() +=
                           time_grad.middleCols(pad, t) * (*inputs)[static_cast<std::size_t>(b)].transpose();
                   }
                   if (gs) {
                     const Eigen::Matrix<S, Eigen::Dynamic, 1> tb = tp.value(temporal_bias.id()).reshaped();
                     tp.grad(spatial.id()).colwise() += gsum.cwiseProduct(tb);
                   }
                 });
}

}  // namespace mieeg::nn
