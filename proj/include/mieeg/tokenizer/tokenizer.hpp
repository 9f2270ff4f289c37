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

// Temporal-spatial convolutional tokenizer.
//
//   X (C x T) --temporal conv, F kernels shared by every channel, stride s, "same" padding-->
//   U (C x F x W), W = ceil(T / s), stored as a W x (C*F) matrix (column c*F + f), i.e.
//   already rearranged to W x C x F --spatial conv spanning all C channels, per map-->
//   S (W x F) --average pool, window p, stride p--> (floor(W/p) x F) --1x1 conv F -> D-->
//   tokens (H' x D).

#include <Eigen/Dense>

#include "mieeg/core/trial.hpp"
#include "mieeg/error.hpp"

namespace mieeg::tokenizer {

struct TokenizerConfig {
  int kernel = 25;       // temporal kernel length (samples)
  int stride = 5;        // temporal stride
  int feature_maps = 8;  // temporal feature maps per channel
  int pool = 8;          // average-pool window along time
  int dim = 256;         // token dimension D

  void validate() const {
    if (kernel < 1 || stride < 1 || feature_maps < 1 || pool < 1 || dim < 1)
      throw InvalidArgument("tokenizer sizes must all be >= 1");
  }
};

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

/// All learnable tokenizer weights.
template <typename S>
struct TokenizerWeights {
  Mat<S> temporal_kernels;  // F x k
  Mat<S> temporal_bias;     // F x 1
  Mat<S> spatial;           // F x C
  Mat<S> spatial_bias;      // F x 1
  Mat<S> projection;        // F x D
  Mat<S> projection_bias;   // 1 x D
};

/// H' x D token matrix.
template <typename S>
struct TokenSequence {
  Mat<S> tokens;
  Eigen::Index h_prime() const { return tokens.rows(); }
};

inline Eigen::Index conv_output_length(Eigen::Index samples, int stride) { return (samples + stride - 1) / stride; }

/// Zero padding before the first sample for "same" convolution (TensorFlow convention:
/// the odd sample of padding goes to the end).
inline Eigen::Index same_padding_left(Eigen::Index samples, int kernel, int stride) {
  const Eigen::Index width = conv_output_length(samples, stride);
  const Eigen::Index total = std::max<Eigen::Index>(0, (width - 1) * stride + kernel - samples);
  return total / 2;
}

inline Eigen::Index token_count(Eigen::Index samples, const TokenizerConfig& cfg) {
  return conv_output_length(samples, cfg.stride) / cfg.pool;
}

/// U as a W x (C*F) matrix. Throws when T < k.
template <typename S>
Mat<S> temporal_embed(const Mat<S>& x, const Mat<S>& kernels, const Mat<S>& bias, int stride) {
  const Eigen::Index c = x.rows(), t = x.cols(), f = kernels.rows(), k = kernels.cols();
  if (t < k) throw InvalidArgument("trial shorter than the temporal kernel");
  if (bias.size() != f) throw InvalidArgument("temporal bias size mismatch");
  const Eigen::Index width = conv_output_length(t, stride);
  const Eigen::Index pad = same_padding_left(t, static_cast<int>(k), stride);
  Mat<S> u(width, c * f);
  for (Eigen::Index ch = 0; ch < c; ++ch)
    for (Eigen::Index m = 0; m < f; ++m)
      for (Eigen::Index w = 0; w < width; ++w) {
        S acc = bias(m);
        for (Eigen::Index j = 0; j < k; ++j) {
          const Eigen::Index src = w * stride + j - pad;
          if (src >= 0 && src < t) acc += kernels(m, j) * x(ch, src);
        }
        u(w, ch * f + m) = acc;
      }
  return u;
}

/// S(w, f) = sum_c spatial(f, c) U(w, c, f) + bias(f); W' = W.
template <typename S>
Mat<S> spatial_compress(const Mat<S>& u, const Mat<S>& spatial, const Mat<S>& bias) {
  const Eigen::Index f = spatial.rows(), c = spatial.cols();
  if (u.cols() != c * f || bias.size() != f) throw InvalidArgument("spatial_compress: shape mismatch");
  Mat<S> s(u.rows(), f);
  for (Eigen::Index w = 0; w < u.rows(); ++w)
    for (Eigen::Index m = 0; m < f; ++m) {
      S acc = bias(m);
      for (Eigen::Index ch = 0; ch < c; ++ch) acc += spatial(m, ch) * u(w, ch * f + m);
      s(w, m) = acc;
    }
  return s;
}

/// Non-overlapping temporal average pool then 1x1 projection F -> D. Throws when W' < p.
template <typename S>
TokenSequence<S> pool_project(const Mat<S>& s, int pool, const Mat<S>& projection, const Mat<S>& bias) {
  if (pool < 1 || s.rows() < pool) throw InvalidArgument("pool window larger than the feature sequence");
  if (projection.rows() != s.cols() || bias.cols() != projection.cols()) throw InvalidArgument("pool_project: shape mismatch");
  const Eigen::Index h = s.rows() / pool;
  Mat<S> pooled(h, s.cols());
  for (Eigen::Index i = 0; i < h; ++i) pooled.row(i) = s.middleRows(i * pool, pool).colwise().mean();
  TokenSequence<S> out;
  out.tokens = pooled * projection;
  out.tokens.rowwise() += bias.row(0);
  return out;
}

template <typename S>
TokenSequence<S> tokenize(const Mat<S>& x, const TokenizerWeights<S>& w, const TokenizerConfig& cfg) {
  cfg.validate();
  if (w.spatial.cols() != x.rows()) throw InvalidArgument("tokenize: channel count differs from spatial filter");
  const Mat<S> u = temporal_embed<S>(x, w.temporal_kernels, w.temporal_bias, cfg.stride);
  const Mat<S> s = spatial_compress<S>(u, w.spatial, w.spatial_bias);
  return pool_project<S>(s, cfg.pool, w.projection, w.projection_bias);
}

template <typename S>
TokenSequence<S> tokenize(const Trial& trial, const TokenizerWeights<S>& w, const TokenizerConfig& cfg) {
  return tokenize<S>(trial.data.cast<S>(), w, cfg);
}

}  // namespace mieeg::tokenizer
