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

// Differentiable operations over Tape nodes. Row-major semantics throughout:
// a batch of B sequences of L tokens is a (B*L) x D matrix, sequence b
// occupying rows [b*L, (b+1)*L).

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "mieeg/nn/tape.hpp"

namespace mieeg::nn {

template <typename S>
Var<S> operator+(const Var<S>& a, const Var<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("add: shape mismatch");
  return a.tape().op(a.value() + b.value(), {a, b}, [a, b](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    if (t.requires_grad(a.id())) t.grad(a.id()) += g;
    if (t.requires_grad(b.id())) t.grad(b.id()) += g;
  });
}

template <typename S>
Var<S> scale(const Var<S>& a, S factor) {
  return a.tape().op(a.value() * factor, {a}, [a, factor](Tape<S>& t, int self) { t.grad(a.id()) += factor * t.grad(self); });
}

/// Gradient-blocking copy.
template <typename S>
Var<S> stop_gradient(const Var<S>& a) {
  return a.tape().constant(a.value());
}

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimensions differ");
  Matrix<S> out = a.value() * b.value();
  return a.tape().op(std::move(out), {a, b}, [a, b](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    if (t.requires_grad(a.id())) t.grad(a.id()).noalias() += g * t.value(b.id()).transpose();
    if (t.requires_grad(b.id())) t.grad(b.id()).noalias() += t.value(a.id()).transpose() * g;
  });
}

/// x W + 1 b with W: in x out and b: 1 x out.
template <typename S>
Var<S> linear(const Var<S>& x, const Var<S>& w, const Var<S>& b) {
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) throw InvalidArgument("linear: shape mismatch");
  Matrix<S> out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return x.tape().op(std::move(out), {x, w, b}, [x, w, b](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    if (t.requires_grad(x.id())) t.grad(x.id()).noalias() += g * t.value(w.id()).transpose();
    if (t.requires_grad(w.id())) t.grad(w.id()).noalias() += t.value(x.id()).transpose() * g;
    if (t.requires_grad(b.id())) t.grad(b.id()) += g.colwise().sum();
  });
}

/// Stacks matrices with equal column counts.
template <typename S>
Var<S> vstack(const std::vector<Var<S>>& parts) {
  if (parts.empty()) throw InvalidArgument("vstack: nothing to stack");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw InvalidArgument("vstack: column mismatch");
    rows += p.rows();
  }
  Matrix<S> out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return parts.front().tape().op(std::move(out), parts, [parts](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    Eigen::Index r0 = 0;
    for (const auto& p : parts) {
      if (t.requires_grad(p.id())) t.grad(p.id()) += g.middleRows(r0, p.rows());
      r0 += p.rows();
    }
  });
}

/// Adds rows [0, block) of `table` to every block of `block` rows of x.
template <typename S>
Var<S> add_tiled(const Var<S>& x, const Var<S>& table, Eigen::Index block) {
  if (block < 1 || x.rows() % block != 0 || table.rows() < block || table.cols() != x.cols())
    throw InvalidArgument("add_tiled: shape mismatch");
  Matrix<S> out = x.value();
  const Eigen::Index n_blocks = x.rows() / block;
  for (Eigen::Index b = 0; b < n_blocks; ++b) out.middleRows(b * block, block) += table.value().topRows(block);
  return x.tape().op(std::move(out), {x, table}, [x, table, block, n_blocks](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    if (t.requires_grad(x.id())) t.grad(x.id()) += g;
    if (t.requires_grad(table.id())) {
      auto& gt = t.grad(table.id());
      for (Eigen::Index b = 0; b < n_blocks; ++b) gt.topRows(block) += g.middleRows(b * block, block);
    }
  });
}

/// Replaces rows flagged in `masked` by the 1 x D embedding.
template <typename S>
Var<S> mask_rows(const Var<S>& x, const Var<S>& embedding, const std::vector<char>& masked) {
  if (static_cast<Eigen::Index>(masked.size()) != x.rows() || embedding.rows() != 1 || embedding.cols() != x.cols())
    throw InvalidArgument("mask_rows: shape mismatch");
  Matrix<S> out = x.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    if (masked[static_cast<std::size_t>(r)]) out.row(r) = embedding.value().row(0);
  return x.tape().op(std::move(out), {x, embedding}, [x, embedding, masked](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    const bool gx = t.requires_grad(x.id());
    const bool ge = t.requires_grad(embedding.id());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      if (masked[static_cast<std::size_t>(r)]) {
        if (ge) t.grad(embedding.id()).row(0) += g.row(r);
      } else if (gx) {
        t.grad(x.id()).row(r) += g.row(r);
      }
    }
  });
}

/// Row-wise layer normalization with gain gamma and shift beta (both 1 x D).
template <typename S>
Var<S> layer_norm(const Var<S>& x, const Var<S>& gamma, const Var<S>& beta, S eps = S(1e-5)) {
  const Matrix<S>& xv = x.value();
  const Eigen::Index d = xv.cols();
  auto xhat = std::make_shared<Matrix<S>>(xv.rows(), d);
  auto inv_sd = std::make_shared<Eigen::Matrix<S, Eigen::Dynamic, 1>>(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const S mean = xv.row(r).mean();
    const S var = (xv.row(r).array() - mean).square().mean();
    (*inv_sd)(r) = S(1) / std::sqrt(var + eps);
    xhat->row(r) = (xv.row(r).array() - mean) * (*inv_sd)(r);
  }
  Matrix<S> out = (xhat->array().rowwise() * gamma.value().row(0).array()).matrix();
  out.rowwise() += beta.value().row(0);
  return x.tape().op(std::move(out), {x, gamma, beta}, [x, gamma, beta, xhat, inv_sd, d](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    if (t.requires_grad(gamma.id())) t.grad(gamma.id()) += (g.array() * xhat->array()).colwise().sum().matrix();
    if (t.requires_grad(beta.id())) t.grad(beta.id()) += g.colwise().sum();
    if (t.requires_grad(x.id())) {
      const Matrix<S> dxhat = (g.array().rowwise() * t.value(gamma.id()).row(0).array()).matrix();
      auto& gx = t.grad(x.id());
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        const S m1 = dxhat.row(r).mean();
        const S m2 = (dxhat.row(r).array() * xhat->row(r).array()).mean();
        gx.row(r).array() += (*inv_sd)(r) * (dxhat.row(r).array() - m1 - xhat->row(r).array() * m2);
      }
      (void)d;
    }
  });
}

/// GELU, tanh approximation.
template <typename S>
Var<S> gelu(const Var<S>& x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  const Matrix<S>& xv = x.value();
  auto th = std::make_shared<Matrix<S>>(
      ((xv.array() + S(kA) * xv.array().cube()) * S(kC)).tanh().matrix());
  Matrix<S> out = (S(0.5) * xv.array() * (S(1) + th->array())).matrix();
  return x.tape().op(std::move(out), {x}, [x, th](Tape<S>& t, int self) {
    const auto& xv2 = t.value(x.id()).array();
    const auto& tv = th->array();
    const Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> deriv = S(0.5) * (S(1) + tv) + S(0.5) * xv2 * (S(1) - tv.square()) * S(kC) * (S(1) + S(3 * kA) * xv2.square());
    t.grad(x.id()).array() += t.grad(self).array() * deriv;
  });
}

/// Inverted dropout: kept entries are scaled by 1/(1-p). Identity when not training or p == 0.
template <typename S, typename Rng>
Var<S> dropout(const Var<S>& x, double p, bool training, Rng& rng) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) throw InvalidArgument("dropout probability must be < 1");
  const S keep_scale = S(1.0 / (1.0 - p));
  auto mask = std::make_shared<Matrix<S>>(x.rows(), x.cols());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index c = 0; c < mask->cols(); ++c)
    for (Eigen::Index r = 0; r < mask->rows(); ++r) (*mask)(r, c) = u(rng) < p ? S(0) : keep_scale;
  Matrix<S> out = x.value().cwiseProduct(*mask);
  return x.tape().op(std::move(out), {x}, [x, mask](Tape<S>& t, int self) {
    t.grad(x.id()) += t.grad(self).cwiseProduct(*mask);
  });
}

/// Multi-head scaled dot-product self-attention over blocks of `block` rows.
/// q, k, v: (B*block) x D, D divisible by heads. Returns the concatenated heads.
template <typename S>
Var<S> attention(const Var<S>& q, const Var<S>& k, const Var<S>& v, int heads, Eigen::Index block) {
  const Eigen::Index n = q.rows(), d = q.cols();
  if (heads < 1 || d % heads != 0) throw InvalidArgument("attention: D must be divisible by heads");
  if (block < 1 || n % block != 0 || k.rows() != n || v.rows() != n || k.cols() != d || v.cols() != d)
    throw InvalidArgument("attention: shape mismatch");
  const Eigen::Index dh = d / heads;
  const Eigen::Index n_blocks = n / block;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  auto probs = std::make_shared<std::vector<Matrix<S>>>();
  probs->reserve(static_cast<std::size_t>(n_blocks * heads));
  Matrix<S> out(n, d);
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = q.value().block(b * block, h * dh, block, dh);
      const auto kb = k.value().block(b * block, h * dh, block, dh);
      const auto vb = v.value().block(b * block, h * dh, block, dh);
      Matrix<S> p = (qb * kb.transpose()) * scale;
      for (Eigen::Index r = 0; r < block; ++r) {
        const S m = p.row(r).maxCoeff();
        p.row(r) = (p.row(r).array() - m).exp().matrix();
        p.row(r) /= p.row(r).sum();
      }
      out.block(b * block, h * dh, block, dh).noalias() = p * vb;
      probs->push_back(std::move(p));
    }
  }
  if (q.tape().record_attention)
    for (const auto& p : *probs) q.tape().attention_maps.push_back(p);
  return q.tape().op(std::move(out), {q, k, v}, [q, k, v, heads, block, dh, n_blocks, scale, probs](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    const bool gq = t.requires_grad(q.id()), gk = t.requires_grad(k.id()), gv = t.requires_grad(v.id());
    for (Eigen::Index b = 0; b < n_blocks; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Matrix<S>& p = (*probs)[static_cast<std::size_t>(b * heads + h)];
        const auto go = g.block(b * block, h * dh, block, dh);
        const auto qb = t.value(q.id()).block(b * block, h * dh, block, dh);
        const auto kb = t.value(k.id()).block(b * block, h * dh, block, dh);
        const auto vb = t.value(v.id()).block(b * block, h * dh, block, dh);
        if (gv) t.grad(v.id()).block(b * block, h * dh, block, dh).noalias() += p.transpose() * go;
        if (!gq && !gk) continue;
        const Matrix<S> dp = go * vb.transpose();
        const Eigen::Matrix<S, Eigen::Dynamic, 1> row_dot = (dp.array() * p.array()).rowwise().sum();
        const Matrix<S> ds = (p.array() * (dp.array().colwise() - row_dot.array())).matrix() * scale;
        if (gq) t.grad(q.id()).block(b * block, h * dh, block, dh).noalias() += ds * kb;
        if (gk) t.grad(k.id()).block(b * block, h * dh, block, dh).noalias() += ds.transpose() * qb;
      }
    }
  });
}

/// Mean over each block of `block` rows: (B*block) x D -> B x D.
template <typename S>
Var<S> mean_pool(const Var<S>& x, Eigen::Index block) {
  if (block < 1 || x.rows() % block != 0) throw InvalidArgument("mean_pool: empty or ragged sequence");
  const Eigen::Index n_blocks = x.rows() / block;
  Matrix<S> out(n_blocks, x.cols());
  for (Eigen::Index b = 0; b < n_blocks; ++b) out.row(b) = x.value().middleRows(b * block, block).colwise().mean();
  return x.tape().op(std::move(out), {x}, [x, block, n_blocks](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    auto& gx = t.grad(x.id());
    const S inv = S(1) / static_cast<S>(block);
    for (Eigen::Index b = 0; b < n_blocks; ++b) gx.middleRows(b * block, block).rowwise() += g.row(b) * inv;
  });
}

/// Non-overlapping average pooling of each block of `block` rows with window `pool`;
/// trailing rows that do not fill a window are dropped. (B*block) x F -> (B*floor(block/pool)) x F.
template <typename S>
Var<S> avg_pool_rows(const Var<S>& x, Eigen::Index block, Eigen::Index pool) {
  if (pool < 1 || block < pool || x.rows() % block != 0) throw InvalidArgument("avg_pool_rows: window larger than input");
  const Eigen::Index n_blocks = x.rows() / block;
  const Eigen::Index out_len = block / pool;
  Matrix<S> out(n_blocks * out_len, x.cols());
  for (Eigen::Index b = 0; b < n_blocks; ++b)
    for (Eigen::Index i = 0; i < out_len; ++i)
      out.row(b * out_len + i) = x.value().middleRows(b * block + i * pool, pool).colwise().mean();
  return x.tape().op(std::move(out), {x}, [x, block, pool, n_blocks, out_len](Tape<S>& t, int self) {
    const Matrix<S>& g = t.grad(self);
    auto& gx = t.grad(x.id());
    const S inv = S(1) / static_cast<S>(pool);
    for (Eigen::Index b = 0; b < n_blocks; ++b)
      for (Eigen::Index i = 0; i < out_len; ++i)
        gx.middleRows(b * block + i * pool, pool).rowwise() += g.row(b * out_len + i) * inv;
  });
}

/// Mean over rows of -log softmax(logits)_label, max-subtracted. Returns 1 x 1.
template <typename S>
Var<S> softmax_cross_entropy(const Var<S>& logits, const std::vector<int>& labels) {
  const Matrix<S>& z = logits.value();
  if (static_cast<Eigen::Index>(labels.size()) != z.rows()) throw InvalidArgument("cross entropy: label count mismatch");
  auto probs = std::make_shared<Matrix<S>>(z.rows(), z.cols());
  S total = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= z.cols()) throw InvalidArgument("cross entropy: label outside logits");
    const S m = z.row(r).maxCoeff();
    const auto e = (z.row(r).array() - m).exp();
    const S sum = e.sum();
    probs->row(r) = e / sum;
    total += -(z(r, y) - m - std::log(sum));
  }
  const S n = static_cast<S>(z.rows());
  Matrix<S> out(1, 1);
  out(0, 0) = total / n;
  return logits.tape().op(std::move(out), {logits}, [logits, labels, probs, n](Tape<S>& t, int self) {
    const S g = t.grad(self)(0, 0);
    Matrix<S> d = *probs;
    for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, labels[static_cast<std::size_t>(r)]) -= S(1);
    t.grad(logits.id()) += d * (g / n);
  });
}

/// Mean over the B sequences of (1/|M_b|) sum_{i in M_b} ||pred_i - target_i||^2,
/// sequence b contributing 0 when M_b is empty. `mask_sets[b]` holds local row indices.
template <typename S>
Var<S> masked_reconstruction(const Var<S>& pred, const Var<S>& target, Eigen::Index block,
                             const std::vector<std::vector<int>>& mask_sets) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw InvalidArgument("reconstruction: shape mismatch");
  if (block < 1 || pred.rows() != block * static_cast<Eigen::Index>(mask_sets.size()))
    throw InvalidArgument("reconstruction: mask sets do not match the batch");
  const Matrix<S> diff = pred.value() - target.value();
  S total = 0;
  for (std::size_t b = 0; b < mask_sets.size(); ++b) {
    if (mask_sets[b].empty()) continue;
    S acc = 0;
    for (int i : mask_sets[b]) {
      if (i < 0 || i >= block) throw InvalidArgument("reconstruction: mask index out of range");
      acc += diff.row(static_cast<Eigen::Index>(b) * block + i).squaredNorm();
    }
    total += acc / static_cast<S>(mask_sets[b].size());
  }
  const S n = static_cast<S>(mask_sets.size());
  Matrix<S> out(1, 1);
  out(0, 0) = total / n;
  auto shared_diff = std::make_shared<Matrix<S>>(diff);
  return pred.tape().op(std::move(out), {pred, target}, [pred, target, block, mask_sets, n, shared_diff](Tape<S>& t, int self) {
    const S g = t.grad(self)(0, 0);
    const bool gp = t.requires_grad(pred.id()), gt = t.requires_grad(target.id());
    for (std::size_t b = 0; b < mask_sets.size(); ++b) {
      if (mask_sets[b].empty()) continue;
      const S coeff = S(2) * g / (n * static_cast<S>(mask_sets[b].size()));
      for (int i : mask_sets[b]) {
        const Eigen::Index r = static_cast<Eigen::Index>(b) * block + i;
        if (gp) t.grad(pred.id()).row(r) += coeff * shared_diff->row(r);
        if (gt) t.grad(target.id()).row(r) -= coeff * shared_diff->row(r);
      }
    }
  });
}

}  // namespace mieeg::nn
