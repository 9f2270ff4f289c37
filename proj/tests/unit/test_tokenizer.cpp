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

#include <doctest.h>

#include <random>

#include "mieeg/error.hpp"
#include "mieeg/tokenizer/tokenizer.hpp"
#include "oracles.hpp"

using namespace mieeg;
using namespace mieeg::tokenizer;
using M = Mat<double>;

namespace {

TokenizerWeights<double> random_weights(const TokenizerConfig& cfg, Eigen::Index channels, std::mt19937_64& rng,
                                        bool biases = true) {
  TokenizerWeights<double> w;
  w.temporal_kernels = oracle::random_matrix(cfg.feature_maps, cfg.kernel, rng);
  w.spatial = oracle::random_matrix(cfg.feature_maps, channels, rng);
  w.projection = oracle::random_matrix(cfg.feature_maps, cfg.dim, rng);
  w.temporal_bias = biases ? oracle::random_matrix(cfg.feature_maps, 1, rng) : M::Zero(cfg.feature_maps, 1);
  w.spatial_bias = biases ? oracle::random_matrix(cfg.feature_maps, 1, rng) : M::Zero(cfg.feature_maps, 1);
  w.projection_bias = biases ? oracle::random_matrix(1, cfg.dim, rng) : M::Zero(1, cfg.dim);
  return w;
}

// Direct "same"-padded strided correlation of one row, written independently of the library.
Eigen::VectorXd direct_conv(const Eigen::VectorXd& x, const Eigen::VectorXd& kernel, int stride) {
  const auto t = x.size(), k = kernel.size();
  const auto w = (t + stride - 1) / stride;
  const auto total = std::max<Eigen::Index>(0, (w - 1) * stride + k - t);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(t + total);
  padded.segment(total / 2, t) = x;
  Eigen::VectorXd out(w);
  for (Eigen::Index i = 0; i < w; ++i) out(i) = padded.segment(i * stride, k).dot(kernel);
  return out;
}

}  // namespace

TEST_CASE("shape contract for the default configuration") {
  const TokenizerConfig cfg;
  std::mt19937_64 rng(1);
  const auto w = random_weights(cfg, 23, rng);
  const M x = oracle::random_matrix(23, 1000, rng);
  const M u = temporal_embed<double>(x, w.temporal_kernels, w.temporal_bias, cfg.stride);
  CHECK(u.rows() == 200);
  CHECK(u.cols() == 23 * 8);
  const M s = spatial_compress<double>(u, w.spatial, w.spatial_bias);
  CHECK(s.rows() == 200);  // W' == W
  const auto tokens = tokenize<double>(x, w, cfg);
  CHECK(tokens.h_prime() == 25);
  CHECK(tokens.tokens.cols() == 256);
  CHECK(token_count(1000, cfg) == 25);
}

TEST_CASE("shape contract over random sizes") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> small(1, 9);
  for (int iter = 0; iter < 100; ++iter) {
    TokenizerConfig cfg{small(rng), small(rng), small(rng) % 3 + 1, small(rng), small(rng)};
    const Eigen::Index t = cfg.kernel + std::uniform_int_distribution<int>(0, 200)(rng);
    const Eigen::Index width = (t + cfg.stride - 1) / cfg.stride;
    if (width < cfg.pool) continue;
    const auto w = random_weights(cfg, 3, rng);
    const auto tokens = tokenize<double>(oracle::random_matrix(3, t, rng), w, cfg);
    CAPTURE(t);
    CHECK(tokens.h_prime() == width / cfg.pool);
    CHECK(tokens.tokens.cols() == cfg.dim);
    CHECK(tokens.tokens.allFinite());
  }
}

TEST_CASE("temporal embedding") {
  std::mt19937_64 rng(3);
  SUBCASE("matches a direct padded convolution") {
    const M x = oracle::random_matrix(4, 97, rng);
    const M kernels = oracle::random_matrix(3, 7, rng);
    const M u = temporal_embed<double>(x, kernels, M::Zero(3, 1), 4);
    for (Eigen::Index c = 0; c < 4; ++c)
      for (Eigen::Index f = 0; f < 3; ++f) {
        const Eigen::VectorXd expect = direct_conv(x.row(c).transpose(), kernels.row(f).transpose(), 4);
        CHECK((u.col(c * 3 + f) - expect).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
  SUBCASE("zero input and zero bias give zero output") {
    const M u = temporal_embed<double>(M::Zero(2, 50), oracle::random_matrix(2, 5, rng), M::Zero(2, 1), 2);
    CHECK(u.isZero(0.0));
  }
  SUBCASE("centred unit impulse with stride 1 reproduces the input") {
    M kernel = M::Zero(1, 25);
    kernel(0, 12) = 1.0;
    const M x = oracle::random_matrix(3, 60, rng);
    const M u = temporal_embed<double>(x, kernel, M::Zero(1, 1), 1);
    CHECK((u.transpose() - x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("trial shorter than the kernel") {
    CHECK_THROWS_AS(temporal_embed<double>(M::Zero(2, 10), M::Zero(1, 25), M::Zero(1, 1), 1), InvalidArgument);
  }
}

TEST_CASE("spatial compression") {
  std::mt19937_64 rng(4);
  const Eigen::Index c = 5, f = 3, w = 11;
  const M u = oracle::random_matrix(w, c * f, rng);
  SUBCASE("one-hot kernel selects a channel") {
    M spatial = M::Zero(f, c);
    spatial.col(2).setOnes();
    const M s = spatial_compress<double>(u, spatial, M::Zero(f, 1));
    for (Eigen::Index m = 0; m < f; ++m) CHECK(s.col(m) == u.col(2 * f + m));
  }
  SUBCASE("uniform kernel on a channel-constant input returns the constant") {
    M constant(w, c * f);
    for (Eigen::Index m = 0; m < f; ++m)
      for (Eigen::Index ch = 0; ch < c; ++ch) constant.col(ch * f + m).setConstant(1.5 + m);
    const M s = spatial_compress<double>(constant, M::Constant(f, c, 1.0 / c), M::Zero(f, 1));
    for (Eigen::Index m = 0; m < f; ++m) CHECK((s.col(m).array() - (1.5 + m)).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(spatial_compress<double>(u, M::Zero(f, c + 1), M::Zero(f, 1)), InvalidArgument); }
}

TEST_CASE("pool and project") {
  std::mt19937_64 rng(5);
  CHECK(pool_project<double>(M::Zero(200, 2), 8, M::Zero(2, 3), M::Zero(1, 3)).h_prime() == 25);
  const auto constant = pool_project<double>(M::Constant(17, 2, 0.7), 4, M::Identity(2, 2), M::Zero(1, 2));
  CHECK((constant.tokens.array() - 0.7).abs().maxCoeff() < 1e-15);
  const M s = oracle::random_matrix(9, 4, rng);
  CHECK(pool_project<double>(s, 1, M::Identity(4, 4), M::Zero(1, 4)).tokens == s);
  CHECK_THROWS_AS(pool_project<double>(M::Zero(3, 2), 4, M::Zero(2, 2), M::Zero(1, 2)), InvalidArgument);
}

TEST_CASE("tokenize is deterministic and linear without biases") {
  const TokenizerConfig cfg{9, 3, 4, 5, 6};
  std::mt19937_64 rng(6);
  const auto w = random_weights(cfg, 5, rng, false);
  const M x = oracle::random_matrix(5, 300, rng), y = oracle::random_matrix(5, 300, rng);
  const M tx = tokenize<double>(x, w, cfg).tokens;
  CHECK(tokenize<double>(x, w, cfg).tokens == tx);
  const M ty = tokenize<double>(y, w, cfg).tokens;
  const M tsum = tokenize<double>(M(2.0 * x - 0.5 * y), w, cfg).tokens;
  CHECK((tsum - (2.0 * tx - 0.5 * ty)).norm() <= 1e-6 * tsum.norm());
  CHECK((tokenize<double>(M(3.0 * x), w, cfg).tokens - 3.0 * tx).norm() <= 1e-12 * tx.norm());

  // with biases the map is affine: T(s x) - T(0) = s (T(x) - T(0))
  const auto wb = random_weights(cfg, 5, rng, true);
  const M t0 = tokenize<double>(M(M::Zero(5, 300)), wb, cfg).tokens;
  const M t1 = tokenize<double>(x, wb, cfg).tokens;
  const M t3 = tokenize<double>(M(3.0 * x), wb, cfg).tokens;
  CHECK(((t3 - t0) - 3.0 * (t1 - t0)).norm() <= 1e-9 * t3.norm());
}
