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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mieeg/nn/conv.hpp"
#include "mieeg/nn/ops.hpp"
#include "mieeg/nn/tape.hpp"
#include "mieeg/tokenizer/tokenizer.hpp"

namespace mieeg::nn {

struct EncoderConfig {
  int layers = 6;
  int dim = 256;
  int heads = 8;
  int ff_dim = 1024;
  double dropout = 0.5;
  int decoder_layers = 2;
  int max_tokens = 64;  // positional embedding capacity

  void validate() const {
    if (layers < 1 || decoder_layers < 0 || dim < 1 || heads < 1 || ff_dim < 1 || max_tokens < 1)
      throw InvalidArgument("encoder sizes must be positive");
    if (dim % heads != 0) throw InvalidArgument("D must be divisible by the number of heads");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
  }
};

struct ModelConfig {
  tokenizer::TokenizerConfig tokenizer;
  EncoderConfig encoder;
  int channels = 23;
  int classes = 2;

  void validate() const {
    tokenizer.validate();
    encoder.validate();
    if (tokenizer.dim != encoder.dim) throw InvalidArgument("tokenizer and encoder dimensions differ");
    if (channels < 1 || classes < 1) throw InvalidArgument("channels and classes must be >= 1");
  }
};

using Rng = std::mt19937_64;

/// Tokenizer, learned positions, [MASK] embedding, pre-norm transformer encoder,
/// lightweight transformer decoder and an affine classification head over the
/// mean-pooled encoder output.
template <typename S>
class Model {
 public:
  struct Block {
    Parameter<S>* ln1_g;
    Parameter<S>* ln1_b;
    Parameter<S>* wq;
    Parameter<S>* bq;
    Parameter<S>* wk;
    Parameter<S>* bk;
    Parameter<S>* wv;
    Parameter<S>* bv;
    Parameter<S>* wo;
    Parameter<S>* bo;
    Parameter<S>* ln2_g;
    Parameter<S>* ln2_b;
    Parameter<S>* w1;
    Parameter<S>* b1;
    Parameter<S>* w2;
    Parameter<S>* b2;
  };

  Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    build(rng);
  }

  Model(const Model& other) : config_(other.config_) {
    Rng rng(0);
    build(rng);
    copy_values_from(other);
  }

  Model& operator=(const Model& other) {
    if (this != &other) {
      config_ = other.config_;
      params_ = ParameterStore<S>();
      Rng rng(0);
      build(rng);
      copy_values_from(other);
    }
    return *this;
  }

  /// Copies values, moments and step; shapes must agree.
  template <typename T>
  void copy_values_from(const Model<T>& other) {
    const auto& src = other.parameters();
    if (src.size() != params_.size()) throw InvalidArgument("parameter sets differ");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& dst = params_[i];
      if (dst.name != src[i].name || dst.value.rows() != src[i].value.rows() || dst.value.cols() != src[i].value.cols())
        throw InvalidArgument("parameter mismatch at " + dst.name);
      dst.value = src[i].value.template cast<S>();
      dst.adam_m = src[i].adam_m.template cast<S>();
      dst.adam_v = src[i].adam_v.template cast<S>();
      dst.grad.setZero();
    }
    params_.step = src.step;
  }

  /// Same architecture and values in another scalar type.
  template <typename T>
  Model<T> cast() const {
    Model<T> out(config_, 0);
    out.copy_values_from(*this);
    return out;
  }

  const ModelConfig& config() const { return config_; }
  ParameterStore<S>& parameters() { return params_; }
  const ParameterStore<S>& parameters() const { return params_; }

  /// Tokens of a batch of equally shaped C x T trials: (B*H') x D.
  Var<S> tokens(Tape<S>& tape, const std::vector<Matrix<S>>& trials) const {
    const auto& tc = config_.tokenizer;
    const Eigen::Index width = tokenizer::conv_output_length(trials.front().cols(), tc.stride);
    if (width < tc.pool) throw InvalidArgument("pool window larger than the feature sequence");
    Var<S> s = temporal_spatial_conv(tape, trials, tape.param(*tk_kernel_), tape.param(*tk_tbias_), tape.param(*tk_spatial_),
                                     tape.param(*tk_sbias_), tc.stride);
    Var<S> pooled = avg_pool_rows(s, width, tc.pool);
    return linear(pooled, tape.param(*tk_proj_), tape.param(*tk_proj_b_));
  }

  Eigen::Index token_count(Eigen::Index samples) const { return tokenizer::token_count(samples, config_.tokenizer); }

  /// Replaces flagged token rows with the shared [MASK] embedding.
  Var<S> apply_mask(const Var<S>& tokens, const std::vector<char>& masked) const {
    return mask_rows(tokens, tokens.tape().param(*mask_embedding_), masked);
  }

  /// Contextual embeddings c_i: positions added, encoder stack, final layer norm.
  Var<S> encode(const Var<S>& tokens, Eigen::Index h_prime, bool train, Rng& rng) const {
    if (h_prime > config_.encoder.max_tokens)
      throw InvalidArgument("sequence of " + std::to_string(h_prime) + " tokens exceeds positional capacity " +
                            std::to_string(config_.encoder.max_tokens));
    Tape<S>& tape = tokens.tape();
    Var<S> x = add_tiled(tokens, tape.param(*pos_), h_prime);
    for (const auto& blk : encoder_) x = block_forward(x, blk, h_prime, train, rng);
    return layer_norm(x, tape.param(*enc_ln_g_), tape.param(*enc_ln_b_));
  }

  /// Reconstructed tokens z_hat from the contextual embeddings.
  Var<S> decode(const Var<S>& context, Eigen::Index h_prime, bool train, Rng& rng) const {
    Tape<S>& tape = context.tape();
    Var<S> x = context;
    for (const auto& blk : decoder_) x = block_forward(x, blk, h_prime, train, rng);
    x = layer_norm(x, tape.param(*dec_ln_g_), tape.param(*dec_ln_b_));
    return linear(x, tape.param(*dec_proj_), tape.param(*dec_proj_b_));
  }

  /// Mean-pooled representation v, B x D.
  Var<S> pool(const Var<S>& context, Eigen::Index h_prime) const { return mean_pool(context, h_prime); }

  /// Class logits from the pooled representation, B x classes.
  Var<S> classify(const Var<S>& pooled) const {
    Tape<S>& tape = pooled.tape();
    return linear(pooled, tape.param(*head_w_), tape.param(*head_b_));
  }

  /// New classification head for `classes` outputs; every other parameter is kept.
  void reset_head(int classes, std::uint64_t seed) {
    if (classes < 1) throw InvalidArgument("classes must be >= 1");
    config_.classes = classes;
    Rng rng(seed);
    head_w_ = &params_.replace("head.weight", xavier(config_.encoder.dim, classes, rng));
    head_b_ = &params_.replace("head.bias", Matrix<S>::Zero(1, classes));
  }

  /// Tokenizer weights as plain matrices (for the reference forward path).
  tokenizer::TokenizerWeights<S> tokenizer_weights() const {
    return {tk_kernel_->value, tk_tbias_->value, tk_spatial_->value, tk_sbias_->value, tk_proj_->value, tk_proj_b_->value};
  }

 private:
  static Matrix<S> xavier(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix<S> m(fan_in, fan_out);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<S>(u(rng));
    return m;
  }

  static Matrix<S> normal(Eigen::Index rows, Eigen::Index cols, double sd, Rng& rng) {
    std::normal_distribution<double> n(0.0, sd);
    Matrix<S> m(rows, cols);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<S>(n(rng));
    return m;
  }

  Block make_block(const std::string& prefix, Rng& rng) {
    const int d = config_.encoder.dim, ff = config_.encoder.ff_dim;
    auto add = [&](const std::string& name, Matrix<S> v) { return &params_.add(prefix + name, std::move(v)); };
    Block b{};
    b.ln1_g = add(".ln1.gamma", Matrix<S>::Ones(1, d));
    b.ln1_b = add(".ln1.beta", Matrix<S>::Zero(1, d));
    b.wq = add(".attn.q.weight", xavier(d, d, rng));
    b.bq = add(".attn.q.bias", Matrix<S>::Zero(1, d));
    b.wk = add(".attn.k.weight", xavier(d, d, rng));
    b.bk = add(".attn.k.bias", Matrix<S>::Zero(1, d));
    b.wv = add(".attn.v.weight", xavier(d, d, rng));
    b.bv = add(".attn.v.bias", Matrix<S>::Zero(1, d));
    b.wo = add(".attn.out.weight", xavier(d, d, rng));
    b.bo = add(".attn.out.bias", Matrix<S>::Zero(1, d));
    b.ln2_g = add(".ln2.gamma", Matrix<S>::Ones(1, d));
    b.ln2_b = add(".ln2.beta", Matrix<S>::Zero(1, d));
    b.w1 = add(".ffn.in.weight", xavier(d, ff, rng));
    b.b1 = add(".ffn.in.bias", Matrix<S>::Zero(1, ff));
    b.w2 = add(".ffn.out.weight", xavier(ff, d, rng));
    b.b2 = add(".ffn.out.bias", Matrix<S>::Zero(1, d));
    return b;
  }

  void build(Rng& rng) {
    const auto& tc = config_.tokenizer;
    const int d = config_.encoder.dim;
    tk_kernel_ = &params_.add("tokenizer.temporal.kernel", xavier(tc.feature_maps, tc.kernel, rng));
    tk_tbias_ = &params_.add("tokenizer.temporal.bias", Matrix<S>::Zero(tc.feature_maps, 1));
    tk_spatial_ = &params_.add("tokenizer.spatial.weight", xavier(tc.feature_maps, config_.channels, rng));
    tk_sbias_ = &params_.add("tokenizer.spatial.bias", Matrix<S>::Zero(tc.feature_maps, 1));
    tk_proj_ = &params_.add("tokenizer.proj.weight", xavier(tc.feature_maps, d, rng));
    tk_proj_b_ = &params_.add("tokenizer.proj.bias", Matrix<S>::Zero(1, d));
    pos_ = &params_.add("pos_embedding", normal(config_.encoder.max_tokens, d, 0.02, rng));
    mask_embedding_ = &params_.add("mask_embedding", normal(1, d, 0.02, rng));
    encoder_.clear();
    decoder_.clear();
    for (int l = 0; l < config_.encoder.layers; ++l) encoder_.push_back(make_block("encoder." + std::to_string(l), rng));
    enc_ln_g_ = &params_.add("encoder.ln_f.gamma", Matrix<S>::Ones(1, d));
    enc_ln_b_ = &params_.add("encoder.ln_f.beta", Matrix<S>::Zero(1, d));
    for (int l = 0; l < config_.encoder.decoder_layers; ++l)
      decoder_.push_back(make_block("decoder." + std::to_string(l), rng));
    dec_ln_g_ = &params_.add("decoder.ln_f.gamma", Matrix<S>::Ones(1, d));
    dec_ln_b_ = &params_.add("decoder.ln_f.beta", Matrix<S>::Zero(1, d));
    dec_proj_ = &params_.add("decoder.proj.weight", xavier(d, d, rng));
    dec_proj_b_ = &params_.add("decoder.proj.bias", Matrix<S>::Zero(1, d));
    head_w_ = &params_.add("head.weight", xavier(d, config_.classes, rng));
    head_b_ = &params_.add("head.bias", Matrix<S>::Zero(1, config_.classes));
  }

  Var<S> block_forward(const Var<S>& x, const Block& b, Eigen::Index h_prime, bool train, Rng& rng) const {
    Tape<S>& t = x.tape();
    const double p = config_.encoder.dropout;
    Var<S> h = layer_norm(x, t.param(*b.ln1_g), t.param(*b.ln1_b));
    Var<S> q = linear(h, t.param(*b.wq), t.param(*b.bq));
    Var<S> k = linear(h, t.param(*b.wk), t.param(*b.bk));
    Var<S> v = linear(h, t.param(*b.wv), t.param(*b.bv));
    Var<S> a = attention(q, k, v, config_.encoder.heads, h_prime);
    a = linear(a, t.param(*b.wo), t.param(*b.bo));
    Var<S> y = x + dropout(a, p, train, rng);
    h = layer_norm(y, t.param(*b.ln2_g), t.param(*b.ln2_b));
    Var<S> f = dropout(gelu(linear(h, t.param(*b.w1), t.param(*b.b1))), p, train, rng);
    f = linear(f, t.param(*b.w2), t.param(*b.b2));
    return y + dropout(f, p, train, rng);
  }

  ModelConfig config_;
  ParameterStore<S> params_;
  Parameter<S>* tk_kernel_ = nullptr;
  Parameter<S>* tk_tbias_ = nullptr;
  Parameter<S>* tk_spatial_ = nullptr;
  Parameter<S>* tk_sbias_ = nullptr;
  Parameter<S>* tk_proj_ = nullptr;
  Parameter<S>* tk_proj_b_ = nullptr;
  Parameter<S>* pos_ = nullptr;
  Parameter<S>* mask_embedding_ = nullptr;
  std::vector<Block> encoder_;
  Parameter<S>* enc_ln_g_ = nullptr;
  Parameter<S>* enc_ln_b_ = nullptr;
  std::vector<Block> decoder_;
  Parameter<S>* dec_ln_g_ = nullptr;
  Parameter<S>* dec_ln_b_ = nullptr;
  Parameter<S>* dec_proj_ = nullptr;
  Parameter<S>* dec_proj_b_ = nullptr;
  Parameter<S>* head_w_ = nullptr;
  Parameter<S>* head_b_ = nullptr;
};

}  // namespace mieeg::nn
