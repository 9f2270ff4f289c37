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

#include "mieeg/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "mieeg/error.hpp"
#include "mieeg/nn/adam.hpp"
#include "mieeg/nn/checkpoint.hpp"
#include "mieeg/train/mask.hpp"

namespace mieeg::train {

using nlohmann::json;
using FMat = nn::Matrix<float>;

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_pretrain: return "no_pretrain";
    case Variant::no_selfsup: return "no_selfsup";
  }
  throw InvalidArgument("unknown variant");
}

std::string variant_label(Variant v) {
  switch (v) {
    case Variant::full: return "Full model";
    case Variant::no_pretrain: return "w/o Pre-training";
    case Variant::no_selfsup: return "w/o Self-supervised";
  }
  throw InvalidArgument("unknown variant");
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "no_pretrain") return Variant::no_pretrain;
  if (name == "no_selfsup") return Variant::no_selfsup;
  throw InvalidArgument("unknown ablation variant '" + name + "' (expected full, no_pretrain or no_selfsup)");
}

nn::ModelConfig desk_model_config() {
  nn::ModelConfig c;
  // A short pooling window keeps the 8-13 Hz rhythm inside each token; 4 s at 250 Hz gives 100 tokens.
  c.tokenizer = {25, 5, 8, 2, 32};
  c.encoder.layers = 2;
  c.encoder.dim = 32;
  c.encoder.heads = 4;
  c.encoder.ff_dim = 64;
  c.encoder.dropout = 0.0;
  c.encoder.decoder_layers = 1;
  c.encoder.max_tokens = 128;
  c.channels = 23;
  c.classes = 2;
  return c;
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("lr must be a finite non-negative number");
  if (!(finetune_lr >= 0.0) || !std::isfinite(finetune_lr))
    throw InvalidArgument("finetune_lr must be a finite non-negative number");
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  if (epochs_pretrain < 0) throw InvalidArgument("epochs_pretrain must be >= 0");
  if (epochs_finetune < 1 || epochs_finetune > 20) throw InvalidArgument("epochs_finetune must lie in [1, 20]");
  if (report_epoch < 1) throw InvalidArgument("report_epoch must be >= 1");
  if (seeds.empty()) throw InvalidArgument("at least one seed is required");
  if (!(finetune_fraction > 0.0 && finetune_fraction < 1.0)) throw InvalidArgument("finetune_fraction must lie in (0, 1)");
  model.validate();
}

std::string ModelState::metadata_json() const { return json{{"classes", classes}}.dump(); }

void save_state(const ModelState& state, const std::string& path) {
  nn::save_checkpoint(state.model, path, state.metadata_json());
}

ModelState load_state(const std::string& path) {
  std::string meta;
  nn::Model<float> model = nn::load_checkpoint<float>(path, &meta);
  std::vector<int> classes;
  try {
    classes = json::parse(meta).at("classes").get<std::vector<int>>();
  } catch (const json::exception& ex) {
    throw IoError(path + ": checkpoint metadata lacks a class list (" + ex.what() + ")");
  }
  if (static_cast<int>(classes.size()) != model.config().classes)
    throw IoError(path + ": class list does not match the head size");
  return {std::move(model), std::move(classes)};
}

namespace {

std::vector<FMat> as_float(const std::vector<Trial>& trials) {
  std::vector<FMat> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.data.cast<float>());
  return out;
}

std::vector<int> present_classes(const std::vector<Trial>& trials) {
  std::set<int> s;
  for (const auto& t : trials) {
    if (!t.label) throw InvalidArgument("training trial without a label");
    s.insert(*t.label);
  }
  return {s.begin(), s.end()};
}

std::vector<int> head_targets(const std::vector<Trial>& trials, const std::vector<int>& classes) {
  std::vector<int> out;
  out.reserve(trials.size());
  for (const auto& t : trials) {
    if (!t.label) throw InvalidArgument("trial without a label");
    const auto it = std::find(classes.begin(), classes.end(), *t.label);
    if (it == classes.end()) throw InvalidArgument("label " + std::to_string(*t.label) + " is not covered by the model head");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

void check_shapes(const std::vector<Trial>& trials, const nn::ModelConfig& cfg) {
  if (trials.empty()) throw InvalidArgument("empty training set");
  const auto t0 = trials.front().num_samples();
  for (const auto& t : trials) {
    if (t.num_channels() != cfg.channels)
      throw InvalidArgument("trial has " + std::to_string(t.num_channels()) + " channels, model expects " +
                            std::to_string(cfg.channels));
    if (t.num_samples() != t0) throw InvalidArgument("trials must share one length");
  }
}

void reset_optimizer(nn::ParameterStore<float>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].adam_m.setZero();
    params[i].adam_v.setZero();
    params[i].grad.setZero();
  }
  params.step = 0;
}

// Class-balanced batches: every slot draws a class uniformly, then the next trial of
// that class from a per-class permutation that is reshuffled when exhausted.
class BalancedSampler {
 public:
  BalancedSampler(const std::vector<int>& targets, int n_classes) : pools_(static_cast<std::size_t>(n_classes)) {
    for (std::size_t i = 0; i < targets.size(); ++i) pools_[static_cast<std::size_t>(targets[i])].push_back(i);
    cursor_.assign(pools_.size(), 0);
  }
  std::vector<std::size_t> draw(std::size_t n, nn::Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pools_.size() - 1);
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t c = pick(rng);
      auto& pool = pools_[c];
      if (cursor_[c] == 0) std::shuffle(pool.begin(), pool.end(), rng);
      out.push_back(pool[cursor_[c]]);
      cursor_[c] = (cursor_[c] + 1) % pool.size();
    }
    return out;
  }

 private:
  std::vector<std::vector<std::size_t>> pools_;
  std::vector<std::size_t> cursor_;
};

}  // namespace

ModelState fresh_state(const nn::ModelConfig& model, std::vector<int> classes, std::uint64_t seed) {
  nn::ModelConfig cfg = model;
  cfg.classes = static_cast<int>(classes.size());
  return {nn::Model<float>(cfg, seed), std::move(classes)};
}

PretrainResult pretrain(const std::vector<Trial>& trials, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.ablation == Variant::no_pretrain) throw InvalidArgument("the no_pretrain variant has no pretraining stage");
  check_shapes(trials, config.model);
  const std::vector<int> classes = present_classes(trials);
  const std::vector<int> targets = head_targets(trials, classes);
  const std::vector<FMat> data = as_float(trials);

  PretrainResult result{fresh_state(config.model, classes, seed), {}};
  auto& model = result.state.model;
  const auto h = model.token_count(trials.front().num_samples());
  const bool selfsup = config.ablation == Variant::full;
  const nn::AdamOptions adam{config.lr};

  nn::Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  BalancedSampler sampler(targets, static_cast<int>(classes.size()));
  const std::size_t steps = (trials.size() + static_cast<std::size_t>(config.batch) - 1) / static_cast<std::size_t>(config.batch);

  for (int epoch = 0; epoch < config.epochs_pretrain; ++epoch) {
    EpochLoss acc;
    for (std::size_t step = 0; step < steps; ++step) {
      const auto idx = sampler.draw(static_cast<std::size_t>(config.batch), rng);
      std::vector<FMat> batch;
      std::vector<int> labels;
      batch.reserve(idx.size());
      for (auto i : idx) {
        batch.push_back(data[i]);
        labels.push_back(targets[i]);
      }
      nn::Tape<float> tape;
      nn::Var<float> z = model.tokens(tape, batch);
      nn::Var<float> loss = nn::softmax_cross_entropy(model.classify(model.pool(model.encode(z, h, true, rng), h)), labels);
      const double cls = loss.scalar();
      double rec = 0.0;
      if (selfsup) {
        std::vector<std::vector<int>> masks;
        masks.reserve(idx.size());
        for (std::size_t b = 0; b < idx.size(); ++b) masks.push_back(sample_mask_set(static_cast<std::size_t>(h), config.alpha, rng));
        nn::Var<float> ctx = model.encode(model.apply_mask(z, mask_flags(masks, static_cast<std::size_t>(h))), h, true, rng);
        nn::Var<float> target = config.detach_target ? nn::stop_gradient(z) : z;
        nn::Var<float> r = nn::masked_reconstruction(model.decode(ctx, h, true, rng), target, h, masks);
        rec = r.scalar();
        loss = r + loss;
      }
      tape.backward(loss);
      nn::adam_step(model.parameters(), adam);
      model.parameters().zero_grad();
      acc.rec += rec;
      acc.cls += cls;
      acc.total += loss.scalar();
    }
    const double n = static_cast<double>(steps);
    result.curve.push_back({acc.rec / n, acc.cls / n, acc.total / n});
  }
  return result;
}

PretrainResult pretrain(const PretrainingSet& set, const TrainConfig& config, std::uint64_t seed) {
  std::vector<Trial> all;
  for (const auto& s : set.sessions) all.insert(all.end(), s.trials.begin(), s.trials.end());
  return pretrain(all, config, seed);
}

Eigen::MatrixXd predict_logits(const ModelState& state, const std::vector<Trial>& trials) {
  const auto& model = state.model;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(trials.size()), model.config().classes);
  if (trials.empty()) return out;
  check_shapes(trials, model.config());
  const auto h = model.token_count(trials.front().num_samples());
  nn::Rng rng(0);  // unused with dropout off
  constexpr std::size_t chunk = 64;
  for (std::size_t start = 0; start < trials.size(); start += chunk) {
    const std::size_t end = std::min(trials.size(), start + chunk);
    std::vector<FMat> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(trials[i].data.cast<float>());
    nn::Tape<float> tape;
    const auto logits = model.classify(model.pool(model.encode(model.tokens(tape, batch), h, false, rng), h));
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) = logits.value().cast<double>();
  }
  return out;
}

double accuracy_from_logits(const Eigen::MatrixXd& logits, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) throw InvalidArgument("one target per logit row expected");
  if (targets.empty()) throw InvalidArgument("accuracy of an empty set");
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index arg = 0;
    logits.row(r).maxCoeff(&arg);
    if (arg == targets[static_cast<std::size_t>(r)]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(targets.size());
}

double evaluate(const ModelState& state, const std::vector<Trial>& trials) {
  return accuracy_from_logits(predict_logits(state, trials), head_targets(trials, state.classes));
}

FinetuneResult finetune(const ModelState& state, const DownstreamSubject& subject, const TrainConfig& config,
                        std::uint64_t seed) {
  config.validate();
  const auto& calib = subject.calibration;
  check_shapes(calib, state.model.config());
  const std::vector<int> classes = present_classes(calib);
  if (classes.size() < 2) throw InvalidArgument("calibration set must hold at least one trial of each of two classes");
  for (const auto& t : subject.test)
    if (t.label && !std::binary_search(classes.begin(), classes.end(), *t.label))
      throw InvalidArgument("test label " + std::to_string(*t.label) + " never appears in the calibration trials");

  nn::Rng rng(seed ^ 0xd1b54a32d192ed03ull);
  FinetuneResult out{state, 0, 0, 0, 0, {}, {}, false};
  auto& model = out.state.model;
  if (classes != state.classes) {
    model.reset_head(static_cast<int>(classes.size()), rng());
    out.state.classes = classes;
    out.head_reset = true;
  }
  reset_optimizer(model.parameters());

  const std::vector<int> targets = head_targets(calib, classes);
  const std::vector<FMat> data = as_float(calib);
  const auto h = model.token_count(calib.front().num_samples());
  const nn::AdamOptions adam{config.finetune_lr};

  out.initial_accuracy = evaluate(out.state, subject.test);
  out.best_accuracy = out.initial_accuracy;
  std::vector<std::size_t> order(calib.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs_finetune; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      std::vector<FMat> batch;
      std::vector<int> labels;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(data[order[k]]);
        labels.push_back(targets[order[k]]);
      }
      nn::Tape<float> tape;
      const auto loss = nn::softmax_cross_entropy(
          model.classify(model.pool(model.encode(model.tokens(tape, batch), h, true, rng), h)), labels);
      tape.backward(loss);
      if (config.freeze_body) {
        auto& p = model.parameters();
        for (std::size_t i = 0; i < p.size(); ++i)
          if (p[i].name.rfind("head.", 0) != 0) p[i].grad.setZero();
      }
      nn::adam_step(model.parameters(), adam);
      model.parameters().zero_grad();
      loss_sum += loss.scalar();
      ++steps;
    }
    out.loss.push_back(loss_sum / steps);
    const double acc = evaluate(out.state, subject.test);
    out.test_accuracy.push_back(acc);
    if (acc > out.best_accuracy) {
      out.best_accuracy = acc;
      out.best_epoch = epoch;
    }
  }
  const int report = std::min(config.report_epoch, config.epochs_finetune);
  out.report_accuracy = out.test_accuracy[static_cast<std::size_t>(report - 1)];
  return out;
}

}  // namespace mieeg::train
