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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mieeg/core/trial.hpp"
#include "mieeg/nn/model.hpp"
#include "mieeg/train/pipeline.hpp"

namespace mieeg::train {

enum class Variant { full, no_pretrain, no_selfsup };

std::string variant_name(Variant v);   // "full", "no_pretrain", "no_selfsup"
std::string variant_label(Variant v);  // table row label
Variant parse_variant(const std::string& name);

/// Small model used for desk-scale runs: D = 32, 2 layers, 4 heads, pool window 2, no dropout.
nn::ModelConfig desk_model_config();

struct TrainConfig {
  double alpha = 0.5;
  double lr = 1e-3;            // pretraining
  double finetune_lr = 1e-4;   // fresh Adam on an already-fitted model; 1e-3 overshoots
  int batch = 64;
  int epochs_pretrain = 100;
  int epochs_finetune = 20;
  int report_epoch = 10;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  Variant ablation = Variant::full;
  double finetune_fraction = 0.3;
  bool freeze_body = false;     // fine-tune the head only
  bool detach_target = false;   // stop the reconstruction gradient flowing into the target tokens
  nn::ModelConfig model = desk_model_config();

  void validate() const;
};

struct EpochLoss {
  double rec = 0.0;
  double cls = 0.0;
  double total = 0.0;
};

/// Network plus the unified class ids its head rows stand for.
struct ModelState {
  nn::Model<float> model;
  std::vector<int> classes;  // head output j <-> unified label classes[j]

  std::string metadata_json() const;
};

void save_state(const ModelState& state, const std::string& path);
ModelState load_state(const std::string& path);

struct PretrainResult {
  ModelState state;
  std::vector<EpochLoss> curve;
};

/// Joint pretraining over harmonized, aligned trials carrying unified labels.
/// Variant::no_selfsup trains the classification branch only.
PretrainResult pretrain(const std::vector<Trial>& trials, const TrainConfig& config, std::uint64_t seed);
PretrainResult pretrain(const PretrainingSet& set, const TrainConfig& config, std::uint64_t seed);

/// Randomly initialised state whose head covers `classes`.
ModelState fresh_state(const nn::ModelConfig& model, std::vector<int> classes, std::uint64_t seed);

struct FinetuneResult {
  ModelState state;
  double initial_accuracy = 0.0;   // before any update
  double report_accuracy = 0.0;    // after config.report_epoch epochs (or the last one)
  double best_accuracy = 0.0;
  int best_epoch = 0;              // 0 = before any update
  std::vector<double> test_accuracy;  // per epoch, 1-based index i -> entry i-1
  std::vector<double> loss;           // per epoch mean L_cls
  bool head_reset = false;
};

/// Supervised fine-tuning on subject.calibration (L_cls only, fresh optimiser state).
/// The head is replaced when the calibration label set differs from state.classes.
FinetuneResult finetune(const ModelState& state, const DownstreamSubject& subject, const TrainConfig& config,
                        std::uint64_t seed);

/// Class logits, one row per trial (dropout off).
Eigen::MatrixXd predict_logits(const ModelState& state, const std::vector<Trial>& trials);

/// 100 * correct / total with argmax over each row (first maximum wins).
double accuracy_from_logits(const Eigen::MatrixXd& logits, const std::vector<int>& targets);

/// Accuracy in percent; labels are unified ids mapped through state.classes.
double evaluate(const ModelState& state, const std::vector<Trial>& trials);

}  // namespace mieeg::train
