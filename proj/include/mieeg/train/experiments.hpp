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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mieeg/core/manifest.hpp"
#include "mieeg/train/pipeline.hpp"
#include "mieeg/train/report.hpp"
#include "mieeg/train/trainer.hpp"

namespace mieeg::train {

/// Everything an experiment trains and tests on, already harmonized and aligned.
struct Corpus {
  std::vector<Trial> pretraining;         // unified labels, aligned per subject-session
  std::vector<std::string> retained;      // pretraining subjects kept by screening
  std::vector<DownstreamSubject> downstream;
};

Corpus build_corpus(const std::vector<DatasetManifest>& pretraining, const std::vector<DatasetManifest>& downstream,
                    const HarmonizeOptions& options, double calibration_fraction);

struct RunSpec {
  Variant variant = Variant::full;
  double alpha = 0.5;
};

/// Pretrains (unless no_pretrain) and fine-tunes every downstream subject for each
/// spec and seed. All specs share the same downstream splits; their fingerprints are
/// checked before every fine-tune. When `checkpoint_dir` is set, pretrained and
/// fine-tuned states are written there.
RunReport run_experiment(const Corpus& corpus, const TrainConfig& config, const std::vector<RunSpec>& specs,
                         const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

/// {full, no_selfsup, no_pretrain} at config.alpha.
RunReport ablation_suite(const Corpus& corpus, const TrainConfig& config,
                         const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

inline const std::vector<double>& default_alphas() {
  static const std::vector<double> a = {0.1, 0.25, 0.5, 0.75, 0.9};
  return a;
}

/// Full pretrain + fine-tune for each mask ratio.
RunReport mask_sweep(const Corpus& corpus, const TrainConfig& config, const std::vector<double>& alphas = default_alphas(),
                     const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

std::string checkpoint_name(const std::string& stage, const RunSpec& spec, std::uint64_t seed,
                            const std::string& subject = "");

}  // namespace mieeg::train
