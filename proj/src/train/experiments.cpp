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

#include "mieeg/train/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "mieeg/error.hpp"

namespace mieeg::train {

Corpus build_corpus(const std::vector<DatasetManifest>& pretraining, const std::vector<DatasetManifest>& downstream,
                    const HarmonizeOptions& options, double calibration_fraction) {
  Corpus c;
  for (const auto& m : pretraining) {
    auto set = prepare_pretraining(m, options);
    c.retained.insert(c.retained.end(), set.retained.begin(), set.retained.end());
    for (auto& s : set.sessions)
      for (auto& t : s.trials) c.pretraining.push_back(std::move(t));
  }
  for (const auto& m : downstream) {
    auto subjects = prepare_downstream(m, options, calibration_fraction);
    for (auto& s : subjects) c.downstream.push_back(std::move(s));
  }
  return c;
}

std::string checkpoint_name(const std::string& stage, const RunSpec& spec, std::uint64_t seed, const std::string& subject) {
  char alpha[16];
  std::snprintf(alpha, sizeof alpha, "%.2f", spec.alpha);
  std::string name = stage + "_" + variant_name(spec.variant) + "_a" + alpha + "_s" + std::to_string(seed);
  if (!subject.empty()) name += "_" + subject;
  return name + ".mirm";
}

RunReport run_experiment(const Corpus& corpus, const TrainConfig& config, const std::vector<RunSpec>& specs,
                         const std::optional<std::filesystem::path>& checkpoint_dir) {
  config.validate();
  if (corpus.downstream.empty()) throw InvalidArgument("no downstream subjects");
  const auto started = std::chrono::steady_clock::now();
  RunReport report;
  report.retained_subjects = corpus.retained;
  for (const auto& d : corpus.downstream) report.split_hashes[d.subject_id] = d.split_hash;
  if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);

  for (const auto& spec : specs) {
    TrainConfig cfg = config;
    cfg.ablation = spec.variant;
    cfg.alpha = spec.alpha;
    for (const auto seed : config.seeds) {
      std::optional<ModelState> base;
      if (spec.variant != Variant::no_pretrain) {
        auto pre = pretrain(corpus.pretraining, cfg, seed);
        report.loss_curves.push_back({variant_name(spec.variant), spec.alpha, seed, pre.curve});
        if (checkpoint_dir) save_state(pre.state, (*checkpoint_dir / checkpoint_name("pretrain", spec, seed)).string());
        base = std::move(pre.state);
      }
      for (const auto& subject : corpus.downstream) {
        // Controlled comparison: every variant must see the split fingerprinted up front.
        if (trials_fingerprint(subject.test, trials_fingerprint(subject.calibration)) !=
            report.split_hashes.at(subject.subject_id))
          throw Error("downstream split of " + subject.subject_id + " changed between variants");
        std::vector<int> classes;
        for (const auto& t : subject.calibration)
          if (t.label && std::find(classes.begin(), classes.end(), *t.label) == classes.end()) classes.push_back(*t.label);
        std::sort(classes.begin(), classes.end());
        const ModelState start = base ? *base : fresh_state(cfg.model, classes, seed);
        const auto ft = finetune(start, subject, cfg, seed);
        if (checkpoint_dir)
          save_state(ft.state, (*checkpoint_dir / checkpoint_name("finetune", spec, seed, subject.subject_id)).string());
        report.rows.push_back({subject.dataset, subject.subject_id, seed, variant_name(spec.variant), spec.alpha, "test",
                               ft.report_accuracy});
        report.rows.push_back({subject.dataset, subject.subject_id, seed, variant_name(spec.variant), spec.alpha,
                               "test_best", ft.best_accuracy});
      }
    }
  }
  report.summary = summarize(report.rows);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

RunReport ablation_suite(const Corpus& corpus, const TrainConfig& config,
                         const std::optional<std::filesystem::path>& checkpoint_dir) {
  auto r = run_experiment(corpus, config,
                          {{Variant::full, config.alpha}, {Variant::no_selfsup, config.alpha}, {Variant::no_pretrain, config.alpha}},
                          checkpoint_dir);
  r.command = "ablate";
  return r;
}

RunReport mask_sweep(const Corpus& corpus, const TrainConfig& config, const std::vector<double>& alphas,
                     const std::optional<std::filesystem::path>& checkpoint_dir) {
  std::vector<RunSpec> specs;
  for (double a : alphas) specs.push_back({Variant::full, a});
  auto r = run_experiment(corpus, config, specs, checkpoint_dir);
  r.command = "sweep";
  return r;
}

}  // namespace mieeg::train
