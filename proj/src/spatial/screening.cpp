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

#include "mieeg/spatial/screening.hpp"

#include <map>

#include "mieeg/error.hpp"
#include "mieeg/spatial/csp.hpp"

namespace mieeg::spatial {

std::vector<int> stratified_folds(const std::vector<Trial>& trials, int folds) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  std::map<int, int> seen;
  std::vector<int> fold(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!trials[i].label) throw InvalidArgument("screening needs labelled trials");
    fold[i] = seen[*trials[i].label]++ % folds;
  }
  for (const auto& [label, count] : seen)
    if (count < 2 * folds)
      throw InvalidArgument("class " + std::to_string(label) + " has too few trials (" + std::to_string(count) +
                            ") for " + std::to_string(folds) + "-fold screening");
  return fold;
}

double within_subject_accuracy(const std::vector<Trial>& trials, int folds, int csp_filters_per_side) {
  const auto fold = stratified_folds(trials, folds);
  std::size_t correct = 0;
  for (int k = 0; k < folds; ++k) {
    std::vector<Trial> train, test;
    for (std::size_t i = 0; i < trials.size(); ++i) (fold[i] == k ? test : train).push_back(trials[i]);
    const auto clf = CspLdaClassifier::fit(train, csp_filters_per_side);
    for (const auto& t : test)
      if (clf.predict(t.data) == *t.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(trials.size());
}

std::vector<ScreeningResult> screen_subjects_detailed(const DatasetManifest& manifest, const ScreeningOptions& options) {
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  std::vector<ScreeningResult> out;
  for (const auto& subject : manifest.subjects) {
    auto trials = load_subject_trials(manifest, subject.id);
    for (auto& t : trials) t = dsp::bandpass(t, options.filter);
    const double acc = within_subject_accuracy(trials, options.folds, options.csp_filters_per_side);
    out.push_back({subject.id, acc, acc >= options.threshold});
  }
  return out;
}

std::vector<std::string> screen_subjects(const DatasetManifest& manifest, const ScreeningOptions& options) {
  std::vector<std::string> kept;
  for (const auto& r : screen_subjects_detailed(manifest, options))
    if (r.retained) kept.push_back(r.subject_id);
  return kept;
}

}  // namespace mieeg::spatial
