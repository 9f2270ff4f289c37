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

#include <string>
#include <vector>

#include "mieeg/core/manifest.hpp"
#include "mieeg/core/trial.hpp"
#include "mieeg/dsp/bandpass.hpp"

namespace mieeg::spatial {

struct ScreeningOptions {
  double threshold = 0.60;  // minimum within-subject accuracy, in [0, 1]
  int folds = 5;
  int csp_filters_per_side = 3;
  dsp::FilterSpec filter;  // applied before CSP by screen_subjects(manifest, ...)
};

/// Stratified k-fold assignment: within each class, the r-th trial (in order) goes to fold r mod k.
std::vector<int> stratified_folds(const std::vector<Trial>& trials, int folds);

/// Mean held-out accuracy of CSP+LDA under stratified k-fold cross-validation.
/// Throws when a class has fewer than 2 * folds trials.
double within_subject_accuracy(const std::vector<Trial>& trials, int folds = 5, int csp_filters_per_side = 3);

struct ScreeningResult {
  std::string subject_id;
  double accuracy = 0.0;
  bool retained = false;
};

/// Screens every subject of a manifest; trials are bandpassed with options.filter first.
std::vector<ScreeningResult> screen_subjects_detailed(const DatasetManifest& manifest, const ScreeningOptions& options);

/// Ids of subjects whose cross-validated accuracy reaches the threshold.
std::vector<std::string> screen_subjects(const DatasetManifest& manifest, const ScreeningOptions& options = {});

}  // namespace mieeg::spatial
