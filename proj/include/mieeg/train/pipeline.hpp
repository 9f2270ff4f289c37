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
#include <string>
#include <vector>

#include "mieeg/core/manifest.hpp"
#include "mieeg/core/trial.hpp"
#include "mieeg/dsp/bandpass.hpp"
#include "mieeg/dsp/resample.hpp"
#include "mieeg/spatial/alignment.hpp"
#include "mieeg/spatial/screening.hpp"
#include "mieeg/spatial/template.hpp"

namespace mieeg::train {

struct HarmonizeOptions {
  dsp::FilterSpec filter;
  dsp::ResampleSpec resample;
  spatial::TemplateSpec templ = spatial::TemplateSpec::standard();
  bool screening = true;  // applied to pretraining sets only
  spatial::ScreeningOptions screen;
  int jobs = 1;  // worker threads for per-trial harmonization
};

/// Bandpass, resample, template interpolation. No alignment.
Trial harmonize_trial(const Trial& trial, const HarmonizeOptions& options);
std::vector<Trial> harmonize_trials(const std::vector<Trial>& trials, const HarmonizeOptions& options);

/// One subject-session after harmonization and alignment.
struct AlignedSession {
  std::string dataset;
  std::string subject_id;
  std::string session_id;
  spatial::AlignReference reference;
  std::vector<Trial> trials;  // whitened, labels in the unified vocabulary
};

struct PretrainingSet {
  std::vector<AlignedSession> sessions;
  std::vector<std::string> retained;  // subject ids that passed screening (all when screening is off)
  std::vector<spatial::ScreeningResult> screening;
};

/// Harmonizes every subject of `manifest`, optionally screens subjects, then fits one
/// alignment reference per subject-session on all of that session's trials.
PretrainingSet prepare_pretraining(const DatasetManifest& manifest, const HarmonizeOptions& options);

/// A downstream subject: chronological calibration/test split with the alignment
/// reference fitted on calibration trials only.
struct DownstreamSubject {
  std::string dataset;
  std::string subject_id;
  spatial::AlignReference reference;
  std::vector<Trial> calibration;  // whitened
  std::vector<Trial> test;         // whitened with the calibration reference
  std::uint64_t split_hash = 0;    // fingerprint of the aligned calibration and test trials
};

/// `trials` must already be harmonized (not aligned) and in acquisition order.
DownstreamSubject prepare_downstream(const std::string& dataset, const std::string& subject_id,
                                     const std::vector<Trial>& trials, double calibration_fraction);

std::vector<DownstreamSubject> prepare_downstream(const DatasetManifest& manifest, const HarmonizeOptions& options,
                                                  double calibration_fraction);

/// Rewrites labels from the manifest vocabulary into the unified vocabulary.
void unify_labels(std::vector<Trial>& trials, const LabelVocab& source);

/// FNV-1a over the given trials' ids, labels and raw sample bytes.
std::uint64_t trials_fingerprint(const std::vector<Trial>& trials, std::uint64_t seed = 1469598103934665603ull);

}  // namespace mieeg::train
