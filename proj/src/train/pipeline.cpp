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

#include "mieeg/train/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <future>
#include <map>

#include "mieeg/core/labels.hpp"
#include "mieeg/core/split.hpp"
#include "mieeg/error.hpp"

namespace mieeg::train {

Trial harmonize_trial(const Trial& trial, const HarmonizeOptions& options) {
  Trial t = dsp::bandpass(trial, options.filter);
  t = dsp::resample(t, options.resample);
  const auto weights = spatial::template_weights(options.templ, t.channels, options.templ.montage);
  return spatial::apply_template(t, weights);
}

std::vector<Trial> harmonize_trials(const std::vector<Trial>& trials, const HarmonizeOptions& options) {
  std::vector<Trial> out(trials.size());
  // Each worker owns a contiguous slice, so the result does not depend on the thread count.
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::string> last_channels;
    spatial::TemplateWeights weights;
    for (std::size_t i = begin; i < end; ++i) {
      Trial t = dsp::resample(dsp::bandpass(trials[i], options.filter), options.resample);
      if (t.channels != last_channels) {
        weights = spatial::template_weights(options.templ, t.channels, options.templ.montage);
        last_channels = t.channels;
      }
      out[i] = spatial::apply_template(t, weights);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.jobs, 1)), 1, std::max<std::size_t>(trials.size(), 1));
  if (jobs == 1) {
    work(0, trials.size());
    return out;
  }
  std::vector<std::future<void>> tasks;
  const std::size_t per = (trials.size() + jobs - 1) / jobs;
  for (std::size_t b = 0; b < trials.size(); b += per)
    tasks.push_back(std::async(std::launch::async, work, b, std::min(trials.size(), b + per)));
  for (auto& t : tasks) t.get();  // rethrows the first failure
  return out;
}

void unify_labels(std::vector<Trial>& trials, const LabelVocab& source) {
  const auto unified = LabelVocab::unified();
  const auto map = source.map_into(unified);
  for (auto& t : trials) {
    if (!t.label) continue;
    if (*t.label < 0 || static_cast<std::size_t>(*t.label) >= map.size())
      throw InvalidArgument("label " + std::to_string(*t.label) + " outside the dataset vocabulary");
    t.label = map[static_cast<std::size_t>(*t.label)];
  }
}

PretrainingSet prepare_pretraining(const DatasetManifest& manifest, const HarmonizeOptions& options) {
  PretrainingSet out;
  std::vector<std::string> keep;
  if (options.screening) {
    auto screen = options.screen;
    screen.filter = options.filter;
    out.screening = spatial::screen_subjects_detailed(manifest, screen);
    for (const auto& r : out.screening)
      if (r.retained) keep.push_back(r.subject_id);
  } else {
    for (const auto& s : manifest.subjects) keep.push_back(s.id);
  }
  out.retained = keep;

  for (const auto& id : keep) {
    auto trials = load_subject_trials(manifest, id);
    unify_labels(trials, manifest.label_vocab);
    std::map<std::string, std::vector<Trial>> by_session;
    std::vector<std::string> order;
    for (auto& t : trials) {
      if (!by_session.count(t.session_id)) order.push_back(t.session_id);
      by_session[t.session_id].push_back(std::move(t));
    }
    for (const auto& ses : order) {
      AlignedSession s;
      s.dataset = manifest.name;
      s.subject_id = id;
      s.session_id = ses;
      const auto harmonized = harmonize_trials(by_session[ses], options);
      s.reference = spatial::ea_reference(harmonized);
      s.trials.reserve(harmonized.size());
      for (const auto& t : harmonized) s.trials.push_back(spatial::ea_whiten(t, s.reference));
      out.sessions.push_back(std::move(s));
    }
  }
  return out;
}

DownstreamSubject prepare_downstream(const std::string& dataset, const std::string& subject_id,
                                     const std::vector<Trial>& trials, double calibration_fraction) {
  const auto split = split_calibration(trials, calibration_fraction);
  DownstreamSubject d;
  d.dataset = dataset;
  d.subject_id = subject_id;
  d.reference = spatial::ea_reference(split.calibration);  // test trials never enter the reference
  for (const auto& t : split.calibration) d.calibration.push_back(spatial::ea_whiten(t, d.reference));
  for (const auto& t : split.test) d.test.push_back(spatial::ea_whiten(t, d.reference));
  d.split_hash = trials_fingerprint(d.test, trials_fingerprint(d.calibration));
  return d;
}

std::vector<DownstreamSubject> prepare_downstream(const DatasetManifest& manifest, const HarmonizeOptions& options,
                                                  double calibration_fraction) {
  std::vector<DownstreamSubject> out;
  for (const auto& s : manifest.subjects) {
    auto trials = load_subject_trials(manifest, s.id);
    unify_labels(trials, manifest.label_vocab);
    out.push_back(prepare_downstream(manifest.name, s.id, harmonize_trials(trials, options), calibration_fraction));
  }
  return out;
}

std::uint64_t trials_fingerprint(const std::vector<Trial>& trials, std::uint64_t seed) {
  std::uint64_t h = seed;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& t : trials) {
    mix(t.subject_id.data(), t.subject_id.size());
    mix(t.session_id.data(), t.session_id.size());
    const int label = t.label.value_or(-1);
    mix(&label, sizeof label);
    mix(t.data.data(), static_cast<std::size_t>(t.data.size()) * sizeof(double));
  }
  return h;
}

}  // namespace mieeg::train
