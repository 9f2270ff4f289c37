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
#include <filesystem>
#include <string>
#include <vector>

#include "mieeg/core/manifest.hpp"
#include "mieeg/core/trial.hpp"

namespace mieeg {

/// Synthetic motor-imagery corpus: pink background noise on every channel plus
/// a mu-rhythm (~10 Hz) source under C3 and under C4. Imagining one hand
/// desynchronizes the contralateral source (left_hand -> C4, right_hand -> C3)
/// by a per-subject ERD factor.
struct SynthConfig {
  std::string name = "synth";
  int n_subjects = 4;
  int trials_per_class = 100;
  std::vector<std::string> classes = {"left_hand", "right_hand"};
  double fs = 250.0;
  double duration = 4.0;  // seconds
  std::uint64_t seed = 0;
  std::vector<std::string> channels;  // empty -> the 23 template electrodes
  std::string subject_prefix = "S";
  int subject_offset = 0;  // first subject number, so corpora can share a seed without sharing subjects

  double erd_min = 0.3;
  double erd_max = 0.7;
  double mu_amplitude = 1.0;    // relative to unit-variance pink noise
  double mu_frequency = 10.0;   // Hz, per-subject jitter of +-1 Hz
  double spread = 0.18;         // Gaussian source spread on the projected scalp
};

std::string synth_subject_id(const SynthConfig& config, int index);

/// Trials of one subject in acquisition order (class order shuffled). Pure function of
/// (config, index).
std::vector<Trial> synth_subject(const SynthConfig& config, int index);

/// Writes <out_dir>/manifest.json plus <out_dir>/<subject>/ses-0/trial-NNNN.mirp.
DatasetManifest synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

/// 1/f noise with unit standard deviation.
Eigen::VectorXd pink_noise(Eigen::Index n, std::uint64_t seed);

/// Stable 64-bit FNV-1a, used to derive per-subject seeds.
std::uint64_t fnv1a(std::string_view s);

}  // namespace mieeg
