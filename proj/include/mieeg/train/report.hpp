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
#include <map>
#include <string>
#include <vector>

#include "mieeg/train/trainer.hpp"

namespace mieeg::train {

/// One accuracy measurement; the flat CSV has exactly these columns.
struct ResultRow {
  std::string dataset;
  std::string subject;
  std::uint64_t seed = 0;
  std::string variant;
  double alpha = 0.0;
  std::string split;  // "test" (report epoch) or "test_best"
  double accuracy = 0.0;  // percent
};

/// Aggregate over seeds of the per-seed mean accuracy across subjects (split "test").
struct SummaryRow {
  std::string dataset;
  std::string variant;
  std::string label;
  double alpha = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single seed
};

struct LossCurve {
  std::string variant;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::vector<EpochLoss> epochs;
};

struct RunReport {
  std::string command;
  std::string config_json = "{}";  // fully resolved configuration
  std::vector<std::string> retained_subjects;
  std::map<std::string, std::uint64_t> split_hashes;  // subject -> fingerprint of its calibration/test split
  std::vector<LossCurve> loss_curves;
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  double wall_seconds = 0.0;  // written to the sidecar only

  std::string to_json() const;   // deterministic; no timing
  std::string to_csv() const;    // flat rows
  std::string summary_csv() const;

  /// Writes <stem>.json, <stem>.csv, <stem>.summary.csv and <stem>.timing.json.
  void write(const std::filesystem::path& stem) const;
};

inline constexpr const char* kCsvHeader = "dataset,subject,seed,variant,alpha,split,accuracy";

/// Mean and sample standard deviation; std is 0 for fewer than two values.
void mean_std(const std::vector<double>& values, double& mean, double& std);

/// Groups rows with split "test" by (dataset, variant, alpha); per seed the accuracies
/// are averaged over subjects, then mean and std are taken over seeds.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

std::string format_accuracy(double value);

}  // namespace mieeg::train
