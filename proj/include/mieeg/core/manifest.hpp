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
#include <string>
#include <vector>

#include "mieeg/core/labels.hpp"
#include "mieeg/core/trial.hpp"

namespace mieeg {

struct SessionEntry {
  std::string id;
  std::vector<std::string> trials;  // paths relative to the manifest directory
};

struct SubjectEntry {
  std::string id;
  std::vector<SessionEntry> sessions;
};

/// JSON document listing a dataset's subjects, sessions and trial files.
///
/// Keys: name, fs, channels, label_vocab, subjects[].id, subjects[].sessions[].id,
/// subjects[].sessions[].trials[].
struct DatasetManifest {
  std::string name;
  double fs = 0.0;
  std::vector<std::string> channels;
  LabelVocab label_vocab;
  std::vector<SubjectEntry> subjects;
  std::filesystem::path root;  // directory the trial paths are relative to; not serialized

  std::size_t trial_count() const;
  const SubjectEntry& subject(const std::string& id) const;
};

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Parses and validates keys; `root` is set to the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Loads every trial of one subject in session/acquisition order, checking each header
/// against the manifest's channel count and fs, and each label against label_vocab.
std::vector<Trial> load_subject_trials(const DatasetManifest& manifest, const std::string& subject_id);

/// Full consistency check of every referenced file.
void verify_manifest(const DatasetManifest& manifest);

}  // namespace mieeg
