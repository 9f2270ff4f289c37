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

#include "mieeg/core/manifest.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "mieeg/core/trial_io.hpp"
#include "mieeg/error.hpp"

namespace mieeg {
namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InvalidArgument("unknown key '" + it.key() + "' in " + where);
  for (const auto& k : allowed)
    if (!j.contains(k)) throw InvalidArgument("missing key '" + k + "' in " + where);
}

}  // namespace

std::size_t DatasetManifest::trial_count() const {
  std::size_t n = 0;
  for (const auto& s : subjects)
    for (const auto& ses : s.sessions) n += ses.trials.size();
  return n;
}

const SubjectEntry& DatasetManifest::subject(const std::string& id) const {
  for (const auto& s : subjects)
    if (s.id == id) return s;
  throw InvalidArgument("unknown subject '" + id + "' in dataset " + name);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  json j;
  j["name"] = manifest.name;
  j["fs"] = manifest.fs;
  j["channels"] = manifest.channels;
  j["label_vocab"] = manifest.label_vocab.names();
  json subjects = json::array();
  for (const auto& s : manifest.subjects) {
    json sessions = json::array();
    for (const auto& ses : s.sessions) sessions.push_back({{"id", ses.id}, {"trials", ses.trials}});
    subjects.push_back({{"id", s.id}, {"sessions", sessions}});
  }
  j["subjects"] = subjects;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest: " + path.string());
  f << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest: " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw InvalidArgument("manifest parse error: " + std::string(e.what()));
  }
  require_keys(j, {"name", "fs", "channels", "label_vocab", "subjects"}, "manifest");

  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.fs = j.at("fs").get<double>();
    m.channels = j.at("channels").get<std::vector<std::string>>();
    m.label_vocab = LabelVocab(j.at("label_vocab").get<std::vector<std::string>>());
    for (const auto& sj : j.at("subjects")) {
      require_keys(sj, {"id", "sessions"}, "subject entry");
      SubjectEntry s;
      s.id = sj.at("id").get<std::string>();
      for (const auto& sesj : sj.at("sessions")) {
        require_keys(sesj, {"id", "trials"}, "session entry");
        s.sessions.push_back({sesj.at("id").get<std::string>(), sesj.at("trials").get<std::vector<std::string>>()});
      }
      m.subjects.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("manifest schema error: " + std::string(e.what()));
  }
  if (!(m.fs > 0)) throw InvalidArgument("manifest fs must be positive");
  m.root = path.parent_path();
  return m;
}

std::vector<Trial> load_subject_trials(const DatasetManifest& manifest, const std::string& subject_id) {
  const auto& subject = manifest.subject(subject_id);
  std::vector<Trial> out;
  for (const auto& ses : subject.sessions) {
    for (const auto& rel : ses.trials) {
      Trial t = read_trial_file(manifest.root / rel);
      if (t.data.rows() != static_cast<Eigen::Index>(manifest.channels.size()))
        throw InvalidArgument(rel + ": channel count " + std::to_string(t.data.rows()) +
                              " does not match manifest (" + std::to_string(manifest.channels.size()) + ")");
      if (std::abs(t.fs - manifest.fs) > 1e-3 * manifest.fs)
        throw InvalidArgument(rel + ": fs does not match manifest");
      if (t.label && (*t.label < 0 || static_cast<std::size_t>(*t.label) >= manifest.label_vocab.size()))
        throw InvalidArgument(rel + ": label outside label_vocab");
      t.subject_id = subject.id;
      t.session_id = ses.id;
      out.push_back(std::move(t));
    }
  }
  return out;
}

void verify_manifest(const DatasetManifest& manifest) {
  for (const auto& s : manifest.subjects) (void)load_subject_trials(manifest, s.id);
}

}  // namespace mieeg
