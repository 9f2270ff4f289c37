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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "mieeg/core/labels.hpp"
#include "mieeg/core/manifest.hpp"
#include "mieeg/core/montage.hpp"
#include "mieeg/core/split.hpp"
#include "mieeg/core/synth.hpp"
#include "mieeg/core/trial_io.hpp"
#include "mieeg/error.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mieeg;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mieeg_test_core_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Trial small_trial(Eigen::Index c, Eigen::Index t, std::mt19937_64& rng) {
  Trial trial;
  trial.data = oracle::random_matrix(c, t, rng).cast<float>().cast<double>();
  trial.fs = 250.0;
  for (Eigen::Index i = 0; i < c; ++i) trial.channels.push_back("E" + std::to_string(i));
  trial.label = 1;
  return trial;
}

}  // namespace

TEST_CASE("trial file round-trips float-representable trials bit for bit") {
  const auto dir = scratch("roundtrip");
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 40);
  for (int iter = 0; iter < 50; ++iter) {
    Trial t = small_trial(size(rng), size(rng), rng);
    if (iter % 3 == 0) t.label.reset();
    write_trial_file(t, dir / "t.mirp");
    const Trial back = read_trial_file(dir / "t.mirp");
    CHECK(back.data == t.data);
    CHECK(back.channels == t.channels);
    CHECK(back.fs == t.fs);
    CHECK(back.label == t.label);
  }
}

TEST_CASE("trial file layout: header fields and 48-byte payload for 3x4") {
  const auto dir = scratch("layout");
  std::mt19937_64 rng(1);
  Trial t = small_trial(3, 4, rng);
  t.label = 2;
  write_trial_file(t, dir / "t.mirp");
  const auto bytes = slurp(dir / "t.mirp");
  std::size_t header = 4 + 4 + 4 + 4 + 4 + 4;
  for (const auto& ch : t.channels) header += 2 + ch.size();
  CHECK(bytes.size() - header == 48);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MIRP");
  CHECK(bytes[4] == kTrialFormatVersion);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 4);
  CHECK(bytes[20] == 2);  // label, little-endian i32
}

TEST_CASE("trial file errors") {
  const auto dir = scratch("errors");
  std::mt19937_64 rng(3);
  Trial t = small_trial(2, 5, rng);

  SUBCASE("non-finite sample") {
    t.data(1, 2) = std::nan("");
    CHECK_THROWS_WITH_AS(write_trial_file(t, dir / "nan.mirp"), "non-finite sample", InvalidArgument);
  }
  SUBCASE("bad magic") {
    write_trial_file(t, dir / "t.mirp");
    auto bytes = slurp(dir / "t.mirp");
    bytes[0] = bytes[1] = bytes[2] = bytes[3] = 'X';
    std::ofstream(dir / "bad.mirp", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK_THROWS_AS(read_trial_file(dir / "bad.mirp"), IoError);
    try {
      read_trial_file(dir / "bad.mirp");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
    }
  }
  SUBCASE("version mismatch") {
    write_trial_file(t, dir / "t.mirp");
    auto bytes = slurp(dir / "t.mirp");
    bytes[4] = 99;
    std::ofstream(dir / "ver.mirp", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK_THROWS_AS(read_trial_file(dir / "ver.mirp"), IoError);
  }
  SUBCASE("declared T larger than payload") {
    write_trial_file(t, dir / "t.mirp");
    auto bytes = slurp(dir / "t.mirp");
    bytes[12] = 50;
    std::ofstream(dir / "trunc.mirp", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    try {
      read_trial_file(dir / "trunc.mirp");
      FAIL("expected truncation error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }
}

TEST_CASE("chronological calibration split") {
  std::vector<Trial> trials(100);
  for (int i = 0; i < 100; ++i) trials[i].label = i;
  auto s = split_calibration(trials, 0.3);
  CHECK(s.calibration.size() == 30);
  CHECK(s.test.size() == 70);
  CHECK(*s.calibration.front().label == 0);
  CHECK(*s.test.front().label == 30);

  std::vector<Trial> ten(10);
  s = split_calibration(ten, 0.05);
  CHECK(s.calibration.size() == 1);
  CHECK(s.test.size() == 9);

  CHECK_THROWS_AS(split_calibration(std::vector<Trial>(1), 0.3), InvalidArgument);
  CHECK_THROWS_AS(split_calibration(ten, 0.0), InvalidArgument);
  CHECK_THROWS_AS(split_calibration(ten, 0.95), InvalidArgument);  // ceil(9.5) = 10 leaves no test trial
}

TEST_CASE("label vocabulary") {
  const auto v = LabelVocab::unified();
  CHECK(v.size() == 5);
  CHECK(v.id_of("both feet") == v.id_of("feet"));
  CHECK(v.id_of("Left Hand") == 0);
  CHECK_THROWS_AS(LabelVocab({"left_hand", "Left Hand"}), InvalidArgument);
  const LabelVocab bnci({"right_hand", "both_feet"});
  const auto map = bnci.map_into(v);
  CHECK(map == std::vector<int>{1, 2});
}

TEST_CASE("montage geometry") {
  const auto& m = Montage::standard_1010();
  CHECK(m.position("Cz").norm() < 1e-12);
  CHECK((m.position("C3") - Eigen::Vector2d(-0.5, 0.0)).norm() < 1e-12);
  CHECK((m.position("T8") - Eigen::Vector2d(1.0, 0.0)).norm() < 1e-12);
  CHECK((m.position("Fpz") - Eigen::Vector2d(0.0, 1.0)).norm() < 1e-12);
  CHECK((m.position("fcz") - Eigen::Vector2d(0.0, 0.25)).norm() < 1e-12);
  CHECK(m.position("T3") == m.position("T7"));
  for (const auto& name : m.names()) {
    CHECK(m.position(name).squaredNorm() <= 1.2 * 1.2);
    const auto mirror = Montage::mirror_name(name);
    REQUIRE(m.contains(mirror));
    const Eigen::Vector2d a = m.position(name), b = m.position(mirror);
    CHECK(std::abs(a.x() + b.x()) < 1e-12);
    CHECK(std::abs(a.y() - b.y()) < 1e-12);
  }
  for (const auto& e : template_electrodes()) CHECK(m.contains(e));
  CHECK(template_electrodes().size() == 23);
  CHECK_THROWS_AS(m.position("XYZ"), InvalidArgument);
}

TEST_CASE("manifest round trip and validation") {
  const auto dir = scratch("manifest");
  SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.trials_per_class = 3;
  cfg.seed = 5;
  const auto m = synth_dataset(cfg, dir);
  const auto loaded = load_manifest(dir / "manifest.json");
  CHECK(loaded.name == m.name);
  CHECK(loaded.channels == m.channels);
  CHECK(loaded.subjects.size() == 2);
  CHECK(loaded.trial_count() == 12);
  CHECK_NOTHROW(verify_manifest(loaded));
  const auto trials = load_subject_trials(loaded, "S01");
  CHECK(trials.size() == 6);
  CHECK(trials.front().subject_id == "S01");

  SUBCASE("unknown keys are rejected") {
    std::ofstream(dir / "bad.json") << R"({"name":"x","fs":250,"channels":[],"label_vocab":[],"subjects":[],"extra":1})";
    CHECK_THROWS_AS(load_manifest(dir / "bad.json"), InvalidArgument);
  }
  SUBCASE("header mismatch is detected") {
    auto wrong = loaded;
    wrong.fs = 512.0;
    CHECK_THROWS_AS(verify_manifest(wrong), InvalidArgument);
    wrong = loaded;
    wrong.channels.pop_back();
    CHECK_THROWS_AS(verify_manifest(wrong), InvalidArgument);
  }
}

TEST_CASE("synthetic generator is deterministic byte for byte") {
  SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.trials_per_class = 4;
  cfg.seed = 11;
  const auto a = scratch("det_a"), b = scratch("det_b");
  synth_dataset(cfg, a);
  synth_dataset(cfg, b);
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    CHECK(slurp(entry.path()) == slurp(b / rel));
  }
  cfg.seed = 12;
  CHECK(synth_subject(cfg, 0)[0].data != synth_subject(SynthConfig{.n_subjects = 2, .trials_per_class = 4, .seed = 11}, 0)[0].data);
}

TEST_CASE("synthetic generator contract") {
  SynthConfig cfg;
  cfg.trials_per_class = 5;
  const auto trials = synth_subject(cfg, 0);
  CHECK(trials.size() == 10);
  CHECK(trials.front().data.rows() == 23);
  CHECK(trials.front().data.cols() == 1000);
  int left = 0;
  for (const auto& t : trials) left += *t.label == 0;
  CHECK(left == 5);

  cfg.classes = {"left_hand", "tongue"};
  CHECK_THROWS_AS(synth_subject(cfg, 0), InvalidArgument);
  cfg.classes = {"left_hand", "right_hand"};
  cfg.duration = 0.5;
  CHECK_THROWS_AS(synth_subject(cfg, 0), InvalidArgument);
}

TEST_CASE("synthetic ERD lateralization matches the Welch periodogram oracle") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.trials_per_class = 30;
  cfg.seed = 21;
  const auto& chans = template_electrodes();
  const auto c3 = std::find(chans.begin(), chans.end(), "C3") - chans.begin();
  const auto c4 = std::find(chans.begin(), chans.end(), "C4") - chans.begin();
  for (int s = 0; s < cfg.n_subjects; ++s) {
    const auto trials = synth_subject(cfg, s);
    double c3_left = 0, c3_right = 0, c4_left = 0, c4_right = 0;
    for (const auto& t : trials) {
      const double p3 = oracle::welch_band_power(t.data.row(c3).transpose(), cfg.fs, 8, 13);
      const double p4 = oracle::welch_band_power(t.data.row(c4).transpose(), cfg.fs, 8, 13);
      (*t.label == 0 ? c3_left : c3_right) += p3;
      (*t.label == 0 ? c4_left : c4_right) += p4;
    }
    CAPTURE(s);
    CHECK(c3_right < c3_left);  // right-hand imagery desynchronizes C3
    CHECK(c4_left < c4_right);  // left-hand imagery desynchronizes C4
  }
}

TEST_CASE("pink noise has a falling spectrum") {
  const auto x = pink_noise(4096, 3);
  CHECK(std::abs(x.mean()) < 1e-9);
  CHECK(std::abs(oracle::rms(x) - 1.0) < 1e-9);
  const double low = oracle::welch_band_power(x, 256, 2, 4, 256) / 3.0;
  const double high = oracle::welch_band_power(x, 256, 32, 64, 256) / 33.0;
  CHECK(low > 4.0 * high);
}
