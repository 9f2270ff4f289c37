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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>

#include "mieeg/core/split.hpp"
#include "mieeg/core/synth.hpp"
#include "mieeg/spatial/alignment.hpp"
#include "mieeg/train/experiments.hpp"
#include "mieeg/train/mask.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mieeg;
using namespace mieeg::train;

namespace {

// 2 s trials -> H' = 12 with the default tokenizer geometry; a very small encoder.
nn::ModelConfig tiny_model() {
  nn::ModelConfig c;
  c.tokenizer = {25, 5, 4, 8, 8};
  c.encoder.layers = 1;
  c.encoder.dim = 8;
  c.encoder.heads = 2;
  c.encoder.ff_dim = 16;
  c.encoder.dropout = 0.0;
  c.encoder.decoder_layers = 1;
  c.encoder.max_tokens = 16;
  c.channels = 23;
  c.classes = 2;
  return c;
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.model = tiny_model();
  c.batch = 16;
  c.epochs_pretrain = 3;
  c.epochs_finetune = 4;
  c.report_epoch = 2;
  c.seeds = {0, 1};
  return c;
}

SynthConfig small_synth(const std::string& name, int subjects, int offset, std::vector<std::string> classes = {"left_hand", "right_hand"}) {
  SynthConfig s;
  s.name = name;
  s.n_subjects = subjects;
  s.subject_offset = offset;
  s.trials_per_class = 10;
  s.duration = 2.0;
  s.seed = 11;
  s.classes = std::move(classes);
  return s;
}

HarmonizeOptions no_screening() {
  HarmonizeOptions o;
  o.screening = false;
  return o;
}

// One shared corpus: two pretraining subjects, two downstream subjects.
const Corpus& small_corpus() {
  static const Corpus corpus = [] {
    const auto dir = fs::temp_directory_path() / "mieeg_test_train_corpus";
    fs::remove_all(dir);
    const auto pre = synth_dataset(small_synth("pre", 2, 0), dir / "pre");
    const auto down = synth_dataset(small_synth("down", 2, 50), dir / "down");
    return build_corpus({pre}, {down}, no_screening(), 0.3);
  }();
  return corpus;
}

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("mask size rounds and clamps") {
  CHECK(mask_size(25, 0.5) == 13);
  CHECK(mask_size(25, 0.1) == 3);   // 2.5 rounds away from zero
  CHECK(mask_size(25, 0.9) == 23);  // 22.5
  bool clamped = false;
  CHECK(mask_size(25, 0.01, &clamped) == 1);
  CHECK(clamped);
  CHECK(mask_size(25, 0.99, &clamped) == 24);
  CHECK(clamped);
  CHECK(mask_size(25, 0.5, &clamped) == 13);
  CHECK_FALSE(clamped);
  CHECK_THROWS_AS(mask_size(25, 0.0), InvalidArgument);
  CHECK_THROWS_AS(mask_size(25, 1.0), InvalidArgument);
  CHECK_THROWS_AS(mask_size(1, 0.5), InvalidArgument);
}

TEST_CASE("mask sets are uniform without replacement") {
  constexpr int draws = 10000;
  for (double alpha : {0.1, 0.5, 0.75}) {
    const std::size_t h = 20;  // alpha * h is an integer, so the expected frequency is exactly alpha
    std::mt19937_64 rng(3);
    std::vector<int> hits(h, 0);
    for (int d = 0; d < draws; ++d) {
      const auto m = sample_mask_set(h, alpha, rng);
      REQUIRE(m.size() == mask_size(h, alpha));
      REQUIRE(std::set<int>(m.begin(), m.end()).size() == m.size());
      REQUIRE(std::is_sorted(m.begin(), m.end()));
      for (int i : m) ++hits[static_cast<std::size_t>(i)];
    }
    const double sigma = std::sqrt(alpha * (1 - alpha) / draws);
    for (std::size_t i = 0; i < h; ++i) CHECK(std::abs(hits[i] / double(draws) - alpha) <= 3 * sigma);
  }
}

TEST_CASE("mask draws are reproducible and flags follow the batch layout") {
  std::mt19937_64 a(9), b(9);
  for (int k = 0; k < 20; ++k) CHECK(sample_mask_set(25, 0.5, a) == sample_mask_set(25, 0.5, b));
  const auto flags = mask_flags({{0, 2}, {1}}, 3);
  CHECK(flags == std::vector<char>{1, 0, 1, 0, 1, 0});
  CHECK_THROWS_AS(mask_flags({{3}}, 3), InvalidArgument);
}

TEST_CASE("harmonization lands on the template at 250 Hz") {
  SynthConfig s = small_synth("h", 1, 0);
  s.fs = 512.0;
  s.channels = {"Fz", "FC3", "FCz", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CP3", "CPz", "CP4", "Pz"};
  const auto trials = synth_subject(s, 0);
  const auto out = harmonize_trials(trials, no_screening());
  REQUIRE(out.size() == trials.size());
  for (const auto& t : out) {
    CHECK(t.num_channels() == 23);
    CHECK(t.fs == 250.0);
    CHECK(t.num_samples() == 500);
    CHECK(t.channels == template_electrodes());
  }
  CHECK(out[3].label == trials[3].label);
}

TEST_CASE("unified labels") {
  std::vector<Trial> t(2);
  t[0].label = 0;
  t[1].label = 1;
  unify_labels(t, LabelVocab({"feet", "left_hand"}));
  CHECK(*t[0].label == LabelVocab::unified().id_of("feet"));
  CHECK(*t[1].label == LabelVocab::unified().id_of("left_hand"));
  t[0].label = 5;
  CHECK_THROWS_AS(unify_labels(t, LabelVocab({"feet", "left_hand"})), InvalidArgument);
}

TEST_CASE("pretraining sessions have identity mean covariance") {
  const auto dir = fs::temp_directory_path() / "mieeg_test_train_pre";
  fs::remove_all(dir);
  const auto m = synth_dataset(small_synth("p", 2, 0), dir);
  const auto set = prepare_pretraining(m, no_screening());
  CHECK(set.retained.size() == 2);
  REQUIRE(set.sessions.size() == 2);
  for (const auto& s : set.sessions) {
    CHECK(s.trials.size() == 20);
    const Eigen::MatrixXd mean = spatial::mean_covariance(s.trials);
    CHECK((mean - Eigen::MatrixXd::Identity(23, 23)).norm() <= 1e-6);
  }
}

TEST_CASE("downstream alignment never sees test trials") {
  auto trials = harmonize_trials(synth_subject(small_synth("d", 1, 0), 0), no_screening());
  const auto d = prepare_downstream("d", "S0", trials, 0.3);
  const auto split = split_calibration(trials, 0.3);
  CHECK(d.calibration.size() == 6);
  CHECK(d.test.size() == 14);
  const auto oracle_ref = spatial::ea_reference(split.calibration);
  CHECK((d.reference.r_bar - oracle_ref.r_bar).norm() == 0.0);

  // Replace every test trial; the reference and the aligned calibration stay put.
  auto altered = trials;
  std::mt19937_64 rng(1);
  for (std::size_t i = 6; i < altered.size(); ++i) altered[i].data = oracle::random_matrix(23, altered[i].num_samples(), rng) * 50.0;
  const auto d2 = prepare_downstream("d", "S0", altered, 0.3);
  CHECK((d2.reference.r_bar - d.reference.r_bar).norm() == 0.0);
  for (std::size_t i = 0; i < d.calibration.size(); ++i) CHECK(d2.calibration[i].data == d.calibration[i].data);
  CHECK(d2.split_hash != d.split_hash);

  // The calibration side is whitened exactly.
  const Eigen::MatrixXd mean = spatial::mean_covariance(d.calibration);
  CHECK((mean - Eigen::MatrixXd::Identity(23, 23)).norm() <= 1e-6);
}

TEST_CASE("config validation") {
  TrainConfig c = tiny_config();
  CHECK_NOTHROW(c.validate());
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.batch = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.finetune_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.epochs_finetune = 21;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = tiny_config();
  c.finetune_lr = -1e-4;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(parse_variant("no_selfsup") == Variant::no_selfsup);
  CHECK_THROWS_AS(parse_variant("nope"), InvalidArgument);
  CHECK(variant_label(Variant::no_pretrain) == "w/o Pre-training");
  CHECK(variant_label(Variant::no_selfsup) == "w/o Self-supervised");
}

TEST_CASE("pretraining loss decreases over a 30-epoch run") {
  TrainConfig c = tiny_config();
  c.epochs_pretrain = 30;
  // pool 8 averages the 10 Hz rhythm away and the loss sits on a plateau
  c.model.tokenizer.pool = 2;
  c.model.encoder.max_tokens = 64;
  const auto r = pretrain(small_corpus().pretraining, c, 5);
  REQUIRE(r.curve.size() == 30);
  std::vector<double> smooth;
  for (std::size_t e = 4; e < r.curve.size(); ++e) {
    double s = 0;
    for (std::size_t k = e - 4; k <= e; ++k) s += r.curve[k].total;
    smooth.push_back(s / 5);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) CHECK(smooth[i] <= smooth[i - 1]);
  for (const auto& e : r.curve) CHECK(e.total == doctest::Approx(e.rec + e.cls).epsilon(1e-5));
}

TEST_CASE("no_selfsup pretraining records the classification loss only") {
  TrainConfig c = tiny_config();
  c.ablation = Variant::no_selfsup;
  const auto r = pretrain(small_corpus().pretraining, c, 2);
  for (const auto& e : r.curve) {
    CHECK(e.rec == 0.0);
    CHECK(e.total == e.cls);
  }
  c.ablation = Variant::no_pretrain;
  CHECK_THROWS_AS(pretrain(small_corpus().pretraining, c, 2), InvalidArgument);
  CHECK_THROWS_AS(pretrain(std::vector<Trial>{}, tiny_config(), 2), InvalidArgument);
}

TEST_CASE("same seed gives bit-identical checkpoints") {
  const auto dir = fs::temp_directory_path() / "mieeg_test_train_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto c = tiny_config();
  save_state(pretrain(small_corpus().pretraining, c, 4).state, (dir / "a.mirm").string());
  save_state(pretrain(small_corpus().pretraining, c, 4).state, (dir / "b.mirm").string());
  save_state(pretrain(small_corpus().pretraining, c, 5).state, (dir / "c.mirm").string());
  CHECK(slurp(dir / "a.mirm") == slurp(dir / "b.mirm"));
  CHECK(slurp(dir / "a.mirm") != slurp(dir / "c.mirm"));
  const auto back = load_state((dir / "a.mirm").string());
  CHECK(back.classes == std::vector<int>{0, 1});
}

TEST_CASE("head swap for a different downstream label set") {
  // Three pretraining classes: relabel every third trial as feet.
  auto trials = small_corpus().pretraining;
  for (std::size_t i = 0; i < trials.size(); i += 3) trials[i].label = LabelVocab::unified().id_of("feet");
  TrainConfig c = tiny_config();
  c.epochs_pretrain = 1;
  const auto state = pretrain(trials, c, 0).state;
  REQUIRE(state.classes.size() == 3);
  REQUIRE(state.model.config().classes == 3);

  const auto& subject = small_corpus().downstream.front();
  const auto ft = finetune(state, subject, c, 0);
  CHECK(ft.head_reset);
  CHECK(ft.state.classes == std::vector<int>{0, 1});
  CHECK(ft.state.model.config().classes == 2);
  CHECK(ft.state.model.parameters().get("head.weight").value.cols() == 2);
  CHECK(predict_logits(ft.state, subject.test).cols() == 2);

  // Matching label sets keep the head.
  const auto same = finetune(pretrain(small_corpus().pretraining, c, 0).state, subject, c, 0);
  CHECK_FALSE(same.head_reset);
}

TEST_CASE("zero learning rate and frozen body controls") {
  TrainConfig c = tiny_config();
  const auto state = pretrain(small_corpus().pretraining, c, 1).state;
  const auto& subject = small_corpus().downstream.front();
  c.finetune_lr = 0.0;
  const auto ft = finetune(state, subject, c, 3);
  CHECK(ft.initial_accuracy == evaluate(state, subject.test));
  for (double a : ft.test_accuracy) CHECK(a == ft.initial_accuracy);
  CHECK(ft.report_accuracy == ft.initial_accuracy);
  for (std::size_t i = 0; i < state.model.parameters().size(); ++i)
    CHECK(ft.state.model.parameters()[i].value == state.model.parameters()[i].value);

  c = tiny_config();
  c.freeze_body = true;
  const auto frozen = finetune(state, subject, c, 3);
  bool head_moved = false;
  for (std::size_t i = 0; i < state.model.parameters().size(); ++i) {
    const auto& before = state.model.parameters()[i];
    const auto& after = frozen.state.model.parameters()[i];
    if (before.name.rfind("head.", 0) == 0)
      head_moved = head_moved || after.value != before.value;
    else
      CHECK(after.value == before.value);
  }
  CHECK(head_moved);
}

TEST_CASE("fine-tune reporting") {
  TrainConfig c = tiny_config();
  const auto state = pretrain(small_corpus().pretraining, c, 1).state;
  const auto& subject = small_corpus().downstream.back();
  const auto ft = finetune(state, subject, c, 0);
  REQUIRE(ft.test_accuracy.size() == 4);
  CHECK(ft.loss.size() == 4);
  CHECK(ft.report_accuracy == ft.test_accuracy[1]);
  double best = ft.initial_accuracy;
  for (double a : ft.test_accuracy) best = std::max(best, a);
  CHECK(ft.best_accuracy == best);
  for (double a : ft.test_accuracy) {
    CHECK(a >= 0.0);
    CHECK(a <= 100.0);
  }

  DownstreamSubject one_class = subject;
  for (auto& t : one_class.calibration) t.label = 0;
  CHECK_THROWS_AS(finetune(state, one_class, c, 0), InvalidArgument);
}

TEST_CASE("accuracy from logits") {
  Eigen::MatrixXd perfect = Eigen::MatrixXd::Zero(4, 3);
  const std::vector<int> y = {0, 2, 1, 2};
  for (int r = 0; r < 4; ++r) perfect(r, y[static_cast<std::size_t>(r)]) = 1.0;
  CHECK(accuracy_from_logits(perfect, y) == 100.0);

  // Constant logits predict class 0 everywhere: exactly half of a balanced 2-class set.
  const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(10, 2, 0.3);
  CHECK(accuracy_from_logits(constant, {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}) == 50.0);

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cls(0, 3);
  for (int k = 0; k < 50; ++k) {
    const Eigen::MatrixXd z = oracle::random_matrix(12, 4, rng);
    std::vector<int> t(12);
    for (auto& v : t) v = cls(rng);
    CHECK(accuracy_from_logits(z.array() + 7.5, t) == accuracy_from_logits(z, t));
  }
  CHECK_THROWS_AS(accuracy_from_logits(constant, {0}), InvalidArgument);
}

TEST_CASE("reports: flat CSV and summaries") {
  std::vector<ResultRow> rows;
  for (std::uint64_t seed : {0u, 1u, 2u})
    for (const char* subject : {"A", "B"})
      rows.push_back({"ds", subject, seed, "full", 0.5, "test", 50.0 + 10.0 * seed + (subject[0] == 'A' ? 0 : 4)});
  rows.push_back({"ds", "A", 0, "full", 0.5, "test_best", 99.0});
  const auto s = summarize(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].per_seed == std::vector<double>{52.0, 62.0, 72.0});
  CHECK(s[0].mean == doctest::Approx(62.0));
  CHECK(s[0].std == doctest::Approx(10.0));
  CHECK(s[0].label == "Full model");

  RunReport r;
  r.rows = rows;
  r.summary = s;
  const auto csv = r.to_csv();
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  CHECK(csv.find("ds,B,2,full,0.50,test,74.0000\n") != std::string::npos);
  r.wall_seconds = 123.0;
  CHECK(r.to_json().find("wall") == std::string::npos);

  double m = 0, sd = 0;
  mean_std({3.0}, m, sd);
  CHECK(m == 3.0);
  CHECK(sd == 0.0);
}

TEST_CASE("ablation suite and mask sweep tables") {
  TrainConfig c = tiny_config();
  c.epochs_pretrain = 1;
  c.epochs_finetune = 2;
  const auto abl = ablation_suite(small_corpus(), c);
  REQUIRE(abl.summary.size() == 3);
  CHECK(abl.summary[0].variant == "full");
  CHECK(abl.summary[1].variant == "no_selfsup");
  CHECK(abl.summary[2].variant == "no_pretrain");
  for (const auto& row : abl.summary) {
    CHECK(row.per_seed.size() == 2);
    CHECK(row.std >= 0.0);
  }
  // 3 variants x 2 seeds x 2 subjects x 2 splits
  CHECK(abl.rows.size() == 24);
  CHECK(abl.split_hashes.size() == 2);
  CHECK(abl.loss_curves.size() == 4);  // no_pretrain has no pretraining curve

  const auto sweep = mask_sweep(small_corpus(), c);
  REQUIRE(sweep.summary.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(sweep.summary[i].alpha == default_alphas()[i]);
  const auto csv = sweep.summary_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(sweep.split_hashes == abl.split_hashes);
}
