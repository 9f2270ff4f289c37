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

#include "mieeg/core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <unsupported/Eigen/FFT>

#include "mieeg/core/montage.hpp"
#include "mieeg/core/trial_io.hpp"
#include "mieeg/error.hpp"

namespace mieeg {
namespace {

void check_config(const SynthConfig& config) {
  if (config.n_subjects < 1) throw InvalidArgument("n_subjects must be >= 1");
  if (config.trials_per_class < 1) throw InvalidArgument("trials_per_class must be >= 1");
  if (config.classes.empty()) throw InvalidArgument("unsupported class set: empty");
  for (const auto& c : config.classes) {
    const auto canon = canonical_label(c);
    if (canon != "left_hand" && canon != "right_hand") throw InvalidArgument("unsupported class set: " + c);
  }
  if (!(config.fs > 0)) throw InvalidArgument("fs must be positive");
  if (config.duration * config.fs < 250.0 - 1e-9) throw InvalidArgument("duration * fs must be >= 250 samples");
}

std::mt19937_64 subject_rng(std::uint64_t seed, const std::string& subject_id) {
  const std::uint64_t h = fnv1a(subject_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

// Unit-RMS narrowband process: Gaussian spectral bump of width `bw` Hz at `hz`, random phases.
Eigen::VectorXd narrowband(Eigen::Index n, double hz, double bw, double fs, std::mt19937_64& rng) {
  Eigen::Index m = 1;
  while (m < n) m <<= 1;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index k = 1; k < m / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(m);
    const double g = std::exp(-0.5 * (f - hz) * (f - hz) / (bw * bw));
    const std::complex<double> c(g * normal(rng), g * normal(rng));
    spec[static_cast<std::size_t>(k)] = c;
    spec[static_cast<std::size_t>(m - k)] = std::conj(c);
  }
  Eigen::FFT<double> fft;
  std::vector<double> out;
  fft.inv(out, spec);
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(out.data(), n);
  const double r = std::sqrt(x.squaredNorm() / static_cast<double>(n));
  return r > 0 ? Eigen::VectorXd(x / r) : x;
}

}  // namespace

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Eigen::VectorXd pink_noise(Eigen::Index n, std::uint64_t seed) {
  Eigen::Index m = 1;
  while (m < n) m <<= 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(static_cast<std::size_t>(m));
  for (auto& w : white) w = normal(rng);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, white);
  spec[0] = 0.0;
  for (Eigen::Index k = 1; k < m; ++k) {
    const Eigen::Index f = std::min(k, m - k);
    spec[static_cast<std::size_t>(k)] /= std::sqrt(static_cast<double>(f));
  }
  std::vector<double> shaped;
  fft.inv(shaped, spec);

  Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(shaped.data(), n);
  out.array() -= out.mean();
  const double sd = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  if (sd > 0) out /= sd;
  return out;
}

std::string synth_subject_id(const SynthConfig& config, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02d", config.subject_prefix.c_str(), config.subject_offset + index);
  return buf;
}

std::vector<Trial> synth_subject(const SynthConfig& config, int index) {
  check_config(config);
  const auto& montage = Montage::standard_1010();
  const std::vector<std::string> channels = config.channels.empty() ? template_electrodes() : config.channels;
  for (const auto& ch : channels)
    if (!montage.contains(ch)) throw InvalidArgument("unknown electrode: " + ch);

  const std::string subject_id = synth_subject_id(config, index);
  auto rng = subject_rng(config.seed, subject_id);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Per-subject draws.
  const double erd = uniform(config.erd_min, config.erd_max);
  const double gain = uniform(0.5, 2.0);
  const double freq = config.mu_frequency + uniform(-1.0, 1.0);
  const Eigen::Vector2d jitter(uniform(-0.04, 0.04), uniform(-0.04, 0.04));
  const Eigen::Vector2d src_left = montage.position("C3") + jitter;
  const Eigen::Vector2d src_right = montage.position("C4") + Eigen::Vector2d(-jitter.x(), jitter.y());
  const auto n_ch = static_cast<Eigen::Index>(channels.size());
  Eigen::VectorXd noise_level(n_ch), lead_left(n_ch), lead_right(n_ch);
  const double two_s2 = 2.0 * config.spread * config.spread;
  for (Eigen::Index c = 0; c < n_ch; ++c) {
    noise_level(c) = uniform(0.7, 1.3);
    const Eigen::Vector2d p = montage.position(channels[static_cast<std::size_t>(c)]);
    lead_left(c) = std::exp(-(p - src_left).squaredNorm() / two_s2);
    lead_right(c) = std::exp(-(p - src_right).squaredNorm() / two_s2);
  }

  std::vector<std::string> classes;
  for (const auto& c : config.classes) classes.push_back(canonical_label(c));
  std::vector<int> order;
  for (std::size_t k = 0; k < classes.size(); ++k)
    for (int i = 0; i < config.trials_per_class; ++i) order.push_back(static_cast<int>(k));
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_samples = static_cast<Eigen::Index>(std::llround(config.duration * config.fs));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Trial> trials;
  trials.reserve(order.size());
  for (int cls : order) {
    const bool left_hand = classes[static_cast<std::size_t>(cls)] == "left_hand";
    // Trial-level rhythm strength is mostly shared by both hemispheres.
    const double common = std::exp(0.25 * normal(rng));
    double amp_left = config.mu_amplitude * common * std::exp(0.1 * normal(rng));
    double amp_right = config.mu_amplitude * common * std::exp(0.1 * normal(rng));
    if (left_hand)
      amp_right *= erd;  // right hemisphere (C4) desynchronizes
    else
      amp_left *= erd;
    // Rhythm amplitude is RMS * sqrt(2), so mu_amplitude reads as a sinusoid peak.
    const Eigen::VectorXd rhythm_left = std::sqrt(2.0) * amp_left * narrowband(n_samples, freq, 0.5, config.fs, rng);
    const Eigen::VectorXd rhythm_right = std::sqrt(2.0) * amp_right * narrowband(n_samples, freq, 0.5, config.fs, rng);

    Eigen::MatrixXd x(n_ch, n_samples);
    for (Eigen::Index c = 0; c < n_ch; ++c) x.row(c) = noise_level(c) * pink_noise(n_samples, rng()).transpose();
    x += lead_left * rhythm_left.transpose() + lead_right * rhythm_right.transpose();
    x *= gain;

    Trial trial;
    trial.data = std::move(x);
    trial.label = cls;
    trial.fs = config.fs;
    trial.channels = channels;
    trial.subject_id = subject_id;
    trial.session_id = "0";
    trials.push_back(std::move(trial));
  }
  return trials;
}

DatasetManifest synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  check_config(config);
  std::filesystem::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.name = config.name;
  manifest.fs = config.fs;
  manifest.channels = config.channels.empty() ? template_electrodes() : config.channels;
  manifest.label_vocab = LabelVocab(config.classes);
  manifest.root = out_dir;
  for (int s = 0; s < config.n_subjects; ++s) {
    const auto trials = synth_subject(config, s);
    SubjectEntry subject{synth_subject_id(config, s), {}};
    SessionEntry session{"0", {}};
    const auto dir = std::filesystem::path(subject.id) / "ses-0";
    std::filesystem::create_directories(out_dir / dir);
    for (std::size_t i = 0; i < trials.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "trial-%04zu.mirp", i);
      const auto rel = dir / name;
      write_trial_file(trials[i], out_dir / rel);
      session.trials.push_back(rel.generic_string());
    }
    subject.sessions.push_back(std::move(session));
    manifest.subjects.push_back(std::move(subject));
  }
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace mieeg
