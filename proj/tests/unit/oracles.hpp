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

// Independent reference computations used as test oracles. Nothing here calls
// into the library's DSP or model code.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// Hann-windowed DFT amplitude of `x` at frequency `hz`, scaled so a unit sine reads 1.
inline double tone_amplitude(const Eigen::VectorXd& x, double hz, double fs) {
  const auto n = x.size();
  std::complex<double> acc = 0.0;
  double wsum = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t / (n - 1));
    acc += w * x(t) * std::polar(1.0, -2.0 * std::numbers::pi * hz * t / fs);
    wsum += w;
  }
  return 2.0 * std::abs(acc) / wsum;
}

/// Frequency (on a 0.05 Hz grid up to fs/2) of the largest Hann-windowed DFT amplitude.
inline double peak_frequency(const Eigen::VectorXd& x, double fs, double lo = 0.5) {
  double best = lo, best_amp = -1.0;
  for (double f = lo; f < fs / 2.0; f += 0.05) {
    const double a = tone_amplitude(x, f, fs);
    if (a > best_amp) {
      best_amp = a;
      best = f;
    }
  }
  return best;
}

/// Welch periodogram band power: Hann segments of `seg` samples, 50 % overlap, plain DFT.
inline double welch_band_power(const Eigen::VectorXd& x, double fs, double lo, double hi, Eigen::Index seg = 250) {
  seg = std::min<Eigen::Index>(seg, x.size());
  double total = 0.0;
  int count = 0;
  for (Eigen::Index start = 0; start + seg <= x.size(); start += seg / 2) {
    for (Eigen::Index k = 0; k <= seg / 2; ++k) {
      const double f = k * fs / static_cast<double>(seg);
      if (f < lo || f > hi) continue;
      std::complex<double> acc = 0.0;
      for (Eigen::Index t = 0; t < seg; ++t) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t / (seg - 1));
        acc += w * x(start + t) * std::polar(1.0, -2.0 * std::numbers::pi * k * t / static_cast<double>(seg));
      }
      total += std::norm(acc);
    }
    ++count;
  }
  return total / count;
}

inline double rms(const Eigen::VectorXd& x) { return std::sqrt(x.squaredNorm() / static_cast<double>(x.size())); }

inline Eigen::VectorXd sine(Eigen::Index n, double hz, double fs, double amp = 1.0, double phase = 0.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x(t) = amp * std::sin(2.0 * std::numbers::pi * hz * t / fs + phase);
  return x;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace oracle
