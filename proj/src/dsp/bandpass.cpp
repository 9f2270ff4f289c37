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

#include "mieeg/dsp/bandpass.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "mieeg/error.hpp"

namespace mieeg::dsp {
namespace {

using cplx = std::complex<double>;

void check_spec(const FilterSpec& spec, double fs) {
  if (spec.order < 1) throw InvalidArgument("filter order must be >= 1");
  if (!(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < fs / 2.0))
    throw InvalidArgument("band outside Nyquist: need 0 < low < high < fs/2");
}

// Steady-state DF2T states of each section for a unit step input.
std::vector<std::pair<double, double>> step_state(const std::vector<Biquad>& sos) {
  std::vector<std::pair<double, double>> zi;
  double u = 1.0;
  for (const auto& s : sos) {
    const double g = u * (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double z2 = s.b2 * u - s.a2 * g;
    const double z1 = s.b1 * u - s.a1 * g + z2;
    zi.emplace_back(z1, z2);
    u = g;
  }
  return zi;
}

void run_cascade(const std::vector<Biquad>& sos, std::vector<std::pair<double, double>> state, double scale,
                 Eigen::VectorXd& x) {
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& s = sos[k];
    double z1 = state[k].first * scale;
    double z2 = state[k].second * scale;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
      const double in = x(t);
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      x(t) = y;
    }
  }
}

Eigen::VectorXd forward_backward(const std::vector<Biquad>& sos, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const auto ntaps = static_cast<Eigen::Index>(2 * sos.size() + 1);
  const Eigen::Index pad = std::min<Eigen::Index>(3 * ntaps, n - 1);

  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) ext(i) = 2.0 * x(0) - x(pad - i);
  ext.segment(pad, n) = x;
  for (Eigen::Index i = 0; i < pad; ++i) ext(pad + n + i) = 2.0 * x(n - 1) - x(n - 2 - i);

  const auto zi = step_state(sos);
  run_cascade(sos, zi, ext(0), ext);
  ext.reverseInPlace();
  run_cascade(sos, zi, ext(0), ext);
  ext.reverseInPlace();
  return ext.segment(pad, n);
}

}  // namespace

std::vector<Biquad> butterworth_bandpass(const FilterSpec& spec, double fs) {
  check_spec(spec, fs);
  const int n = spec.order;
  const double w1 = 2.0 * fs * std::tan(std::numbers::pi * spec.low_hz / fs);
  const double w2 = 2.0 * fs * std::tan(std::numbers::pi * spec.high_hz / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  std::vector<cplx> zpoles;
  for (int k = 0; k < n; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n));
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0sq);
    for (const cplx s : {half + root, half - root}) zpoles.push_back((2.0 * fs + s) / (2.0 * fs - s));
  }

  // Pair conjugates; leftover real poles pair with each other.
  std::vector<cplx> upper, real;
  for (const auto& z : zpoles) {
    if (z.imag() > 1e-12)
      upper.push_back(z);
    else if (std::abs(z.imag()) <= 1e-12)
      real.push_back(z);
  }
  std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  std::vector<Biquad> sos;
  for (const auto& z : upper) sos.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  std::sort(real.begin(), real.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i + 1 < real.size(); i += 2)
    sos.push_back({1.0, 0.0, -1.0, -(real[i].real() + real[i + 1].real()), real[i].real() * real[i + 1].real()});

  const double centre = 2.0 * std::atan(std::sqrt(w0sq) / (2.0 * fs)) * fs / (2.0 * std::numbers::pi);
  const double gain = std::abs(frequency_response(sos, centre, fs));
  const double per_section = std::pow(gain, -1.0 / static_cast<double>(sos.size()));
  for (auto& s : sos) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  return sos;
}

std::complex<double> frequency_response(const std::vector<Biquad>& sos, double hz, double fs) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * hz / fs);
  cplx h = 1.0;
  for (const auto& s : sos)
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  return h;
}

Eigen::VectorXd sosfilt(const std::vector<Biquad>& sos, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd y = x;
  run_cascade(sos, std::vector<std::pair<double, double>>(sos.size(), {0.0, 0.0}), 0.0, y);
  return y;
}

Eigen::VectorXd filtfilt(const std::vector<Biquad>& sos, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() < 2) throw InvalidArgument("trial too short for zero-phase filtering");
  const Eigen::VectorXd fwd = forward_backward(sos, x);
  Eigen::VectorXd rev = x.reverse();
  Eigen::VectorXd back = forward_backward(sos, rev);
  return 0.5 * (fwd + back.reverse());
}

Eigen::MatrixXd bandpass(const Eigen::MatrixXd& x, const FilterSpec& spec, double fs) {
  check_spec(spec, fs);
  if (x.cols() <= 3 * spec.order)
    throw InvalidArgument("trial too short: " + std::to_string(x.cols()) + " samples, need more than " +
                          std::to_string(3 * spec.order));
  const auto sos = butterworth_bandpass(spec, fs);
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = filtfilt(sos, x.row(r).transpose()).transpose();
  return out;
}

Trial bandpass(const Trial& trial, const FilterSpec& spec) { return trial.with_data(bandpass(trial.data, spec, trial.fs)); }

}  // namespace mieeg::dsp
