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

#include "mieeg/dsp/resample.hpp"

#include <cmath>
#include <numeric>
#include <numbers>

#include "mieeg/error.hpp"

namespace mieeg::dsp {
namespace {

constexpr std::int64_t kRateScale = 1000;  // rates are resolved to 1 mHz
constexpr std::int64_t kMaxTabulatedPhases = 4096;
constexpr double kCutoffMargin = 0.95;

Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

PolyphaseResampler::PolyphaseResampler(double fs_in, double fs_out, const ResampleSpec& spec) {
  if (!(fs_in > 0) || !(fs_out > 0)) throw InvalidArgument("sampling rates must be positive");
  if (spec.kernel_half_width < 1) throw InvalidArgument("kernel_half_width must be >= 1");
  const auto in = static_cast<std::int64_t>(std::llround(fs_in * kRateScale));
  const auto out = static_cast<std::int64_t>(std::llround(fs_out * kRateScale));
  const std::int64_t g = std::gcd(in, out);
  up_ = out / g;
  down_ = in / g;
  beta_ = spec.window_beta;
  cutoff_ = kCutoffMargin * std::min(1.0, static_cast<double>(up_) / static_cast<double>(down_));
  half_ = static_cast<Eigen::Index>(std::ceil(spec.kernel_half_width / cutoff_));
  if (up_ <= kMaxTabulatedPhases) {
    phases_.reserve(static_cast<std::size_t>(up_));
    for (std::int64_t p = 0; p < up_; ++p) phases_.push_back(taps_for(static_cast<double>(p) / up_));
  }
}

Eigen::VectorXd PolyphaseResampler::taps_for(double frac) const {
  // Tap j multiplies input sample floor(t) + j - half_ + 1, at offset tau from t.
  Eigen::VectorXd taps(2 * half_);
  const double support = static_cast<double>(half_);
  for (Eigen::Index j = 0; j < 2 * half_; ++j) {
    const double tau = frac - static_cast<double>(j - half_ + 1);
    const double arg = cutoff_ * tau;
    const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = tau / support;
    const double window = std::abs(r) >= 1.0 ? 0.0 : bessel_i0(beta_ * std::sqrt(1.0 - r * r)) / bessel_i0(beta_);
    taps(j) = sinc * window;
  }
  return taps / taps.sum();
}

Eigen::Index PolyphaseResampler::output_length(Eigen::Index n) const {
  return static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * up_ / static_cast<double>(down_)));
}

Eigen::VectorXd PolyphaseResampler::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::Index n = x.size();
  const Eigen::Index n_out = output_length(n);
  if (n_out < 2) throw InvalidArgument("resampled trial would have fewer than 2 samples");
  if (up_ == down_) return x;
  Eigen::VectorXd y(n_out);
  for (Eigen::Index i = 0; i < n_out; ++i) {
    const std::int64_t num = static_cast<std::int64_t>(i) * down_;
    const Eigen::Index base = static_cast<Eigen::Index>(num / up_);
    const std::int64_t phase = num % up_;
    const Eigen::VectorXd local = phases_.empty() ? taps_for(static_cast<double>(phase) / up_) : Eigen::VectorXd();
    const Eigen::VectorXd& taps = phases_.empty() ? local : phases_[static_cast<std::size_t>(phase)];
    const Eigen::Index first = base - half_ + 1;
    double acc = 0.0;
    if (first >= 0 && first + 2 * half_ <= n) {
      acc = taps.dot(x.segment(first, 2 * half_));
    } else {
      for (Eigen::Index j = 0; j < 2 * half_; ++j) acc += taps(j) * x(reflect(first + j, n));
    }
    y(i) = acc;
  }
  return y;
}

Eigen::MatrixXd PolyphaseResampler::apply_rows(const Eigen::MatrixXd& x) const {
  const Eigen::Index n_out = output_length(x.cols());
  if (n_out < 2) throw InvalidArgument("resampled trial would have fewer than 2 samples");
  if (up_ == down_) return x;
  Eigen::MatrixXd y(x.rows(), n_out);
  for (Eigen::Index r = 0; r < x.rows(); ++r) y.row(r) = apply(x.row(r).transpose()).transpose();
  return y;
}

Trial resample(const Trial& trial, const ResampleSpec& spec) {
  if (!(spec.f_target > 0)) throw InvalidArgument("f_target must be positive");
  if (!(trial.fs > 0)) throw InvalidArgument("trial fs must be positive");
  if (trial.fs == spec.f_target) return trial;
  const PolyphaseResampler rs(trial.fs, spec.f_target, spec);
  Trial out = trial.with_data(rs.apply_rows(trial.data));
  out.fs = spec.f_target;
  return out;
}

}  // namespace mieeg::dsp
