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

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mieeg/core/trial.hpp"

namespace mieeg::dsp {

struct ResampleSpec {
  double f_target = 250.0;
  int kernel_half_width = 16;  // zero crossings of the (lower-rate) sinc on each side
  double window_beta = 8.6;    // Kaiser shape
};

/// Rational resampler: output sample n sits at input time n * down / up. Each of
/// the `up` polyphase branches holds a Kaiser-windowed sinc whose cutoff is the
/// lower of the two Nyquist rates, normalized to unit DC gain. Signal edges are
/// extended by mirror reflection.
class PolyphaseResampler {
 public:
  PolyphaseResampler(double fs_in, double fs_out, const ResampleSpec& spec = {});

  std::int64_t up() const { return up_; }
  std::int64_t down() const { return down_; }
  Eigen::Index output_length(Eigen::Index n) const;  // round(n * up / down)

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const;

 private:
  Eigen::VectorXd taps_for(double frac) const;

  std::int64_t up_ = 1;
  std::int64_t down_ = 1;
  double cutoff_ = 1.0;   // fraction of the input Nyquist
  Eigen::Index half_ = 0; // taps on each side, in input samples
  double beta_ = 8.6;
  std::vector<Eigen::VectorXd> phases_;  // empty when `up` is too large to tabulate
};

/// Zeroth-order modified Bessel function of the first kind (Kaiser window).
double bessel_i0(double x);

/// round(T * f_target / fs) samples at f_target; identity when fs == f_target.
/// Throws when the output would have fewer than 2 samples.
Trial resample(const Trial& trial, const ResampleSpec& spec = {});

}  // namespace mieeg::dsp
