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
#include <vector>

#include "mieeg/core/trial.hpp"

namespace mieeg::dsp {

struct FilterSpec {
  double low_hz = 8.0;
  double high_hz = 30.0;
  int order = 4;  // Butterworth prototype order; the bandpass has 2*order poles
};

/// Biquad b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Digital Butterworth bandpass as second-order sections (bilinear transform with
/// prewarped band edges, unit gain at the geometric centre frequency).
std::vector<Biquad> butterworth_bandpass(const FilterSpec& spec, double fs);

/// Complex frequency response of a cascade at `hz`.
std::complex<double> frequency_response(const std::vector<Biquad>& sos, double hz, double fs);

/// Causal cascade filtering of one signal, transposed direct form II, zero initial state.
Eigen::VectorXd sosfilt(const std::vector<Biquad>& sos, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Zero-phase filtering of one signal: odd reflection padding, steady-state initial
/// conditions, forward-backward pass. The forward-backward result is averaged with
/// its time-reversed counterpart so the operator commutes exactly with reversal.
Eigen::VectorXd filtfilt(const std::vector<Biquad>& sos, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Row-wise zero-phase bandpass of a channels x samples matrix.
Eigen::MatrixXd bandpass(const Eigen::MatrixXd& x, const FilterSpec& spec, double fs);

/// Throws when the band is outside (0, fs/2) or the trial has T <= 3 * order samples.
Trial bandpass(const Trial& trial, const FilterSpec& spec = {});

}  // namespace mieeg::dsp
