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

#include <cmath>

#include "mieeg/nn/tape.hpp"

namespace mieeg::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam on every parameter's accumulated gradient; increments the step.
/// Throws (naming the parameter) on a non-finite gradient without touching any value.
template <typename S>
void adam_step(ParameterStore<S>& params, const AdamOptions& opt = {}) {
  params.check_gradients();
  params.step += 1;
  const double t = static_cast<double>(params.step);
  const S c1 = static_cast<S>(1.0 - std::pow(opt.beta1, t));
  const S c2 = static_cast<S>(1.0 - std::pow(opt.beta2, t));
  const S b1 = static_cast<S>(opt.beta1), b2 = static_cast<S>(opt.beta2);
  const S lr = static_cast<S>(opt.lr), eps = static_cast<S>(opt.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    p.adam_m = b1 * p.adam_m + (S(1) - b1) * p.grad;
    p.adam_v = b2 * p.adam_v + (S(1) - b2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (p.adam_m.array() / c1) / ((p.adam_v.array() / c2).sqrt() + eps);
  }
}

}  // namespace mieeg::nn
