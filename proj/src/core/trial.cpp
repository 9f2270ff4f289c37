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

#include "mieeg/core/trial.hpp"

#include "mieeg/error.hpp"

namespace mieeg {

Trial Trial::with_data(Eigen::MatrixXd new_data) const {
  Trial out;
  out.data = std::move(new_data);
  out.label = label;
  out.fs = fs;
  out.channels = channels;
  out.subject_id = subject_id;
  out.session_id = session_id;
  return out;
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

void validate(const Trial& trial) {
  if (trial.data.rows() != static_cast<Eigen::Index>(trial.channels.size()))
    throw InvalidArgument("trial has " + std::to_string(trial.data.rows()) + " rows but " +
                          std::to_string(trial.channels.size()) + " channel names");
  if (trial.data.cols() < 1) throw InvalidArgument("trial has no samples");
  if (!(trial.fs > 0.0)) throw InvalidArgument("sampling rate must be positive");
  if (!trial.data.allFinite()) throw InvalidArgument("non-finite sample");
}

}  // namespace mieeg
