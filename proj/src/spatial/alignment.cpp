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

#include "mieeg/spatial/alignment.hpp"

#include <json.hpp>

#include "mieeg/error.hpp"

namespace mieeg::spatial {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw InvalidArgument("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& spd, double floor_ratio) {
  const Eigen::MatrixXd sym = 0.5 * (spd + spd.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double lmax = std::max(lambda.maxCoeff(), 0.0);
  const double floor = lmax > 0 ? floor_ratio * lmax : std::numeric_limits<double>::min();
  lambda = lambda.cwiseMax(floor);
  const Eigen::MatrixXd& v = eig.eigenvectors();
  return v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
}

AlignReference ea_reference(const std::vector<Eigen::MatrixXd>& trials) {
  if (trials.empty()) throw InvalidArgument("cannot fit an alignment reference on an empty trial list");
  const Eigen::Index c = trials.front().rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(c, c);
  for (const auto& x : trials) {
    if (x.rows() != c) throw InvalidArgument("non-conforming trial shapes for alignment reference");
    acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  acc = acc.selfadjointView<Eigen::Lower>();
  acc /= static_cast<double>(trials.size());

  AlignReference ref;
  ref.n = trials.size();
  ref.epsilon = kRidgeScale * acc.trace() / static_cast<double>(c);
  ref.r_bar = acc;
  ref.r_bar.diagonal().array() += ref.epsilon;
  ref.r_inv_sqrt = inverse_sqrt(ref.r_bar);
  return ref;
}

AlignReference ea_reference(const std::vector<Trial>& trials) {
  std::vector<Eigen::MatrixXd> xs;
  xs.reserve(trials.size());
  for (const auto& t : trials) xs.push_back(t.data);
  return ea_reference(xs);
}

Eigen::MatrixXd ea_whiten(const Eigen::MatrixXd& x, const AlignReference& ref) {
  if (x.rows() != ref.dim())
    throw InvalidArgument("dimension mismatch: trial has " + std::to_string(x.rows()) + " channels, reference " +
                          std::to_string(ref.dim()));
  return ref.r_inv_sqrt * x;
}

Trial ea_whiten(const Trial& trial, const AlignReference& ref) { return trial.with_data(ea_whiten(trial.data, ref)); }

Eigen::MatrixXd mean_covariance(const std::vector<Trial>& trials) {
  if (trials.empty()) throw InvalidArgument("empty trial list");
  const Eigen::Index c = trials.front().data.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(c, c);
  for (const auto& t : trials) acc.noalias() += t.data * t.data.transpose();
  return acc / static_cast<double>(trials.size());
}

std::string to_json(const AlignReference& ref) {
  json j;
  j["n"] = ref.n;
  j["epsilon"] = ref.epsilon;
  j["r_bar"] = matrix_to_json(ref.r_bar);
  j["r_inv_sqrt"] = matrix_to_json(ref.r_inv_sqrt);
  return j.dump(1);
}

AlignReference align_reference_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    AlignReference ref;
    ref.n = j.at("n").get<std::size_t>();
    ref.epsilon = j.at("epsilon").get<double>();
    ref.r_bar = matrix_from_json(j.at("r_bar"));
    ref.r_inv_sqrt = matrix_from_json(j.at("r_inv_sqrt"));
    if (ref.r_bar.rows() != ref.r_bar.cols() || ref.r_inv_sqrt.rows() != ref.r_bar.rows() ||
        ref.r_inv_sqrt.cols() != ref.r_bar.cols())
      throw InvalidArgument("alignment reference matrices must be square and conforming");
    return ref;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("alignment reference JSON: ") + e.what());
  }
}

}  // namespace mieeg::spatial
