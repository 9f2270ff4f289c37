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

#include "mieeg/spatial/csp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mieeg/error.hpp"

namespace mieeg::spatial {
namespace {

Eigen::MatrixXd class_covariance(const std::vector<Eigen::MatrixXd>& trials) {
  const Eigen::Index c = trials.front().rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(c, c);
  for (const auto& x : trials) {
    if (x.rows() != c) throw InvalidArgument("non-conforming trial shapes for CSP");
    const Eigen::MatrixXd centred = x.colwise() - x.rowwise().mean();
    const Eigen::MatrixXd cov = centred * centred.transpose();
    const double tr = cov.trace();
    if (tr > 0) acc += cov / tr;
  }
  return acc / static_cast<double>(trials.size());
}

std::vector<Eigen::MatrixXd> as_matrices(const std::vector<Trial>& trials) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.data);
  return out;
}

}  // namespace

Eigen::VectorXd CspLdaModel::features(const Eigen::MatrixXd& x) const {
  // Log of each filter's share of the total filtered variance.
  const Eigen::MatrixXd z = filters * x;
  Eigen::VectorXd var(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) var(i) = (z.row(i).array() - z.row(i).mean()).square().sum();
  const double total = std::max(var.sum(), 1e-300);
  return (var / total).array().max(1e-300).log().matrix();
}

double CspLdaModel::decision(const Eigen::MatrixXd& x) const { return lda_weights.dot(features(x)) + lda_bias; }

Eigen::VectorXd csp_eigenvalues(const Eigen::MatrixXd& sigma_a, const Eigen::MatrixXd& sigma_b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sigma_a, sigma_a + sigma_b);
  if (ges.info() != Eigen::Success) throw Error("CSP: composite covariance is singular");
  return ges.eigenvalues();
}

void fit_lda(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b, Eigen::VectorXd& weights,
             double& bias) {
  if (a.empty() || b.empty()) throw InvalidArgument("LDA needs samples of both classes");
  const Eigen::Index d = a.front().size();
  Eigen::VectorXd mu_a = Eigen::VectorXd::Zero(d), mu_b = Eigen::VectorXd::Zero(d);
  for (const auto& v : a) mu_a += v;
  for (const auto& v : b) mu_b += v;
  mu_a /= static_cast<double>(a.size());
  mu_b /= static_cast<double>(b.size());
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (const auto& v : a) sw += (v - mu_a) * (v - mu_a).transpose();
  for (const auto& v : b) sw += (v - mu_b) * (v - mu_b).transpose();
  sw /= static_cast<double>(std::max<std::size_t>(1, a.size() + b.size() - 2));
  const double shrink = 1e-3 * std::max(sw.trace() / static_cast<double>(d), 1e-12);
  sw.diagonal().array() += shrink;
  weights = sw.ldlt().solve(mu_b - mu_a);
  bias = -weights.dot(0.5 * (mu_a + mu_b));
}

CspLdaModel csp_fit(const std::vector<Eigen::MatrixXd>& class_a, const std::vector<Eigen::MatrixXd>& class_b, int m) {
  if (class_a.empty() || class_b.empty()) throw InvalidArgument("CSP needs trials of both classes");
  if (m < 1) throw InvalidArgument("CSP needs m >= 1");
  const Eigen::MatrixXd sa = class_covariance(class_a);
  const Eigen::MatrixXd sb = class_covariance(class_b);
  if (sb.rows() != sa.rows()) throw InvalidArgument("classes have different channel counts");
  const Eigen::Index c = sa.rows();

  Eigen::MatrixXd composite = sa + sb;
  composite.diagonal().array() += 1e-8 * composite.trace() / static_cast<double>(c);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sa, composite);
  if (ges.info() != Eigen::Success) throw Error("CSP: rank deficiency beyond ridge repair");

  // Eigen returns ascending eigenvalues; keep the top m then the bottom m, all descending.
  std::vector<Eigen::Index> pick;
  if (2 * m >= c) {
    for (Eigen::Index i = c - 1; i >= 0; --i) pick.push_back(i);
  } else {
    for (Eigen::Index i = c - 1; i >= c - m; --i) pick.push_back(i);
    for (Eigen::Index i = m - 1; i >= 0; --i) pick.push_back(i);
  }
  CspLdaModel model;
  model.filters.resize(static_cast<Eigen::Index>(pick.size()), c);
  model.eigenvalues.resize(static_cast<Eigen::Index>(pick.size()));
  for (std::size_t r = 0; r < pick.size(); ++r) {
    model.filters.row(static_cast<Eigen::Index>(r)) = ges.eigenvectors().col(pick[r]).transpose();
    model.eigenvalues(static_cast<Eigen::Index>(r)) = ges.eigenvalues()(pick[r]);
  }

  std::vector<Eigen::VectorXd> fa, fb;
  for (const auto& x : class_a) fa.push_back(model.features(x));
  for (const auto& x : class_b) fb.push_back(model.features(x));
  fit_lda(fa, fb, model.lda_weights, model.lda_bias);
  return model;
}

CspLdaModel csp_fit(const std::vector<Trial>& class_a, const std::vector<Trial>& class_b, int m) {
  return csp_fit(as_matrices(class_a), as_matrices(class_b), m);
}

CspLdaClassifier CspLdaClassifier::fit(const std::vector<Trial>& trials, int m) {
  std::map<int, std::vector<Eigen::MatrixXd>> by_class;
  for (const auto& t : trials) {
    if (!t.label) throw InvalidArgument("CSP+LDA needs labelled trials");
    by_class[*t.label].push_back(t.data);
  }
  if (by_class.size() < 2) throw InvalidArgument("CSP+LDA needs at least two classes");
  CspLdaClassifier clf;
  for (const auto& [label, _] : by_class) clf.classes_.push_back(label);
  if (by_class.size() == 2) {
    clf.models_.push_back(csp_fit(by_class.begin()->second, std::next(by_class.begin())->second, m));
    return clf;
  }
  for (int label : clf.classes_) {
    std::vector<Eigen::MatrixXd> rest;
    for (const auto& [other, xs] : by_class)
      if (other != label) rest.insert(rest.end(), xs.begin(), xs.end());
    clf.models_.push_back(csp_fit(rest, by_class[label], m));
  }
  return clf;
}

int CspLdaClassifier::predict(const Eigen::MatrixXd& x) const {
  if (models_.size() == 1) return models_.front().decision(x) > 0 ? classes_[1] : classes_[0];
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < models_.size(); ++k) {
    const double s = models_[k].decision(x);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return classes_[best];
}

double CspLdaClassifier::accuracy(const std::vector<Trial>& trials) const {
  if (trials.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& t : trials)
    if (t.label && predict(t.data) == *t.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(trials.size());
}

}  // namespace mieeg::spatial
