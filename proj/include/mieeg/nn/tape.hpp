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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mieeg/error.hpp"

namespace mieeg::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A learnable tensor with its gradient slot and Adam moments.
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  Matrix<Scalar> adam_m;
  Matrix<Scalar> adam_v;

  Parameter(std::string n, Matrix<Scalar> v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(Matrix<Scalar>::Zero(value.rows(), value.cols())),
        adam_m(Matrix<Scalar>::Zero(value.rows(), value.cols())),
        adam_v(Matrix<Scalar>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

template <typename Scalar>
class Tape;

/// Handle to a node on a tape.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, int id) : tape_(tape), id_(id) {}

  Tape<Scalar>& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }

 private:
  Tape<Scalar>* tape_ = nullptr;
  int id_ = -1;
};

/// Wengert list of matrix-valued nodes. Nodes are appended in evaluation order,
/// so reverse index order is a valid topological order for backpropagation.
template <typename Scalar>
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Var<Scalar> constant(Matrix<Scalar> value) { return push(std::move(value), false, {}, nullptr); }

  Var<Scalar> param(Parameter<Scalar>& p) { return push(p.value, true, {}, &p); }

  /// Records an operation; it needs a gradient when any input does.
  Var<Scalar> op(Matrix<Scalar> value, std::initializer_list<Var<Scalar>> inputs, Backward backward) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || requires_grad(v.id());
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{}, nullptr);
  }

  Var<Scalar> op(Matrix<Scalar> value, const std::vector<Var<Scalar>>& inputs, Backward backward) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || requires_grad(v.id());
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{}, nullptr);
  }

  const Matrix<Scalar>& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  /// Gradient accumulator of node `id`, allocated as zeros on first touch.
  Matrix<Scalar>& grad(int id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) n.grad = Matrix<Scalar>::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() != 0; }

  /// Seeds d(loss)/d(loss) = 1 and accumulates into every reachable Parameter::grad.
  void backward(const Var<Scalar>& loss) {
    if (loss.value().size() != 1) throw InvalidArgument("backward() needs a scalar loss");
    if (!requires_grad(loss.id())) return;
    grad(loss.id()).setOnes();
    for (int id = loss.id(); id >= 0; --id) {
      auto& n = nodes_[static_cast<std::size_t>(id)];
      if (n.grad.size() == 0) continue;
      if (n.param != nullptr) {
        n.param->grad += n.grad;
      } else if (n.backward) {
        n.backward(*this, id);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() {
    nodes_.clear();
    attention_maps.clear();
  }

  /// When set, attention ops append their probability matrices here.
  bool record_attention = false;
  std::vector<Matrix<Scalar>> attention_maps;

 private:
  struct Node {
    Matrix<Scalar> value;
    Matrix<Scalar> grad;
    Backward backward;
    Parameter<Scalar>* param = nullptr;
    bool requires_grad = false;
  };

  Var<Scalar> push(Matrix<Scalar> value, bool needs, Backward backward, Parameter<Scalar>* p) {
    nodes_.push_back(Node{std::move(value), Matrix<Scalar>(), std::move(backward), p, needs});
    return Var<Scalar>(this, static_cast<int>(nodes_.size()) - 1);
  }

  std::vector<Node> nodes_;
};

/// Ordered, name-addressable set of parameters with stable addresses.
template <typename Scalar>
class ParameterStore {
 public:
  Parameter<Scalar>& add(std::string name, Matrix<Scalar> value) {
    for (const auto& p : params_)
      if (p->name == name) throw InvalidArgument("duplicate parameter name: " + name);
    params_.push_back(std::make_unique<Parameter<Scalar>>(std::move(name), std::move(value)));
    return *params_.back();
  }

  Parameter<Scalar>& get(const std::string& name) {
    for (auto& p : params_)
      if (p->name == name) return *p;
    throw InvalidArgument("no parameter named " + name);
  }
  const Parameter<Scalar>& get(const std::string& name) const { return const_cast<ParameterStore*>(this)->get(name); }

  bool contains(const std::string& name) const {
    for (const auto& p : params_)
      if (p->name == name) return true;
    return false;
  }

  /// New value (any shape) with fresh gradient and moments; the address stays valid.
  Parameter<Scalar>& replace(const std::string& name, Matrix<Scalar> value) {
    auto& p = get(name);
    p = Parameter<Scalar>(name, std::move(value));
    return p;
  }

  std::size_t size() const { return params_.size(); }
  Parameter<Scalar>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<Scalar>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  /// Throws naming the first parameter whose gradient is not finite.
  void check_gradients() const {
    for (const auto& p : params_)
      if (!p->grad.allFinite()) throw Error("non-finite gradient in parameter " + p->name);
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

  long long step = 0;  // Adam step counter

 private:
  std::vector<std::unique_ptr<Parameter<Scalar>>> params_;
};

}  // namespace mieeg::nn
