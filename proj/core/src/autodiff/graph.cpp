// Copyright 2026 The TAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tac/autodiff/graph.hpp"

#include <stdexcept>

namespace tac::ad {

template <typename Real>
Graph<Real>::Graph(const ParamStore<Real>& params, bool record) : params_(&params), record_(record) {
  nodes_.reserve(256);
}

template <typename Real>
Var<Real> Graph<Real>::param(std::string_view name) {
  const std::size_t idx = params_->index(name);
  if (auto it = param_nodes_.find(idx); it != param_nodes_.end()) return {this, it->second};
  const auto& entry = params_->entries()[idx];
  Node node;
  node.ref = &entry.value;
  node.param_index = static_cast<int>(idx);
  node.requires_grad = record_ && entry.trainable;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(idx, id);
  return {this, id};
}

template <typename Real>
Var<Real> Graph<Real>::constant(Tensor<Real> value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
Var<Real> Graph<Real>::push(Tensor<Real> value, std::vector<int> inputs, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  bool needs = false;
  if (record_) {
    for (int in : inputs) needs = needs || nodes_[static_cast<std::size_t>(in)].requires_grad;
  }
  node.requires_grad = needs;
  if (needs) {
    node.inputs = std::move(inputs);
    node.backward = std::move(fn);
  }
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
Tensor<Real>& Graph<Real>::grad(int id) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  const Tensor<Real>& v = node.ref ? *node.ref : node.value;
  if (node.grad.size() != v.size()) node.grad = Tensor<Real>(v.shape());
  return node.grad;
}

template <typename Real>
Gradients<Real> Graph<Real>::backward(Var<Real> loss) {
  if (loss.graph != this) throw std::invalid_argument("backward: loss belongs to another graph");
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_string(value(loss).shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor<Real>();
  Gradients<Real> out(*params_);
  if (!requires_grad(loss.id)) return out;

  grad(loss.id).fill(Real(1));
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (node.backward) node.backward(*this, id);
  }
  for (const auto& [idx, id] : param_nodes_) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.requires_grad && node.grad.size() == value(id).size()) out[idx] = std::move(node.grad);
  }
  for (auto& n : nodes_) n.grad = Tensor<Real>();
  return out;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace tac::ad
