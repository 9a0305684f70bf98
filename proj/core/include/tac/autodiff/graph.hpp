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

#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tac/autodiff/param_store.hpp"
#include "tac/autodiff/tensor.hpp"

namespace tac::ad {

template <typename Real>
class Graph;

// Handle to a node of a Graph. Cheap to copy; valid for the graph's lifetime.
template <typename Real>
struct Var {
  Graph<Real>* graph = nullptr;
  int id = -1;

  const Tensor<Real>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return graph != nullptr && id >= 0; }
};

// Define-by-run tape. Every op evaluates its forward value immediately and,
// when recording, appends a backward closure. Nodes are stored in creation
// order, which is a topological order of the DAG, so backward walks the tape
// in reverse and visits each node once.
//
// Parameters are read from a ParamStore and never written; gradients come
// back as a Gradients object aligned with the store.
template <typename Real>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int)>;

  explicit Graph(const ParamStore<Real>& params, bool record = true);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<Real> param(std::string_view name);
  Var<Real> constant(Tensor<Real> value);

  const Tensor<Real>& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref ? *n.ref : n.value;
  }
  const Tensor<Real>& value(Var<Real> v) const { return value(v.id); }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool recording() const { return record_; }
  std::size_t node_count() const { return nodes_.size(); }
  const ParamStore<Real>& params() const { return *params_; }

  // Reverse sweep from a scalar node. Unreachable trainable parameters get
  // zero gradient. May be called more than once; each call starts fresh.
  Gradients<Real> backward(Var<Real> loss);

  // Op plumbing.
  Var<Real> push(Tensor<Real> value, std::vector<int> inputs, BackwardFn fn);
  Tensor<Real>& grad(int id);

 private:
  struct Node {
    Tensor<Real> value;
    const Tensor<Real>* ref = nullptr;  // parameters are read in place
    Tensor<Real> grad;
    std::vector<int> inputs;
    BackwardFn backward;
    int param_index = -1;
    bool requires_grad = false;
  };

  const ParamStore<Real>* params_;
  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, int> param_nodes_;
};

template <typename Real>
const Tensor<Real>& Var<Real>::value() const {
  return graph->value(id);
}

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace tac::ad
