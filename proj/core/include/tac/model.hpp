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

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tac/autodiff/param_store.hpp"
#include "tac/model_dims.hpp"

namespace tac {

// Every entry of the agent, in the order the parameter listing reports them:
// text encoder, state network, state critic, actor, twin critics, target
// critic, template decoder, object decoder. Values are zero.
template <typename Real>
ad::ParamStore<Real> build_params(const ModelDims& dims);

// Embeddings ~ N(0, 1); dense and recurrent weights and biases ~
// U(−1/√fan_in, 1/√fan_in) with fan_in the hidden size for recurrent cells;
// the target critic is then copied from the state critic.
template <typename Real>
void init_params(ad::ParamStore<Real>& params, std::uint64_t seed);

template <typename Real>
ad::ParamStore<Real> make_model(const ModelDims& dims, std::uint64_t seed) {
  auto p = build_params<Real>(dims);
  init_params(p, seed);
  return p;
}

struct ParamCount {
  std::size_t trainable = 0;
  std::size_t target = 0;
  std::size_t total() const { return trainable + target; }
};

template <typename Real>
ParamCount count_params(const ad::ParamStore<Real>& params);

// One line per entry: name, shape, count; then the totals.
void print_param_table(std::ostream& out, const ad::ParamStore<float>& params);

}  // namespace tac
