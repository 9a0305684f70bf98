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

#include "tac/autodiff/graph.hpp"
#include "tac/model_dims.hpp"

namespace tac::critics {

enum class QWhich { First, Second, Min };

template <typename Real>
void add_state_critic_params(ad::ParamStore<Real>& params, const ModelDims& dims);
template <typename Real>
void add_q_critic_params(ad::ParamStore<Real>& params, const ModelDims& dims, int which);
// Non-trainable shadow of the state critic, initialised as an exact copy when
// the state critic is already present.
template <typename Real>
void add_target_critic_params(ad::ParamStore<Real>& params, const ModelDims& dims);

// [n] values; three relu layers and a scalar head.
template <typename Real>
ad::Var<Real> state_value(ad::Graph<Real>& g, ad::Var<Real> state);
// Critic on [state; action_encoding].
template <typename Real>
ad::Var<Real> q_value(ad::Graph<Real>& g, ad::Var<Real> state, ad::Var<Real> action_encoding, QWhich which);
// Same network evaluated with the target parameters; always detached.
template <typename Real>
ad::Var<Real> target_value(ad::Graph<Real>& g, ad::Var<Real> state);

// θ̄ ← τ·θ + (1−τ)·θ̄ over every state-critic entry. τ = 1 is an exact copy.
template <typename Real>
void ema_update(ad::ParamStore<Real>& params, double tau);

}  // namespace tac::critics
