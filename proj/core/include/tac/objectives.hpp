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

#include <optional>
#include <span>
#include <vector>

#include "tac/actor.hpp"
#include "tac/autodiff/graph.hpp"
#include "tac/autodiff/optim.hpp"
#include "tac/model_dims.hpp"
#include "tac/textenc.hpp"
#include "tac/transition.hpp"

namespace tac::objectives {

struct LossWeights {
  double policy = 1.0;       // λ_R
  double value = 1.0;        // λ_V
  double q = 1.0;            // λ_Q, applied to each twin critic loss
  double templates = 1.0;    // λ_T
  double objects = 1.0;      // λ_O
};

struct UpdateOptions {
  double gamma = 0.95;
  double clip = 5.0;
  double tau = 0.001;
  LossWeights weights;
};

// (A − mean) / (population std + 1e-8).
std::vector<double> normalize_advantages(std::span<const double> raw);

// r + γ·(1 − done)·next_value, element-wise.
std::vector<double> td_targets(std::span<const double> rewards, std::span<const bool> done,
                               std::span<const double> next_values, double gamma);

// Σ_i w_i (x_i − y_i)² / n with y treated as a constant.
template <typename Real>
ad::Var<Real> weighted_squared_error(ad::Var<Real> x, std::span<const double> targets,
                                     std::span<const double> weights);

// −(1/|rows|) Σ_r (1/N) Σ_j [ y ln p + (1 − y) ln(1 − p) ], p clamped to
// [1e-8, 1 − 1e-8].
template <typename Real>
ad::Var<Real> multilabel_bce(ad::Var<Real> probs, const std::vector<std::vector<double>>& labels);

struct Batch {
  std::span<const Transition* const> items;
  std::span<const double> weights;  // importance weights, one per item
};

template <typename Real>
struct LossTerms {
  ad::Var<Real> policy, value, q1, q2, templates, objects, total;
  std::vector<double> advantages;  // normalized, detached
  std::vector<double> values;      // V(o_i)
  std::vector<double> targets;     // r + γ(1 − done)V̄(o′)
};

// V̄(o′) for every item, evaluated without recording.
template <typename Real>
std::vector<double> next_state_targets(const ad::ParamStore<Real>& params, const ModelDims& dims, const Batch& batch,
                                       textenc::TokenCache& tokens);

// Builds every loss on `g`. `targets` are the bootstrapped TD targets.
// When `advantages` is given it replaces the advantage computed from the
// current critics; gradient checks use this to hold detached quantities fixed.
template <typename Real>
LossTerms<Real> compute_losses(ad::Graph<Real>& g, const ModelDims& dims, const actor::ActionSpace& space,
                               textenc::TokenCache& tokens, const Batch& batch, std::span<const double> targets,
                               const LossWeights& weights,
                               std::optional<std::span<const double>> advantages = std::nullopt);

struct UpdateStats {
  double policy = 0, value = 0, q1 = 0, q2 = 0, templates = 0, objects = 0, total = 0;
  double grad_norm = 0;
  std::vector<double> td_errors;  // y − V(o), for priority refresh
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One optimizer update: losses, backward, clip, Adam, EMA of the target critic.
UpdateStats update(ad::ParamStore<float>& params, ad::Adam<float>& adam, const ModelDims& dims,
                   const actor::ActionSpace& space, textenc::TokenCache& tokens, const Batch& batch,
                   const UpdateOptions& options);

}  // namespace tac::objectives
