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
#include <vector>

#include "tac/autodiff/param_store.hpp"

namespace tac::ad {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;
};

// Adam with decoupled weight decay. Moments are kept per trainable entry and
// keyed by position in the ParamStore.
template <typename Real>
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // θ ← θ − lr·wd·θ, then the bias-corrected moment step. Throws
  // std::domain_error naming the parameter if a gradient is not finite.
  void step(ParamStore<Real>& params, const Gradients<Real>& grads);

  const AdamOptions& options() const { return options_; }
  AdamOptions& options() { return options_; }
  std::int64_t steps() const { return t_; }

 private:
  AdamOptions options_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct ClipResult {
  double norm = 0.0;
  bool clipped = false;
};

// Rescales every gradient by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm before scaling.
template <typename Real>
ClipResult clip_grad_norm(Gradients<Real>& grads, double max_norm);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace tac::ad
