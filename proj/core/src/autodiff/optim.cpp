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

#include "tac/autodiff/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tac::ad {

template <typename Real>
void Adam<Real>::step(ParamStore<Real>& params, const Gradients<Real>& grads) {
  auto& entries = params.entries();
  if (grads.size() != entries.size()) throw std::invalid_argument("Adam: gradients not aligned with parameters");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].trainable) continue;
    for (Real g : grads[i].values()) {
      if (!std::isfinite(g)) throw std::domain_error("non-finite gradient for parameter " + entries[i].name);
    }
  }
  if (m_.size() != entries.size()) {
    m_.assign(entries.size(), {});
    v_.assign(entries.size(), {});
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.lr, wd = options_.weight_decay, eps = options_.eps;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].trainable) continue;
    auto theta = entries[i].value.values();
    auto g = grads[i].values();
    if (g.size() != theta.size()) {
      throw std::invalid_argument("Adam: gradient shape mismatch for parameter " + entries[i].name);
    }
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.size() != theta.size()) {
      m.assign(theta.size(), 0.0);
      v.assign(theta.size(), 0.0);
    }
    for (std::size_t k = 0; k < theta.size(); ++k) {
      double p = theta[k];
      if (wd != 0.0) p -= lr * wd * p;
      const double gk = g[k];
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p -= lr * mhat / (std::sqrt(vhat) + eps);
      theta[k] = static_cast<Real>(p);
    }
  }
}

template <typename Real>
ClipResult clip_grad_norm(Gradients<Real>& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_grad_norm: max_norm must be positive");
  ClipResult out;
  out.norm = grads.global_norm();
  if (out.norm > max_norm) {
    grads.scale(max_norm / out.norm);
    out.clipped = true;
  }
  return out;
}

template class Adam<float>;
template class Adam<double>;
template ClipResult clip_grad_norm(Gradients<float>&, double);
template ClipResult clip_grad_norm(Gradients<double>&, double);

}  // namespace tac::ad
