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

#include "tac/critics.hpp"

#include <stdexcept>
#include <string>

#include "tac/autodiff/ops.hpp"

namespace tac::critics {

namespace {

constexpr const char* kState = "state_critic";
constexpr const char* kTarget = "target_state_critic";

template <typename Real>
void add_value_net(ad::ParamStore<Real>& p, const std::string& base, int input, int hidden, const char* head,
                   bool trainable) {
  p.add(base + ".fc1.weight", {hidden, input}, trainable);
  p.add(base + ".fc1.bias", {hidden}, trainable);
  for (const char* layer : {"fc2", "fc3"}) {
    p.add(base + "." + layer + ".weight", {hidden, hidden}, trainable);
    p.add(base + "." + layer + ".bias", {hidden}, trainable);
  }
  p.add(base + "." + head + ".weight", {1, hidden}, trainable);
  p.add(base + "." + head + ".bias", {1}, trainable);
}

template <typename Real>
ad::Var<Real> value_net(ad::Graph<Real>& g, const std::string& base, const char* head, ad::Var<Real> x) {
  for (const char* layer : {"fc1", "fc2", "fc3"}) {
    const std::string b = base + "." + layer;
    x = ad::relu(ad::linear(x, g.param(b + ".weight"), g.param(b + ".bias")));
  }
  const std::string h = base + "." + head;
  auto v = ad::linear(x, g.param(h + ".weight"), g.param(h + ".bias"));
  return ad::reshape(v, {v.value().rows()});
}

std::string q_base(int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("q critic index must be 1 or 2");
  return "state_action_critic_" + std::to_string(which);
}

}  // namespace

template <typename Real>
void add_state_critic_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  add_value_net(params, kState, d.hidden, d.hidden, "v", true);
}

template <typename Real>
void add_q_critic_params(ad::ParamStore<Real>& params, const ModelDims& d, int which) {
  add_value_net(params, q_base(which), 2 * d.hidden, d.hidden, "q", true);
}

template <typename Real>
void add_target_critic_params(ad::ParamStore<Real>& params, const ModelDims& d) {
  add_value_net(params, kTarget, d.hidden, d.hidden, "v", false);
  if (params.contains(std::string(kState) + ".v.weight")) ema_update(params, 1.0);
}

template <typename Real>
ad::Var<Real> state_value(ad::Graph<Real>& g, ad::Var<Real> state) {
  return value_net(g, kState, "v", state);
}

template <typename Real>
ad::Var<Real> q_value(ad::Graph<Real>& g, ad::Var<Real> state, ad::Var<Real> action_encoding, QWhich which) {
  auto x = ad::concat_cols(state, action_encoding);
  switch (which) {
    case QWhich::First:
      return value_net(g, q_base(1), "q", x);
    case QWhich::Second:
      return value_net(g, q_base(2), "q", x);
    case QWhich::Min:
      return ad::minimum(value_net(g, q_base(1), "q", x), value_net(g, q_base(2), "q", x));
  }
  throw std::invalid_argument("bad QWhich");
}

template <typename Real>
ad::Var<Real> target_value(ad::Graph<Real>& g, ad::Var<Real> state) {
  return ad::stop_gradient(value_net(g, kTarget, "v", ad::stop_gradient(state)));
}

template <typename Real>
void ema_update(ad::ParamStore<Real>& params, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("ema_update: tau must lie in [0, 1]");
  const std::string src_prefix = std::string(kState) + ".";
  for (auto& e : params.entries()) {
    if (e.name.rfind(src_prefix, 0) != 0) continue;
    auto& dst = params.get(std::string(kTarget) + "." + e.name.substr(src_prefix.size()));
    const auto& src = e.value;
    if (dst.shape() != src.shape()) throw std::logic_error("ema_update: shape mismatch for " + e.name);
    if (tau == 1.0) {
      dst = src;
      continue;
    }
    if (tau == 0.0) continue;
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = static_cast<Real>(static_cast<double>(dst[i]) + tau * (static_cast<double>(src[i]) - dst[i]));
    }
  }
}

#define TAC_INSTANTIATE_CRITICS(R)                                                              \
  template void add_state_critic_params(ad::ParamStore<R>&, const ModelDims&);                  \
  template void add_q_critic_params(ad::ParamStore<R>&, const ModelDims&, int);                 \
  template void add_target_critic_params(ad::ParamStore<R>&, const ModelDims&);                 \
  template ad::Var<R> state_value(ad::Graph<R>&, ad::Var<R>);                                   \
  template ad::Var<R> q_value(ad::Graph<R>&, ad::Var<R>, ad::Var<R>, QWhich);                   \
  template ad::Var<R> target_value(ad::Graph<R>&, ad::Var<R>);                                  \
  template void ema_update(ad::ParamStore<R>&, double);

TAC_INSTANTIATE_CRITICS(float)
TAC_INSTANTIATE_CRITICS(double)

}  // namespace tac::critics
