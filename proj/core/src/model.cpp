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

#include "tac/model.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "tac/actor.hpp"
#include "tac/critics.hpp"
#include "tac/random.hpp"
#include "tac/textenc.hpp"

namespace tac {

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string with_commas(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

template <typename Real>
ad::ParamStore<Real> build_params(const ModelDims& dims) {
  ad::ParamStore<Real> p;
  textenc::add_text_encoder_params(p, dims);
  textenc::add_state_network_params(p, dims);
  critics::add_state_critic_params(p, dims);
  actor::add_actor_params(p, dims);
  critics::add_q_critic_params(p, dims, 1);
  critics::add_q_critic_params(p, dims, 2);
  critics::add_target_critic_params(p, dims);
  actor::add_template_decoder_params(p, dims);
  actor::add_object_decoder_params(p, dims);
  return p;
}

template <typename Real>
void init_params(ad::ParamStore<Real>& params, std::uint64_t seed) {
  Rng rng(seed);
  // Recurrent cells share one bound per cell, taken from the hidden size.
  for (auto& e : params.entries()) {
    if (!e.trainable) continue;
    auto& t = e.value;
    if (ends_with(e.name, "embedding.weight") || ends_with(e.name, "embedding_sa.weight") ||
        ends_with(e.name, "embedding_score.weight")) {
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Real>(standard_normal(rng));
      continue;
    }
    int fan_in;
    if (e.name.find("_l0") != std::string::npos) {
      fan_in = params.get(e.name.substr(0, e.name.rfind('.')) + ".weight_hh_l0").dim(1);
    } else if (ends_with(e.name, ".weight")) {
      fan_in = t.dim(1);
    } else {
      fan_in = params.get(e.name.substr(0, e.name.rfind('.')) + ".weight").dim(1);
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Real>(uniform(rng, -bound, bound));
  }
  critics::ema_update(params, 1.0);
}

template <typename Real>
ParamCount count_params(const ad::ParamStore<Real>& params) {
  ParamCount c;
  for (const auto& e : params.entries()) (e.trainable ? c.trainable : c.target) += e.value.size();
  return c;
}

void print_param_table(std::ostream& out, const ad::ParamStore<float>& params) {
  std::size_t width = 0;
  for (const auto& e : params.entries()) width = std::max(width, e.name.size());
  for (const auto& e : params.entries()) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << e.name << std::setw(14)
        << ad::shape_string(e.value.shape()) << std::right << std::setw(10) << with_commas(e.value.size())
        << (e.trainable ? "" : "  (target)") << '\n';
  }
  const auto c = count_params(params);
  out << "trainable " << with_commas(c.trainable) << '\n';
  out << "target " << with_commas(c.target) << '\n';
  out << "total " << with_commas(c.total()) << '\n';
}

template ad::ParamStore<float> build_params(const ModelDims&);
template ad::ParamStore<double> build_params(const ModelDims&);
template void init_params(ad::ParamStore<float>&, std::uint64_t);
template void init_params(ad::ParamStore<double>&, std::uint64_t);
template ParamCount count_params(const ad::ParamStore<float>&);
template ParamCount count_params(const ad::ParamStore<double>&);

}  // namespace tac
