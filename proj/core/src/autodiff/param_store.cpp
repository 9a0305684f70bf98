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

#include "tac/autodiff/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace tac::ad {

template <typename Real>
std::size_t ParamStore<Real>::add(std::string name, Shape shape, bool trainable) {
  return add(std::move(name), Tensor<Real>(std::move(shape)), trainable);
}

template <typename Real>
std::size_t ParamStore<Real>::add(std::string name, Tensor<Real> value, bool trainable) {
  if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  const std::size_t idx = entries_.size();
  by_name_.emplace(name, idx);
  entries_.push_back(Entry{std::move(name), std::move(value), trainable});
  return idx;
}

template <typename Real>
bool ParamStore<Real>::contains(std::string_view name) const {
  return by_name_.count(std::string(name)) > 0;
}

template <typename Real>
std::size_t ParamStore<Real>::index(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw std::out_of_range("unknown parameter: " + std::string(name));
  return it->second;
}

template <typename Real>
std::size_t ParamStore<Real>::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.trainable) n += e.value.size();
  return n;
}

template <typename Real>
std::size_t ParamStore<Real>::frozen_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (!e.trainable) n += e.value.size();
  return n;
}

template <typename Real>
Gradients<Real>::Gradients(const ParamStore<Real>& params) : params_(&params) {
  grads_.reserve(params.size());
  for (const auto& e : params.entries()) {
    grads_.push_back(e.trainable ? Tensor<Real>(e.value.shape()) : Tensor<Real>());
  }
}

template <typename Real>
double Gradients<Real>::global_norm() const {
  double sq = 0.0;
  for (const auto& g : grads_)
    for (Real v : g.values()) sq += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sq);
}

template <typename Real>
void Gradients<Real>::scale(double factor) {
  for (auto& g : grads_)
    for (Real& v : g.values()) v = static_cast<Real>(v * factor);
}

template <typename Real>
void Gradients<Real>::add(const Gradients& other, double factor) {
  if (other.grads_.size() != grads_.size()) throw std::invalid_argument("gradient sets are not aligned");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].values();
    auto src = other.grads_[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<Real>(dst[k] + factor * src[k]);
  }
}

template class ParamStore<float>;
template class ParamStore<double>;
template class Gradients<float>;
template class Gradients<double>;

}  // namespace tac::ad
