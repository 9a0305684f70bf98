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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tac/autodiff/tensor.hpp"

namespace tac::ad {

// Named, shaped arrays in insertion order. Non-trainable entries (EMA shadows)
// live alongside trainable ones but are skipped by the optimizer and by
// gradient enumeration.
template <typename Real>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor<Real> value;
    bool trainable = true;
  };

  std::size_t add(std::string name, Shape shape, bool trainable = true);
  std::size_t add(std::string name, Tensor<Real> value, bool trainable = true);

  bool contains(std::string_view name) const;
  std::size_t index(std::string_view name) const;
  Tensor<Real>& get(std::string_view name) { return entries_[index(name)].value; }
  const Tensor<Real>& get(std::string_view name) const { return entries_[index(name)].value; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t trainable_count() const;
  std::size_t frozen_count() const;

  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<Other>(), e.trainable);
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Gradients aligned index-for-index with a ParamStore. Entries for
// non-trainable parameters stay empty.
template <typename Real>
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore<Real>& params);

  Tensor<Real>& operator[](std::size_t i) { return grads_[i]; }
  const Tensor<Real>& operator[](std::size_t i) const { return grads_[i]; }
  const Tensor<Real>& at(std::string_view name) const { return grads_[params_->index(name)]; }
  std::size_t size() const { return grads_.size(); }
  const ParamStore<Real>& params() const { return *params_; }

  double global_norm() const;
  void scale(double factor);
  void add(const Gradients& other, double factor = 1.0);

 private:
  const ParamStore<Real>* params_ = nullptr;
  std::vector<Tensor<Real>> grads_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template class Gradients<float>;
extern template class Gradients<double>;

}  // namespace tac::ad
