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
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tac::ad {

using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array. Scalars are stored with shape {1}.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor scalar(Real v) { return Tensor({1}, std::vector<Real>{v}); }
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }

  // Rank-2 view helpers; a rank-1 tensor is treated as a single row.
  int rows() const { return rank() >= 2 ? shape_[0] : 1; }
  int cols() const { return rank() >= 2 ? static_cast<int>(size() / shape_[0]) : static_cast<int>(size()); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  std::vector<Real>& storage() { return data_; }
  const std::vector<Real>& storage() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  Real at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  Real item() const;

  Real* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols(); }
  const Real* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols(); }

  void fill(Real v);
  void reshape(Shape shape);
  bool all_finite() const;

  template <typename Other>
  Tensor<Other> cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return Tensor<Other>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<Real> data_;
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace tac::ad
