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

#include <span>
#include <vector>

#include "tac/autodiff/graph.hpp"

// Differentiable operations. Matrix ops take rank-2 operands [rows, cols];
// a rank-1 operand of length n is treated as a [1, n] row.
namespace tac::ad {

template <typename Real> Var<Real> matmul(Var<Real> a, Var<Real> b);
// y = x W^T + b for x [n, in], W [out, in], b [out].
template <typename Real> Var<Real> linear(Var<Real> x, Var<Real> w, Var<Real> b);
template <typename Real> Var<Real> linear(Var<Real> x, Var<Real> w);

template <typename Real> Var<Real> add(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> sub(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> mul(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> minimum(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> scale(Var<Real> x, double factor);
template <typename Real> Var<Real> add_scalar(Var<Real> x, double c);

template <typename Real> Var<Real> sigmoid(Var<Real> x);
template <typename Real> Var<Real> tanh(Var<Real> x);
template <typename Real> Var<Real> relu(Var<Real> x);
template <typename Real> Var<Real> exp(Var<Real> x);
template <typename Real> Var<Real> log(Var<Real> x);
template <typename Real> Var<Real> square(Var<Real> x);
// Gradient passes only where lo <= x <= hi.
template <typename Real> Var<Real> clamp(Var<Real> x, double lo, double hi);

// Row-wise.
template <typename Real> Var<Real> softmax(Var<Real> x);
template <typename Real> Var<Real> log_softmax(Var<Real> x);

template <typename Real> Var<Real> sum(Var<Real> x);
template <typename Real> Var<Real> mean(Var<Real> x);
// Σ_i c_i x_i over the flattened tensor.
template <typename Real> Var<Real> weighted_sum(Var<Real> x, std::span<const double> coeffs);

template <typename Real> Var<Real> concat_cols(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> concat_rows(Var<Real> a, Var<Real> b);
// out[k] = table[ids[k]]; backward scatter-adds into table rows.
template <typename Real> Var<Real> gather_rows(Var<Real> table, std::span<const int> ids);
// out[k] = x[k, cols[k]].
template <typename Real> Var<Real> pick(Var<Real> x, std::span<const int> cols);
template <typename Real> Var<Real> reshape(Var<Real> x, Shape shape);
template <typename Real> Var<Real> stop_gradient(Var<Real> x);

// Gated recurrent unit step with gate blocks stacked [r; z; n]:
//   r = σ(W_r x + b_ir + U_r h + b_hr)
//   z = σ(W_z x + b_iz + U_z h + b_hz)
//   n = tanh(W_n x + b_in + r ⊙ (U_n h + b_hn))
//   h' = (1 − z) ⊙ n + z ⊙ h
// Rows at index >= active_rows copy h through unchanged, which lets a batch of
// length-sorted sequences share one step. active_rows < 0 means all rows.
template <typename Real>
Var<Real> gru_cell(Var<Real> x, Var<Real> h, Var<Real> w_ih, Var<Real> w_hh, Var<Real> b_ih, Var<Real> b_hh,
                   int active_rows = -1);

// Multi-label binary cross-entropy over probability rows p [n, N] with 0/1
// labels of the same shape:
//   Σ_r row_weight_r · (−1/N) Σ_j [ y ln p̃ + (1 − y) ln(1 − p̃) ],
// p̃ = clamp(p, 1e-8, 1 − 1e-8).
template <typename Real>
Var<Real> binary_cross_entropy(Var<Real> p, const Tensor<Real>& labels, std::span<const double> row_weights);

inline constexpr double kProbClamp = 1e-8;

}  // namespace tac::ad
