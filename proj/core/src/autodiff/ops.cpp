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

#include "tac/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tac::ad {
namespace {

template <typename Real>
double dot(const Real* a, const Real* b, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return (s0 + s1) + (s2 + s3);
}

// acc[i] += c * x[i]
template <typename Real>
void axpy(double c, const Real* x, double* acc, int n) {
  for (int i = 0; i < n; ++i) acc[i] += c * x[i];
}

template <typename Real>
void add_into(Real* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<Real>(dst[i] + src[i]);
}

template <typename Real>
Graph<Real>& graph_of(Var<Real> a) {
  if (!a.valid()) throw std::invalid_argument("operation on an invalid Var");
  return *a.graph;
}

template <typename Real>
void same_graph(Var<Real> a, Var<Real> b, const char* op) {
  if (a.graph != b.graph) throw std::invalid_argument(std::string(op) + ": operands belong to different graphs");
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

template <typename Real>
Shape matrix_shape(const Tensor<Real>& t) {
  return {t.rows(), t.cols()};
}

template <typename Real, typename F, typename G>
Var<Real> unary(Var<Real> x, F forward, G derivative) {
  Graph<Real>& g = graph_of(x);
  const Tensor<Real>& xv = x.value();
  Tensor<Real> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = static_cast<Real>(forward(static_cast<double>(xv[i])));
  const int xid = x.id;
  return g.push(std::move(y), {xid}, [xid, derivative](Graph<Real>& gr, int self) {
    const Tensor<Real>& xin = gr.value(xid);
    const Tensor<Real>& yout = gr.value(self);
    const Tensor<Real>& gy = gr.grad(self);
    Tensor<Real>& gx = gr.grad(xid);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] = static_cast<Real>(gx[i] + gy[i] * derivative(static_cast<double>(xin[i]), static_cast<double>(yout[i])));
    }
  });
}

template <typename Real>
Var<Real> elementwise(Var<Real> a, Var<Real> b, const char* op, int kind) {
  same_graph(a, b, op);
  const Tensor<Real>& av = a.value();
  const Tensor<Real>& bv = b.value();
  if (av.shape() != bv.shape()) shape_fail(op, av.shape(), bv.shape());
  Tensor<Real> y(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) {
    switch (kind) {
      case 0: y[i] = av[i] + bv[i]; break;
      case 1: y[i] = av[i] - bv[i]; break;
      case 2: y[i] = av[i] * bv[i]; break;
      default: y[i] = std::min(av[i], bv[i]); break;
    }
  }
  const int aid = a.id, bid = b.id;
  return a.graph->push(std::move(y), {aid, bid}, [aid, bid, kind](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    const Tensor<Real>& av2 = gr.value(aid);
    const Tensor<Real>& bv2 = gr.value(bid);
    if (gr.requires_grad(aid)) {
      Tensor<Real>& ga = gr.grad(aid);
      for (std::size_t i = 0; i < ga.size(); ++i) {
        switch (kind) {
          case 0:
          case 1: ga[i] += gy[i]; break;
          case 2: ga[i] += gy[i] * bv2[i]; break;
          default: ga[i] += av2[i] <= bv2[i] ? gy[i] : Real(0); break;
        }
      }
    }
    if (gr.requires_grad(bid)) {
      Tensor<Real>& gb = gr.grad(bid);
      for (std::size_t i = 0; i < gb.size(); ++i) {
        switch (kind) {
          case 0: gb[i] += gy[i]; break;
          case 1: gb[i] -= gy[i]; break;
          case 2: gb[i] += gy[i] * av2[i]; break;
          default: gb[i] += av2[i] <= bv2[i] ? Real(0) : gy[i]; break;
        }
      }
    }
  });
}

}  // namespace

template <typename Real>
Var<Real> matmul(Var<Real> a, Var<Real> b) {
  same_graph(a, b, "matmul");
  const Tensor<Real>& av = a.value();
  const Tensor<Real>& bv = b.value();
  const int n = av.rows(), k = av.cols(), m = bv.cols();
  if (bv.rows() != k) shape_fail("matmul", av.shape(), bv.shape());
  Tensor<Real> bt({m, k});
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < m; ++c) bt.at(c, r) = bv.at(r, c);
  Tensor<Real> y({n, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) y.at(i, j) = static_cast<Real>(dot(av.row(i), bt.row(j), k));
  const int aid = a.id, bid = b.id;
  return a.graph->push(std::move(y), {aid, bid}, [aid, bid, n, k, m](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    const Tensor<Real>& av2 = gr.value(aid);
    const Tensor<Real>& bv2 = gr.value(bid);
    if (gr.requires_grad(aid)) {
      Tensor<Real>& ga = gr.grad(aid);
      for (int i = 0; i < n; ++i)
        for (int r = 0; r < k; ++r) ga[static_cast<std::size_t>(i) * k + r] += static_cast<Real>(dot(gy.row(i), bv2.row(r), m));
    }
    if (gr.requires_grad(bid)) {
      Tensor<Real>& gb = gr.grad(bid);
      std::vector<double> acc(static_cast<std::size_t>(m));
      for (int r = 0; r < k; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int i = 0; i < n; ++i) axpy(static_cast<double>(av2.at(i, r)), gy.row(i), acc.data(), m);
        add_into(gb.data() + static_cast<std::size_t>(r) * m, acc.data(), acc.size());
      }
    }
  });
}

template <typename Real>
Var<Real> linear(Var<Real> x, Var<Real> w, Var<Real> b) {
  same_graph(x, w, "linear");
  const Tensor<Real>& xv = x.value();
  const Tensor<Real>& wv = w.value();
  const int n = xv.rows(), in = xv.cols();
  if (wv.rank() != 2 || wv.dim(1) != in) shape_fail("linear", xv.shape(), wv.shape());
  const int out = wv.dim(0);
  const bool has_bias = b.valid();
  if (has_bias) {
    same_graph(x, b, "linear");
    if (static_cast<int>(b.value().size()) != out) shape_fail("linear bias", wv.shape(), b.value().shape());
  }
  Tensor<Real> y({n, out});
  for (int i = 0; i < n; ++i) {
    const Real* xr = xv.row(i);
    Real* yr = y.row(i);
    for (int o = 0; o < out; ++o) {
      double s = dot(xr, wv.row(o), in);
      if (has_bias) s += b.value()[static_cast<std::size_t>(o)];
      yr[o] = static_cast<Real>(s);
    }
  }
  const int xid = x.id, wid = w.id, bid = has_bias ? b.id : -1;
  std::vector<int> inputs{xid, wid};
  if (has_bias) inputs.push_back(bid);
  return x.graph->push(std::move(y), std::move(inputs), [xid, wid, bid, n, in, out](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    const Tensor<Real>& xv2 = gr.value(xid);
    const Tensor<Real>& wv2 = gr.value(wid);
    std::vector<double> acc;
    if (gr.requires_grad(xid)) {
      Tensor<Real>& gx = gr.grad(xid);
      acc.assign(static_cast<std::size_t>(in), 0.0);
      for (int i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const Real* gyr = gy.row(i);
        for (int o = 0; o < out; ++o)
          if (gyr[o] != Real(0)) axpy(static_cast<double>(gyr[o]), wv2.row(o), acc.data(), in);
        add_into(gx.data() + static_cast<std::size_t>(i) * in, acc.data(), acc.size());
      }
    }
    if (gr.requires_grad(wid)) {
      Tensor<Real>& gw = gr.grad(wid);
      acc.assign(static_cast<std::size_t>(in), 0.0);
      for (int o = 0; o < out; ++o) {
        std::fill(acc.begin(), acc.end(), 0.0);
        bool any = false;
        for (int i = 0; i < n; ++i) {
          const Real gv = gy.at(i, o);
          if (gv != Real(0)) {
            axpy(static_cast<double>(gv), xv2.row(i), acc.data(), in);
            any = true;
          }
        }
        if (any) add_into(gw.data() + static_cast<std::size_t>(o) * in, acc.data(), acc.size());
      }
    }
    if (bid >= 0 && gr.requires_grad(bid)) {
      Tensor<Real>& gb = gr.grad(bid);
      for (int o = 0; o < out; ++o) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += gy.at(i, o);
        gb[static_cast<std::size_t>(o)] = static_cast<Real>(gb[static_cast<std::size_t>(o)] + s);
      }
    }
  });
}

template <typename Real>
Var<Real> linear(Var<Real> x, Var<Real> w) {
  return linear(x, w, Var<Real>{});
}

template <typename Real>
Var<Real> add(Var<Real> a, Var<Real> b) {
  return elementwise(a, b, "add", 0);
}
template <typename Real>
Var<Real> sub(Var<Real> a, Var<Real> b) {
  return elementwise(a, b, "sub", 1);
}
template <typename Real>
Var<Real> mul(Var<Real> a, Var<Real> b) {
  return elementwise(a, b, "mul", 2);
}
template <typename Real>
Var<Real> minimum(Var<Real> a, Var<Real> b) {
  return elementwise(a, b, "minimum", 3);
}

template <typename Real>
Var<Real> scale(Var<Real> x, double factor) {
  return unary(x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

template <typename Real>
Var<Real> add_scalar(Var<Real> x, double c) {
  return unary(x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

template <typename Real>
Var<Real> sigmoid(Var<Real> x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
}

template <typename Real>
Var<Real> tanh(Var<Real> x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

template <typename Real>
Var<Real> relu(Var<Real> x) {
  return unary(x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

template <typename Real>
Var<Real> exp(Var<Real> x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

template <typename Real>
Var<Real> log(Var<Real> x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

template <typename Real>
Var<Real> square(Var<Real> x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

template <typename Real>
Var<Real> clamp(Var<Real> x, double lo, double hi) {
  return unary(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

template <typename Real>
Var<Real> softmax(Var<Real> x) {
  Graph<Real>& g = graph_of(x);
  const Tensor<Real>& xv = x.value();
  const int n = xv.rows(), m = xv.cols();
  Tensor<Real> y(xv.shape());
  for (int i = 0; i < n; ++i) {
    const Real* xr = xv.row(i);
    const double mx = *std::max_element(xr, xr + m);
    double z = 0;
    for (int j = 0; j < m; ++j) z += std::exp(xr[j] - mx);
    Real* yr = y.row(i);
    for (int j = 0; j < m; ++j) yr[j] = static_cast<Real>(std::exp(xr[j] - mx) / z);
  }
  const int xid = x.id;
  return g.push(std::move(y), {xid}, [xid, n, m](Graph<Real>& gr, int self) {
    const Tensor<Real>& yv = gr.value(self);
    const Tensor<Real>& gy = gr.grad(self);
    Tensor<Real>& gx = gr.grad(xid);
    for (int i = 0; i < n; ++i) {
      const double s = dot(gy.row(i), yv.row(i), m);
      for (int j = 0; j < m; ++j) gx.at(i, j) += static_cast<Real>(yv.at(i, j) * (gy.at(i, j) - s));
    }
  });
}

template <typename Real>
Var<Real> log_softmax(Var<Real> x) {
  Graph<Real>& g = graph_of(x);
  const Tensor<Real>& xv = x.value();
  const int n = xv.rows(), m = xv.cols();
  Tensor<Real> y(xv.shape());
  for (int i = 0; i < n; ++i) {
    const Real* xr = xv.row(i);
    const double mx = *std::max_element(xr, xr + m);
    double z = 0;
    for (int j = 0; j < m; ++j) z += std::exp(xr[j] - mx);
    const double lz = mx + std::log(z);
    Real* yr = y.row(i);
    for (int j = 0; j < m; ++j) yr[j] = static_cast<Real>(xr[j] - lz);
  }
  const int xid = x.id;
  return g.push(std::move(y), {xid}, [xid, n, m](Graph<Real>& gr, int self) {
    const Tensor<Real>& yv = gr.value(self);
    const Tensor<Real>& gy = gr.grad(self);
    Tensor<Real>& gx = gr.grad(xid);
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j < m; ++j) s += gy.at(i, j);
      for (int j = 0; j < m; ++j) gx.at(i, j) += static_cast<Real>(gy.at(i, j) - std::exp(static_cast<double>(yv.at(i, j))) * s);
    }
  });
}

template <typename Real>
Var<Real> sum(Var<Real> x) {
  Graph<Real>& g = graph_of(x);
  double s = 0;
  for (Real v : x.value().values()) s += v;
  const int xid = x.id;
  return g.push(Tensor<Real>::scalar(static_cast<Real>(s)), {xid}, [xid](Graph<Real>& gr, int self) {
    const Real gy = gr.grad(self)[0];
    for (Real& v : gr.grad(xid).values()) v += gy;
  });
}

template <typename Real>
Var<Real> mean(Var<Real> x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

template <typename Real>
Var<Real> weighted_sum(Var<Real> x, std::span<const double> coeffs) {
  Graph<Real>& g = graph_of(x);
  const Tensor<Real>& xv = x.value();
  if (coeffs.size() != xv.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(coeffs.size()) + " coefficients for tensor of shape " +
                     shape_string(xv.shape()));
  }
  double s = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += coeffs[i] * xv[i];
  std::vector<double> c(coeffs.begin(), coeffs.end());
  const int xid = x.id;
  return g.push(Tensor<Real>::scalar(static_cast<Real>(s)), {xid}, [xid, c = std::move(c)](Graph<Real>& gr, int self) {
    const double gy = gr.grad(self)[0];
    Tensor<Real>& gx = gr.grad(xid);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = static_cast<Real>(gx[i] + gy * c[i]);
  });
}

template <typename Real>
Var<Real> concat_cols(Var<Real> a, Var<Real> b) {
  same_graph(a, b, "concat_cols");
  const Tensor<Real>& av = a.value();
  const Tensor<Real>& bv = b.value();
  const int n = av.rows(), p = av.cols(), q = bv.cols();
  if (bv.rows() != n) shape_fail("concat_cols", matrix_shape(av), matrix_shape(bv));
  Tensor<Real> y({n, p + q});
  for (int i = 0; i < n; ++i) {
    std::copy(av.row(i), av.row(i) + p, y.row(i));
    std::copy(bv.row(i), bv.row(i) + q, y.row(i) + p);
  }
  const int aid = a.id, bid = b.id;
  return a.graph->push(std::move(y), {aid, bid}, [aid, bid, n, p, q](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    if (gr.requires_grad(aid)) {
      Tensor<Real>& ga = gr.grad(aid);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) ga[static_cast<std::size_t>(i) * p + j] += gy.at(i, j);
    }
    if (gr.requires_grad(bid)) {
      Tensor<Real>& gb = gr.grad(bid);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) gb[static_cast<std::size_t>(i) * q + j] += gy.at(i, p + j);
    }
  });
}

template <typename Real>
Var<Real> concat_rows(Var<Real> a, Var<Real> b) {
  same_graph(a, b, "concat_rows");
  const Tensor<Real>& av = a.value();
  const Tensor<Real>& bv = b.value();
  const int c = av.cols();
  if (bv.cols() != c) shape_fail("concat_rows", matrix_shape(av), matrix_shape(bv));
  const std::size_t na = av.size(), nb = bv.size();
  Tensor<Real> y({av.rows() + bv.rows(), c});
  std::copy(av.data(), av.data() + na, y.data());
  std::copy(bv.data(), bv.data() + nb, y.data() + na);
  const int aid = a.id, bid = b.id;
  return a.graph->push(std::move(y), {aid, bid}, [aid, bid, na, nb](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    if (gr.requires_grad(aid)) {
      Tensor<Real>& ga = gr.grad(aid);
      for (std::size_t i = 0; i < na; ++i) ga[i] += gy[i];
    }
    if (gr.requires_grad(bid)) {
      Tensor<Real>& gb = gr.grad(bid);
      for (std::size_t i = 0; i < nb; ++i) gb[i] += gy[na + i];
    }
  });
}

template <typename Real>
Var<Real> gather_rows(Var<Real> table, std::span<const int> ids) {
  Graph<Real>& g = graph_of(table);
  const Tensor<Real>& tv = table.value();
  const int rows = tv.rows(), cols = tv.cols();
  const int k = static_cast<int>(ids.size());
  if (k == 0) throw ShapeError("gather_rows: empty index list");
  Tensor<Real> y({k, cols});
  for (int i = 0; i < k; ++i) {
    const int r = ids[static_cast<std::size_t>(i)];
    if (r < 0 || r >= rows) {
      throw std::out_of_range("gather_rows: index " + std::to_string(r) + " out of range for table " +
                              shape_string(tv.shape()));
    }
    std::copy(tv.row(r), tv.row(r) + cols, y.row(i));
  }
  std::vector<int> idx(ids.begin(), ids.end());
  const int tid = table.id;
  return g.push(std::move(y), {tid}, [tid, cols, idx = std::move(idx)](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    Tensor<Real>& gt = gr.grad(tid);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      Real* dst = gt.data() + static_cast<std::size_t>(idx[i]) * cols;
      const Real* src = gy.row(static_cast<int>(i));
      for (int j = 0; j < cols; ++j) dst[j] += src[j];
    }
  });
}

template <typename Real>
Var<Real> pick(Var<Real> x, std::span<const int> cols) {
  Graph<Real>& g = graph_of(x);
  const Tensor<Real>& xv = x.value();
  const int n = xv.rows(), m = xv.cols();
  if (static_cast<int>(cols.size()) != n) {
    throw ShapeError("pick: " + std::to_string(cols.size()) + " indices for " + shape_string(xv.shape()));
  }
  Tensor<Real> y({n});
  for (int i = 0; i < n; ++i) {
    const int c = cols[static_cast<std::size_t>(i)];
    if (c < 0 || c >= m) throw std::out_of_range("pick: column " + std::to_string(c) + " out of range");
    y[static_cast<std::size_t>(i)] = xv.at(i, c);
  }
  std::vector<int> idx(cols.begin(), cols.end());
  const int xid = x.id;
  return g.push(std::move(y), {xid}, [xid, m, idx = std::move(idx)](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    Tensor<Real>& gx = gr.grad(xid);
    for (std::size_t i = 0; i < idx.size(); ++i) gx[i * static_cast<std::size_t>(m) + idx[i]] += gy[i];
  });
}

template <typename Real>
Var<Real> reshape(Var<Real> x, Shape shape) {
  Graph<Real>& g = graph_of(x);
  Tensor<Real> y = x.value();
  y.reshape(std::move(shape));
  const int xid = x.id;
  return g.push(std::move(y), {xid}, [xid](Graph<Real>& gr, int self) {
    const Tensor<Real>& gy = gr.grad(self);
    Tensor<Real>& gx = gr.grad(xid);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
  });
}

template <typename Real>
Var<Real> stop_gradient(Var<Real> x) {
  return graph_of(x).constant(x.value());
}

template <typename Real>
Var<Real> gru_cell(Var<Real> x, Var<Real> h, Var<Real> w_ih, Var<Real> w_hh, Var<Real> b_ih, Var<Real> b_hh,
                   int active_rows) {
  same_graph(x, h, "gru_cell");
  same_graph(x, w_ih, "gru_cell");
  same_graph(x, w_hh, "gru_cell");
  const Tensor<Real>& xv = x.value();
  const Tensor<Real>& hv = h.value();
  const Tensor<Real>& wi = w_ih.value();
  const Tensor<Real>& wh = w_hh.value();
  const Tensor<Real>& bi = b_ih.value();
  const Tensor<Real>& bh = b_hh.value();
  const int n = xv.rows(), in = xv.cols(), hid = hv.cols();
  if (hv.rows() != n) shape_fail("gru_cell(x, h)", xv.shape(), hv.shape());
  if (wi.rank() != 2 || wi.dim(0) != 3 * hid || wi.dim(1) != in) shape_fail("gru_cell(x, weight_ih)", xv.shape(), wi.shape());
  if (wh.rank() != 2 || wh.dim(0) != 3 * hid || wh.dim(1) != hid) shape_fail("gru_cell(h, weight_hh)", hv.shape(), wh.shape());
  if (static_cast<int>(bi.size()) != 3 * hid || static_cast<int>(bh.size()) != 3 * hid) {
    shape_fail("gru_cell(bias_ih, bias_hh)", bi.shape(), bh.shape());
  }
  const int active = active_rows < 0 ? n : std::min(active_rows, n);

  Tensor<Real> y({n, hid});
  // Saved activations for active rows: r, z, n, and U_n h + b_hn.
  Tensor<Real> saved({std::max(active, 1), 4 * hid});
  for (int b = 0; b < active; ++b) {
    const Real* xr = xv.row(b);
    const Real* hr = hv.row(b);
    Real* sv = saved.row(b);
    Real* yr = y.row(b);
    for (int j = 0; j < hid; ++j) {
      const double gir = dot(xr, wi.row(j), in) + bi[j];
      const double giz = dot(xr, wi.row(hid + j), in) + bi[hid + j];
      const double gin = dot(xr, wi.row(2 * hid + j), in) + bi[2 * hid + j];
      const double ghr = dot(hr, wh.row(j), hid) + bh[j];
      const double ghz = dot(hr, wh.row(hid + j), hid) + bh[hid + j];
      const double ghn = dot(hr, wh.row(2 * hid + j), hid) + bh[2 * hid + j];
      const double r = 1.0 / (1.0 + std::exp(-(gir + ghr)));
      const double z = 1.0 / (1.0 + std::exp(-(giz + ghz)));
      const double nn = std::tanh(gin + r * ghn);
      sv[j] = static_cast<Real>(r);
      sv[hid + j] = static_cast<Real>(z);
      sv[2 * hid + j] = static_cast<Real>(nn);
      sv[3 * hid + j] = static_cast<Real>(ghn);
      yr[j] = static_cast<Real>((1.0 - z) * nn + z * hr[j]);
    }
  }
  for (int b = active; b < n; ++b) std::copy(hv.row(b), hv.row(b) + hid, y.row(b));

  const int xid = x.id, hidx = h.id, wiid = w_ih.id, whid = w_hh.id, biid = b_ih.id, bhid = b_hh.id;
  return x.graph->push(
      std::move(y), {xid, hidx, wiid, whid, biid, bhid},
      [=, saved = std::move(saved)](Graph<Real>& gr, int self) {
        const Tensor<Real>& gy = gr.grad(self);
        const Tensor<Real>& xv2 = gr.value(xid);
        const Tensor<Real>& hv2 = gr.value(hidx);
        const Tensor<Real>& wi2 = gr.value(wiid);
        const Tensor<Real>& wh2 = gr.value(whid);
        const bool need_x = gr.requires_grad(xid), need_h = gr.requires_grad(hidx);
        const bool need_wi = gr.requires_grad(wiid), need_wh = gr.requires_grad(whid);
        const bool need_bi = gr.requires_grad(biid), need_bh = gr.requires_grad(bhid);
        std::vector<double> dwi(need_wi ? static_cast<std::size_t>(3 * hid) * in : 0);
        std::vector<double> dwh(need_wh ? static_cast<std::size_t>(3 * hid) * hid : 0);
        std::vector<double> dbi(static_cast<std::size_t>(3 * hid)), dbh(static_cast<std::size_t>(3 * hid));
        std::vector<double> dgi(static_cast<std::size_t>(3 * hid)), dgh(static_cast<std::size_t>(3 * hid));
        std::vector<double> accx(static_cast<std::size_t>(in)), acch(static_cast<std::size_t>(hid));
        for (int b = 0; b < active; ++b) {
          const Real* gyr = gy.row(b);
          const Real* hr = hv2.row(b);
          const Real* sv = saved.row(b);
          std::fill(acch.begin(), acch.end(), 0.0);
          for (int j = 0; j < hid; ++j) {
            const double r = sv[j], z = sv[hid + j], nn = sv[2 * hid + j], ghn = sv[3 * hid + j];
            const double d = gyr[j];
            const double dn = d * (1.0 - z);
            const double dz = d * (hr[j] - nn);
            acch[static_cast<std::size_t>(j)] += d * z;
            const double dnp = dn * (1.0 - nn * nn);
            const double dr = dnp * ghn;
            const double dzp = dz * z * (1.0 - z);
            const double drp = dr * r * (1.0 - r);
            dgi[static_cast<std::size_t>(j)] = drp;
            dgi[static_cast<std::size_t>(hid + j)] = dzp;
            dgi[static_cast<std::size_t>(2 * hid + j)] = dnp;
            dgh[static_cast<std::size_t>(j)] = drp;
            dgh[static_cast<std::size_t>(hid + j)] = dzp;
            dgh[static_cast<std::size_t>(2 * hid + j)] = dnp * r;
          }
          for (int k = 0; k < 3 * hid; ++k) {
            dbi[static_cast<std::size_t>(k)] += dgi[static_cast<std::size_t>(k)];
            dbh[static_cast<std::size_t>(k)] += dgh[static_cast<std::size_t>(k)];
          }
          if (need_x) {
            std::fill(accx.begin(), accx.end(), 0.0);
            for (int k = 0; k < 3 * hid; ++k) axpy(dgi[static_cast<std::size_t>(k)], wi2.row(k), accx.data(), in);
            add_into(gr.grad(xid).row(b), accx.data(), accx.size());
          }
          if (need_h) {
            for (int k = 0; k < 3 * hid; ++k) axpy(dgh[static_cast<std::size_t>(k)], wh2.row(k), acch.data(), hid);
            add_into(gr.grad(hidx).row(b), acch.data(), acch.size());
          }
          if (need_wi) {
            const Real* xr = xv2.row(b);
            for (int k = 0; k < 3 * hid; ++k) {
              const double c = dgi[static_cast<std::size_t>(k)];
              if (c != 0.0) axpy(c, xr, dwi.data() + static_cast<std::size_t>(k) * in, in);
            }
          }
          if (need_wh) {
            for (int k = 0; k < 3 * hid; ++k) {
              const double c = dgh[static_cast<std::size_t>(k)];
              if (c != 0.0) axpy(c, hr, dwh.data() + static_cast<std::size_t>(k) * hid, hid);
            }
          }
        }
        if (need_h) {
          Tensor<Real>& gh = gr.grad(hidx);
          for (int b = active; b < gy.rows(); ++b)
            for (int j = 0; j < hid; ++j) gh.at(b, j) += gy.at(b, j);
        }
        if (need_wi) add_into(gr.grad(wiid).data(), dwi.data(), dwi.size());
        if (need_wh) add_into(gr.grad(whid).data(), dwh.data(), dwh.size());
        if (need_bi) add_into(gr.grad(biid).data(), dbi.data(), dbi.size());
        if (need_bh) add_into(gr.grad(bhid).data(), dbh.data(), dbh.size());
      });
}

template <typename Real>
Var<Real> binary_cross_entropy(Var<Real> p, const Tensor<Real>& labels, std::span<const double> row_weights) {
  Graph<Real>& g = graph_of(p);
  const Tensor<Real>& pv = p.value();
  const int n = pv.rows(), m = pv.cols();
  if (labels.rows() != n || labels.cols() != m) shape_fail("binary_cross_entropy", pv.shape(), labels.shape());
  if (static_cast<int>(row_weights.size()) != n) {
    throw ShapeError("binary_cross_entropy: " + std::to_string(row_weights.size()) + " row weights for " +
                     std::to_string(n) + " rows");
  }
  const double lo = kProbClamp, hi = 1.0 - kProbClamp;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    double row = 0;
    for (int j = 0; j < m; ++j) {
      const double q = std::clamp(static_cast<double>(pv.at(i, j)), lo, hi);
      const double y = labels.at(i, j);
      row += y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
    }
    total += row_weights[static_cast<std::size_t>(i)] * (-row / m);
  }
  std::vector<double> w(row_weights.begin(), row_weights.end());
  const int pid = p.id;
  return g.push(Tensor<Real>::scalar(static_cast<Real>(total)), {pid},
                [pid, n, m, lo, hi, labels, w = std::move(w)](Graph<Real>& gr, int self) {
                  const double gyv = gr.grad(self)[0];
                  const Tensor<Real>& pv2 = gr.value(pid);
                  Tensor<Real>& gp = gr.grad(pid);
                  for (int i = 0; i < n; ++i) {
                    const double c = -gyv * w[static_cast<std::size_t>(i)] / m;
                    for (int j = 0; j < m; ++j) {
                      const double q = pv2.at(i, j);
                      if (q < lo || q > hi) continue;
                      const double y = labels.at(i, j);
                      gp.at(i, j) += static_cast<Real>(c * (y / q - (1.0 - y) / (1.0 - q)));
                    }
                  }
                });
}

#define TAC_INSTANTIATE_OPS(R)                                                                            \
  template Var<R> matmul(Var<R>, Var<R>);                                                                 \
  template Var<R> linear(Var<R>, Var<R>, Var<R>);                                                         \
  template Var<R> linear(Var<R>, Var<R>);                                                                 \
  template Var<R> add(Var<R>, Var<R>);                                                                    \
  template Var<R> sub(Var<R>, Var<R>);                                                                    \
  template Var<R> mul(Var<R>, Var<R>);                                                                    \
  template Var<R> minimum(Var<R>, Var<R>);                                                                \
  template Var<R> scale(Var<R>, double);                                                                  \
  template Var<R> add_scalar(Var<R>, double);                                                             \
  template Var<R> sigmoid(Var<R>);                                                                        \
  template Var<R> tanh(Var<R>);                                                                           \
  template Var<R> relu(Var<R>);                                                                           \
  template Var<R> exp(Var<R>);                                                                            \
  template Var<R> log(Var<R>);                                                                            \
  template Var<R> square(Var<R>);                                                                         \
  template Var<R> clamp(Var<R>, double, double);                                                          \
  template Var<R> softmax(Var<R>);                                                                        \
  template Var<R> log_softmax(Var<R>);                                                                    \
  template Var<R> sum(Var<R>);                                                                            \
  template Var<R> mean(Var<R>);                                                                           \
  template Var<R> weighted_sum(Var<R>, std::span<const double>);                                          \
  template Var<R> concat_cols(Var<R>, Var<R>);                                                            \
  template Var<R> concat_rows(Var<R>, Var<R>);                                                            \
  template Var<R> gather_rows(Var<R>, std::span<const int>);                                              \
  template Var<R> pick(Var<R>, std::span<const int>);                                                     \
  template Var<R> reshape(Var<R>, Shape);                                                                 \
  template Var<R> stop_gradient(Var<R>);                                                                  \
  template Var<R> gru_cell(Var<R>, Var<R>, Var<R>, Var<R>, Var<R>, Var<R>, int);                          \
  template Var<R> binary_cross_entropy(Var<R>, const Tensor<R>&, std::span<const double>);

TAC_INSTANTIATE_OPS(float)
TAC_INSTANTIATE_OPS(double)

#undef TAC_INSTANTIATE_OPS

}  // namespace tac::ad
