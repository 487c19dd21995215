#pragma once

// Reverse-mode automatic differentiation over dense row-major Eigen
// matrices. A Tape records one forward pass; `backward` walks it in reverse
// and leaves gradients on every node that requires them. Parameters enter the
// tape as leaves bound to an external gradient accumulator.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tablatex/error.hpp"
#include "tablatex/nn/fault.hpp"

namespace tablatex::nn {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic, Eigen::RowMajor>;

template <class S>
class Tape;

template <class S>
struct Var {
  Tape<S>* tape = nullptr;
  int id = -1;

  const Mat<S>& value() const { return tape->value(id); }
  const Mat<S>& grad() const { return tape->grad(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

template <class S>
class Tape {
 public:
  using Backward = std::function<void(Tape&, int)>;

  struct Node {
    Mat<S> own;
    const Mat<S>* ext = nullptr;  // parameter leaves reference their storage
    Mat<S> grad;
    bool requires_grad = false;
    Mat<S>* sink = nullptr;  // parameter gradient accumulator
    Backward backward;
  };

  Tape() { nodes_.reserve(512); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Constant input; gradients are never tracked.
  Var<S> constant(Mat<S> value) { return push(std::move(value), false, nullptr); }

  // Leaf bound to a parameter. The same parameter bound twice yields the
  // same node.
  Var<S> param(const Mat<S>& value, Mat<S>* grad_sink) {
    for (const auto& [ptr, id] : bound_)
      if (ptr == &value) return {this, id};
    Var<S> v = push(Mat<S>(), grad_sink != nullptr, grad_sink);
    nodes_.back().ext = &value;
    bound_.emplace_back(&value, v.id);
    return v;
  }

  // Records an op result. `backward` runs only if some input needs a gradient.
  template <class In>
  Var<S> record(Mat<S> value, std::initializer_list<In> inputs, Backward backward) {
    bool rg = false;
    for (const auto& in : inputs) rg = rg || nodes_[static_cast<std::size_t>(in.id)].requires_grad;
    Var<S> v = push(std::move(value), rg, nullptr);
    if (rg) nodes_.back().backward = std::move(backward);
    return v;
  }
  Var<S> record(Mat<S> value, const std::vector<Var<S>>& inputs, Backward backward) {
    bool rg = false;
    for (const auto& in : inputs) rg = rg || nodes_[static_cast<std::size_t>(in.id)].requires_grad;
    Var<S> v = push(std::move(value), rg, nullptr);
    if (rg) nodes_.back().backward = std::move(backward);
    return v;
  }

  const Mat<S>& value(int id) const {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    return n.ext ? *n.ext : n.own;
  }
  const Mat<S>& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Adds `g` into the gradient of node `id` (no-op for constants).
  template <class Expr>
  void accumulate(int id, const Expr& g) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to every node,
  // then adds leaf gradients into their parameter sinks.
  void backward(Var<S> root) {
    if (root.value().size() != 1) throw Error(ErrorKind::ShapeError, "backward needs a scalar root");
    auto& r = nodes_[static_cast<std::size_t>(root.id)];
    if (!r.requires_grad) return;
    r.grad = Mat<S>::Ones(1, 1);
    for (int id = root.id; id >= 0; --id) {
      auto& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, id);
    }
    for (auto& n : nodes_) {
      if (!n.sink || n.grad.size() == 0) continue;
      if (n.sink->size() == 0) *n.sink = Mat<S>::Zero(n.grad.rows(), n.grad.cols());
      *n.sink += n.grad;
    }
  }

 private:
  Var<S> push(Mat<S> value, bool rg, Mat<S>* sink) {
    Node n;
    n.own = std::move(value);
    n.requires_grad = rg;
    n.sink = sink;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<const Mat<S>*, int>> bound_;
};

namespace detail {

inline void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::ShapeError, what);
}

template <class S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x / std::sqrt(S(2))));
}

template <class S>
S gelu_grad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x / std::sqrt(S(2))));
  const S pdf = std::exp(S(-0.5) * x * x) / std::sqrt(S(2) * S(3.14159265358979323846));
  return cdf + x * pdf;
}

}  // namespace detail

// ---- linear algebra -------------------------------------------------------

template <class S>
Var<S> matmul(Var<S> a, Var<S> b) {
  detail::check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Mat<S> out = a.value() * b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, int self) {
    const Mat<S>& g = t.grad(self);
    if (t.requires_grad(a.id)) {
      if (gradient_fault() == GradientFault::MatmulLhs)
        t.accumulate(a.id, (g * b.value().transpose() * S(1.001)).eval());
      else
        t.accumulate(a.id, g * b.value().transpose());
    }
    if (t.requires_grad(b.id)) t.accumulate(b.id, a.value().transpose() * g);
  });
}

// a * b^T
template <class S>
Var<S> matmul_nt(Var<S> a, Var<S> b) {
  detail::check(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  Mat<S> out = a.value() * b.value().transpose();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, int self) {
    const Mat<S>& g = t.grad(self);
    if (t.requires_grad(a.id)) t.accumulate(a.id, g * b.value());
    if (t.requires_grad(b.id)) t.accumulate(b.id, g.transpose() * a.value());
  });
}

// ---- elementwise ----------------------------------------------------------

template <class S>
Var<S> add(Var<S> a, Var<S> b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shapes differ");
  Mat<S> out = a.value() + b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, int self) {
    t.accumulate(a.id, t.grad(self));
    t.accumulate(b.id, t.grad(self));
  });
}

// Adds a 1 x n row vector to every row.
template <class S>
Var<S> add_rowvec(Var<S> a, Var<S> b) {
  detail::check(b.rows() == 1 && a.cols() == b.cols(), "add_rowvec: bias must be 1 x cols");
  Mat<S> out = a.value().rowwise() + b.value().row(0);
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, int self) {
    t.accumulate(a.id, t.grad(self));
    if (t.requires_grad(b.id)) t.accumulate(b.id, t.grad(self).colwise().sum());
  });
}

template <class S>
Var<S> mul(Var<S> a, Var<S> b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shapes differ");
  Mat<S> out = a.value().cwiseProduct(b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<S>& t, int self) {
    if (t.requires_grad(a.id)) t.accumulate(a.id, t.grad(self).cwiseProduct(b.value()));
    if (t.requires_grad(b.id)) t.accumulate(b.id, t.grad(self).cwiseProduct(a.value()));
  });
}

template <class S>
Var<S> scale(Var<S> a, S s) {
  Mat<S> out = a.value() * s;
  return a.tape->record(std::move(out), {a}, [a, s](Tape<S>& t, int self) { t.accumulate(a.id, t.grad(self) * s); });
}

template <class S>
Var<S> sum_all(Var<S> a) {
  Mat<S> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->record(std::move(out), {a}, [a](Tape<S>& t, int self) {
    t.accumulate(a.id, Mat<S>::Constant(a.rows(), a.cols(), t.grad(self)(0, 0)));
  });
}

template <class S>
Var<S> relu(Var<S> a) {
  Mat<S> out = a.value().cwiseMax(S(0));
  return a.tape->record(std::move(out), {a}, [a](Tape<S>& t, int self) {
    t.accumulate(a.id, (a.value().array() > S(0)).select(t.grad(self), S(0)).matrix());
  });
}

template <class S>
Var<S> gelu(Var<S> a) {
  Mat<S> out = a.value().unaryExpr([](S x) { return detail::gelu(x); });
  return a.tape->record(std::move(out), {a}, [a](Tape<S>& t, int self) {
    t.accumulate(a.id, t.grad(self).cwiseProduct(a.value().unaryExpr([](S x) { return detail::gelu_grad(x); })));
  });
}

template <class S>
Var<S> sigmoid(Var<S> a) {
  Mat<S> out = a.value().unaryExpr([](S x) { return S(1) / (S(1) + std::exp(-x)); });
  Tape<S>* tape = a.tape;
  Var<S> res = tape->record(std::move(out), {a}, [a](Tape<S>& t, int self) {
    const Mat<S>& y = t.value(self);
    t.accumulate(a.id, t.grad(self).cwiseProduct(y.cwiseProduct((S(1) - y.array()).matrix())));
  });
  return res;
}

// ---- attention helpers ----------------------------------------------------

// Row-wise softmax. With `causal`, entry (i, j) for j > i is masked out.
template <class S>
Var<S> softmax_rows(Var<S> a, bool causal = false) {
  const Mat<S>& x = a.value();
  Mat<S> y = Mat<S>::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::Index n = causal ? std::min<Eigen::Index>(i + 1, x.cols()) : x.cols();
    const S m = x.row(i).head(n).maxCoeff();
    S z = 0;
    for (Eigen::Index j = 0; j < n; ++j) z += (y(i, j) = std::exp(x(i, j) - m));
    y.row(i).head(n) /= z;
  }
  return a.tape->record(std::move(y), {a}, [a](Tape<S>& t, int self) {
    const Mat<S>& y = t.value(self);
    const Mat<S>& g = t.grad(self);
    Mat<S> yg = y.cwiseProduct(g);
    Mat<S> dx = yg - (y.array().colwise() * yg.rowwise().sum().array()).matrix();
    t.accumulate(a.id, dx);
  });
}

template <class S>
Var<S> layer_norm(Var<S> x, Var<S> gamma, Var<S> beta, S eps = S(1e-5)) {
  detail::check(gamma.rows() == 1 && gamma.cols() == x.cols() && beta.cols() == x.cols(),
                "layer_norm: gain/offset must be 1 x cols");
  const Eigen::Index n = x.cols();
  const Mat<S>& v = x.value();
  Mat<S> xhat(v.rows(), n);
  Mat<S> inv_std(v.rows(), 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const S mean = v.row(i).mean();
    const S var = (v.row(i).array() - mean).square().mean();
    inv_std(i, 0) = S(1) / std::sqrt(var + eps);
    xhat.row(i) = (v.row(i).array() - mean) * inv_std(i, 0);
  }
  Mat<S> out = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
  out.rowwise() += beta.value().row(0);
  return x.tape->record(std::move(out), {x, gamma, beta},
                        [x, gamma, beta, xhat, inv_std, n](Tape<S>& t, int self) {
                          const Mat<S>& g = t.grad(self);
                          if (t.requires_grad(gamma.id)) t.accumulate(gamma.id, g.cwiseProduct(xhat).colwise().sum());
                          if (t.requires_grad(beta.id)) t.accumulate(beta.id, g.colwise().sum());
                          if (!t.requires_grad(x.id)) return;
                          Mat<S> gh = (g.array().rowwise() * gamma.value().row(0).array()).matrix();
                          Mat<S> dx(g.rows(), n);
                          for (Eigen::Index i = 0; i < g.rows(); ++i) {
                            const S m1 = gh.row(i).mean();
                            const S m2 = gh.row(i).cwiseProduct(xhat.row(i)).mean();
                            dx.row(i) = (gh.row(i).array() - m1 - xhat.row(i).array() * m2) * inv_std(i, 0);
                          }
                          t.accumulate(x.id, dx);
                        });
}

template <class S>
Var<S> slice_cols(Var<S> a, Eigen::Index start, Eigen::Index n) {
  detail::check(start >= 0 && start + n <= a.cols(), "slice_cols: out of range");
  Mat<S> out = a.value().middleCols(start, n);
  return a.tape->record(std::move(out), {a}, [a, start, n](Tape<S>& t, int self) {
    Mat<S> g = Mat<S>::Zero(a.rows(), a.cols());
    g.middleCols(start, n) = t.grad(self);
    t.accumulate(a.id, g);
  });
}

template <class S>
Var<S> concat_cols(const std::vector<Var<S>>& parts) {
  detail::check(!parts.empty(), "concat_cols: nothing to concatenate");
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    detail::check(p.rows() == parts[0].rows(), "concat_cols: row counts differ");
    cols += p.cols();
  }
  Mat<S> out(parts[0].rows(), cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return parts[0].tape->record(std::move(out), parts, [parts](Tape<S>& t, int self) {
    Eigen::Index c = 0;
    for (const auto& p : parts) {
      if (t.requires_grad(p.id)) t.accumulate(p.id, t.grad(self).middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

// Rows `ids` of `table`.
template <class S>
Var<S> gather_rows(Var<S> table, const std::vector<int>& ids) {
  Mat<S> out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    detail::check(ids[i] >= 0 && ids[i] < table.rows(), "gather_rows: id out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  return table.tape->record(std::move(out), {table}, [table, ids](Tape<S>& t, int self) {
    Mat<S> g = Mat<S>::Zero(table.rows(), table.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) g.row(ids[i]) += t.grad(self).row(static_cast<Eigen::Index>(i));
    t.accumulate(table.id, g);
  });
}

// First `n` rows.
template <class S>
Var<S> head_rows(Var<S> a, Eigen::Index n) {
  detail::check(n <= a.rows(), "head_rows: out of range");
  Mat<S> out = a.value().topRows(n);
  return a.tape->record(std::move(out), {a}, [a, n](Tape<S>& t, int self) {
    Mat<S> g = Mat<S>::Zero(a.rows(), a.cols());
    g.topRows(n) = t.grad(self);
    t.accumulate(a.id, g);
  });
}

// Inverted dropout with a precomputed keep mask (entries 0 or 1/(1-p)).
template <class S>
Var<S> apply_mask(Var<S> a, const Mat<S>& mask) {
  detail::check(mask.rows() == a.rows() && mask.cols() == a.cols(), "apply_mask: shape differs");
  Mat<S> out = a.value().cwiseProduct(mask);
  return a.tape->record(std::move(out), {a}, [a, mask](Tape<S>& t, int self) {
    t.accumulate(a.id, t.grad(self).cwiseProduct(mask));
  });
}

// ---- convolution ----------------------------------------------------------

// Feature maps are stored as [H*W x C] with row index y*W + x.
struct ConvGeometry {
  int in_h = 0, in_w = 0, in_c = 0;
  int kernel = 3, stride = 1, pad = 1;
  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
};

namespace detail {

template <class S>
Mat<S> im2col(const Mat<S>& x, const ConvGeometry& g) {
  const int oh = g.out_h(), ow = g.out_w(), k = g.kernel;
  Mat<S> cols = Mat<S>::Zero(oh * ow, k * k * g.in_c);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * g.stride - g.pad + ky;
        if (iy < 0 || iy >= g.in_h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * g.stride - g.pad + kx;
          if (ix < 0 || ix >= g.in_w) continue;
          cols.row(oy * ow + ox).segment((ky * k + kx) * g.in_c, g.in_c) = x.row(iy * g.in_w + ix);
        }
      }
  return cols;
}

template <class S>
Mat<S> col2im(const Mat<S>& cols, const ConvGeometry& g) {
  const int oh = g.out_h(), ow = g.out_w(), k = g.kernel;
  Mat<S> x = Mat<S>::Zero(g.in_h * g.in_w, g.in_c);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * g.stride - g.pad + ky;
        if (iy < 0 || iy >= g.in_h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * g.stride - g.pad + kx;
          if (ix < 0 || ix >= g.in_w) continue;
          x.row(iy * g.in_w + ix) += cols.row(oy * ow + ox).segment((ky * k + kx) * g.in_c, g.in_c);
        }
      }
  return x;
}

}  // namespace detail

// y = im2col(x) * w + b with w of shape [k*k*C_in x C_out] and b [1 x C_out].
template <class S>
Var<S> conv2d(Var<S> x, Var<S> w, Var<S> b, const ConvGeometry& g) {
  detail::check(x.rows() == g.in_h * g.in_w && x.cols() == g.in_c, "conv2d: input does not match geometry");
  detail::check(w.rows() == g.kernel * g.kernel * g.in_c, "conv2d: weight rows != k*k*C_in");
  detail::check(b.rows() == 1 && b.cols() == w.cols(), "conv2d: bias must be 1 x C_out");
  detail::check(g.out_h() > 0 && g.out_w() > 0, "conv2d: empty output");
  Mat<S> cols = detail::im2col(x.value(), g);
  Mat<S> out = cols * w.value();
  out.rowwise() += b.value().row(0);
  return x.tape->record(std::move(out), {x, w, b}, [x, w, b, g, cols = std::move(cols)](Tape<S>& t, int self) {
    const Mat<S>& gy = t.grad(self);
    if (t.requires_grad(w.id)) t.accumulate(w.id, cols.transpose() * gy);
    if (t.requires_grad(b.id)) t.accumulate(b.id, gy.colwise().sum());
    if (t.requires_grad(x.id)) t.accumulate(x.id, detail::col2im<S>(gy * w.value().transpose(), g));
  });
}

// ---- loss -----------------------------------------------------------------

// Mean over positions whose target is not `pad_id` of the cross-entropy
// against a smoothed target: 1 - eps on the target, eps / (V - 1) on every
// other id.
template <class S>
Var<S> smoothed_cross_entropy(Var<S> logits, const std::vector<int>& targets, S eps, int pad_id) {
  const Mat<S>& z = logits.value();
  detail::check(z.rows() == static_cast<Eigen::Index>(targets.size()), "loss: logits/targets length differ");
  const Eigen::Index V = z.cols();
  detail::check(V >= 2, "loss: vocabulary too small");
  const S off = eps / S(V - 1);
  const S on = S(1) - eps;
  Mat<S> prob(z.rows(), V);
  S total = 0;
  int counted = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const S m = z.row(i).maxCoeff();
    const S lse = m + std::log((z.row(i).array() - m).exp().sum());
    prob.row(i) = (z.row(i).array() - lse).exp();
    const int y = targets[static_cast<std::size_t>(i)];
    if (y == pad_id) continue;
    detail::check(y >= 0 && y < V, "loss: target id out of range");
    const S row_sum = (z.row(i).array() - lse).sum();
    const S lp_y = z(i, y) - lse;
    total += -(on * lp_y + off * (row_sum - lp_y));
    ++counted;
  }
  Mat<S> out(1, 1);
  out(0, 0) = counted ? total / S(counted) : S(0);
  return logits.tape->record(std::move(out), {logits},
                             [logits, targets, prob = std::move(prob), on, off, pad_id, counted](Tape<S>& t, int self) {
                               if (!counted) return;
                               const S g = t.grad(self)(0, 0) / S(counted);
                               Mat<S> dz = Mat<S>::Zero(prob.rows(), prob.cols());
                               for (Eigen::Index i = 0; i < prob.rows(); ++i) {
                                 const int y = targets[static_cast<std::size_t>(i)];
                                 if (y == pad_id) continue;
                                 dz.row(i) = (prob.row(i).array() - off) * g;
                                 dz(i, y) = (prob(i, y) - on) * g;
                               }
                               t.accumulate(logits.id, dz);
                             });
}

}  // namespace tablatex::nn
