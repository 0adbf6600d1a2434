#include "dgd/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgd/errors.hpp"

namespace dgd::ad {

const Tensor& Var::value() const {
  if (!graph_) throw GraphError("use of an unbound Var");
  return graph_->value(*this);
}

Graph& Var::graph() const {
  if (!graph_) throw GraphError("use of an unbound Var");
  return *graph_;
}

void Graph::check_owner(Var v) const {
  if (v.graph_ != this || v.id_ >= nodes_.size()) throw GraphError("Var does not belong to this graph");
}

Var Graph::constant(Tensor value) { return record("constant", std::move(value), {}, nullptr); }

Var Graph::parameter(Tensor value) {
  Var v = record("parameter", std::move(value), {}, nullptr);
  nodes_.back().requires_grad = true;
  return v;
}

const Tensor& Graph::value(Var v) const {
  check_owner(v);
  return nodes_[v.id_].value;
}

bool Graph::requires_grad(Var v) const {
  check_owner(v);
  return nodes_[v.id_].requires_grad;
}

Var Graph::record(const char* op, Tensor value, std::initializer_list<Var> parents, Backward backward) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  bool needs = false;
  for (Var p : parents) {
    check_owner(p);
    needs = needs || nodes_[p.id_].requires_grad;
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  differentiated_ = false;
  return Var(this, nodes_.size() - 1);
}

void Graph::accumulate(Var v, const Tensor& gradient) {
  check_owner(v);
  Node& node = nodes_[v.id_];
  if (!node.requires_grad) return;
  if (gradient.size() != node.grad.size()) throw GraphError("gradient shape mismatch during backward");
  auto dst = node.grad.data();
  auto src = gradient.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Graph::backward(Var loss) {
  check_owner(loss);
  if (nodes_[loss.id_].value.size() != 1) {
    throw GraphError("backward() needs a one-element loss, got shape " +
                     shape_string(nodes_[loss.id_].value.shape()));
  }
  for (Node& n : nodes_) {
    n.grad = n.requires_grad ? Tensor::zeros_like(n.value) : Tensor();
  }
  differentiated_ = true;
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad[0] = 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, n.grad, n.value);
  }
}

const Tensor& Graph::grad(Var v) const {
  check_owner(v);
  const Node& n = nodes_[v.id_];
  if (!n.requires_grad) throw GraphError("gradient requested for a value that does not depend on any parameter");
  if (!differentiated_) throw GraphError("gradient requested before backward()");
  return n.grad;
}

namespace {

Graph& same_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw GraphError("operands belong to different graphs");
  return a.graph();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
  }
}

// out[n,m] = a[n,k] * b[k,m]; transpose flags select a^T / b^T.
Tensor matmul_kernel(const Tensor& a, bool ta, const Tensor& b, bool tb) {
  const std::size_t n = ta ? a.cols() : a.rows();
  const std::size_t k = ta ? a.rows() : a.cols();
  const std::size_t kb = tb ? b.cols() : b.rows();
  const std::size_t m = tb ? b.rows() : b.cols();
  if (k != kb) throw ShapeError("matmul: inner dimensions " + std::to_string(k) + " and " + std::to_string(kb));
  Tensor out(Shape{n, m});
  const std::size_t ac = a.cols();
  const std::size_t bc = b.cols();
  auto A = a.data();
  auto B = b.data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = O.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ta ? A[p * ac + i] : A[i * ac + p];
      if (av == 0.0) continue;
      if (!tb) {
        const double* brow = B.data() + p * bc;
        for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < m; ++j) orow[j] += av * B[j * bc + p];
      }
    }
  }
  return out;
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out = Tensor::zeros_like(a);
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

// Unary elementwise op whose derivative is expressed through input x and output y.
template <class F, class D>
Var unary(const char* op, Var a, F f, D dfdx) {
  Graph& g = a.graph();
  return g.record(op, map(a.value(), f), {a}, [a, dfdx](Graph& gr, const Tensor& up, const Tensor& y) {
    const Tensor& x = gr.value(a);
    Tensor ga = Tensor::zeros_like(x);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = up[i] * dfdx(x[i], y[i]);
    gr.accumulate(a, ga);
  });
}

Tensor softmax_kernel(const Tensor& a) {
  Tensor out = Tensor::zeros_like(a);
  const std::size_t m = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto in = a.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < m; ++j) o[j] /= total;
  }
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_matrix(a.value(), "matmul");
  require_matrix(b.value(), "matmul");
  return g.record("matmul", matmul_kernel(a.value(), false, b.value(), false), {a, b},
                  [a, b](Graph& gr, const Tensor& up, const Tensor&) {
                    if (gr.requires_grad(a)) gr.accumulate(a, matmul_kernel(up, false, gr.value(b), true));
                    if (gr.requires_grad(b)) gr.accumulate(b, matmul_kernel(gr.value(a), true, up, false));
                  });
}

Var add_bias(Var a, Var bias) {
  Graph& g = same_graph(a, bias);
  const Tensor& x = a.value();
  const Tensor& b = bias.value();
  require_matrix(x, "add_bias");
  if (b.size() != x.cols() || b.rows() != 1) {
    throw ShapeError("add_bias: bias " + shape_string(b.shape()) + " vs input " + shape_string(x.shape()));
  }
  Tensor out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto o = out.row(r);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] += b[j];
  }
  return g.record("add_bias", std::move(out), {a, bias}, [a, bias](Graph& gr, const Tensor& up, const Tensor&) {
    gr.accumulate(a, up);
    if (gr.requires_grad(bias)) {
      Tensor gb = Tensor::zeros_like(gr.value(bias));
      for (std::size_t r = 0; r < up.rows(); ++r) {
        auto u = up.row(r);
        for (std::size_t j = 0; j < u.size(); ++j) gb[j] += u[j];
      }
      gr.accumulate(bias, gb);
    }
  });
}

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return g.record("add", std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& up, const Tensor&) {
    gr.accumulate(a, up);
    gr.accumulate(b, up);
  });
}

Var sub(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return g.record("sub", std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& up, const Tensor&) {
    gr.accumulate(a, up);
    if (gr.requires_grad(b)) gr.accumulate(b, map(up, [](double v) { return -v; }));
  });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return g.record("mul", std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& up, const Tensor&) {
    const Tensor& av = gr.value(a);
    const Tensor& bv = gr.value(b);
    if (gr.requires_grad(a)) {
      Tensor ga = up;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= bv[i];
      gr.accumulate(a, ga);
    }
    if (gr.requires_grad(b)) {
      Tensor gb = up;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= av[i];
      gr.accumulate(b, gb);
    }
  });
}

Var scale(Var a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double offset) {
  return unary("add_scalar", a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var relu(Var a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary("abs", a, [](double x) { return std::fabs(x); },
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var sum(Var a) {
  Graph& g = a.graph();
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return g.record("sum", Tensor::scalar(total), {a}, [a](Graph& gr, const Tensor& up, const Tensor&) {
    gr.accumulate(a, Tensor(gr.value(a).shape(), up[0]));
  });
}

Var mean(Var a) {
  Graph& g = a.graph();
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return g.record("mean", Tensor::scalar(total / static_cast<double>(n)), {a},
                  [a, n](Graph& gr, const Tensor& up, const Tensor&) {
                    gr.accumulate(a, Tensor(gr.value(a).shape(), up[0] / static_cast<double>(n)));
                  });
}

Var sum_cols(Var a) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  require_matrix(x, "sum_cols");
  Tensor out(Shape{x.rows(), 1});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double total = 0.0;
    for (double v : x.row(r)) total += v;
    out[r] = total;
  }
  return g.record("sum_cols", std::move(out), {a}, [a](Graph& gr, const Tensor& up, const Tensor&) {
    Tensor ga = Tensor::zeros_like(gr.value(a));
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (double& v : ga.row(r)) v = up[r];
    }
    gr.accumulate(a, ga);
  });
}

Var mean_rows(Var a) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  require_matrix(x, "mean_rows");
  if (x.rows() == 0) throw ShapeError("mean_rows of an empty batch");
  const double inv = 1.0 / static_cast<double>(x.rows());
  Tensor out(Shape{1, x.cols()});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    for (std::size_t j = 0; j < in.size(); ++j) out[j] += in[j];
  }
  for (double& v : out.data()) v *= inv;
  return g.record("mean_rows", std::move(out), {a}, [a, inv](Graph& gr, const Tensor& up, const Tensor&) {
    Tensor ga = Tensor::zeros_like(gr.value(a));
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      auto o = ga.row(r);
      for (std::size_t j = 0; j < o.size(); ++j) o[j] = up[j] * inv;
    }
    gr.accumulate(a, ga);
  });
}

Var normalize_rows(Var a) {
  Graph& g = a.graph();
  require_matrix(a.value(), "normalize_rows");
  Tensor out = a.value();
  std::vector<double> norms(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto o = out.row(r);
    double sq = 0.0;
    for (double v : o) sq += v * v;
    norms[r] = std::sqrt(sq) + 1e-12;
    for (double& v : o) v /= norms[r];
  }
  return g.record("normalize_rows", std::move(out), {a},
                  [a, norms = std::move(norms)](Graph& gr, const Tensor& up, const Tensor& y) {
                    Tensor ga = Tensor::zeros_like(y);
                    for (std::size_t r = 0; r < y.rows(); ++r) {
                      auto yr = y.row(r);
                      auto ur = up.row(r);
                      double dot = 0.0;
                      for (std::size_t j = 0; j < yr.size(); ++j) dot += ur[j] * yr[j];
                      auto o = ga.row(r);
                      for (std::size_t j = 0; j < yr.size(); ++j) o[j] = (ur[j] - yr[j] * dot) / norms[r];
                    }
                    gr.accumulate(a, ga);
                  });
}

Var softmax(Var a) {
  Graph& g = a.graph();
  require_matrix(a.value(), "softmax");
  return g.record("softmax", softmax_kernel(a.value()), {a}, [a](Graph& gr, const Tensor& up, const Tensor& y) {
    Tensor ga = Tensor::zeros_like(y);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto ur = up.row(r);
      double dot = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j) dot += ur[j] * yr[j];
      auto o = ga.row(r);
      for (std::size_t j = 0; j < yr.size(); ++j) o[j] = yr[j] * (ur[j] - dot);
    }
    gr.accumulate(a, ga);
  });
}

Var log_softmax(Var a) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  require_matrix(x, "log_softmax");
  Tensor out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto o = out.row(r);
    const double mx = *std::max_element(o.begin(), o.end());
    double total = 0.0;
    for (double v : o) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    for (double& v : o) v -= lse;
  }
  return g.record("log_softmax", std::move(out), {a}, [a](Graph& gr, const Tensor& up, const Tensor& y) {
    Tensor ga = Tensor::zeros_like(y);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto ur = up.row(r);
      double total = 0.0;
      for (double v : ur) total += v;
      auto o = ga.row(r);
      for (std::size_t j = 0; j < yr.size(); ++j) o[j] = ur[j] - std::exp(yr[j]) * total;
    }
    gr.accumulate(a, ga);
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  require_matrix(x, "slice_cols");
  if (begin > end || end > x.cols()) throw ShapeError("slice_cols: range out of bounds");
  Tensor out(Shape{x.rows(), end - begin});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    std::copy(in.begin() + static_cast<std::ptrdiff_t>(begin), in.begin() + static_cast<std::ptrdiff_t>(end),
              out.row(r).begin());
  }
  return g.record("slice_cols", std::move(out), {a}, [a, begin](Graph& gr, const Tensor& up, const Tensor&) {
    Tensor ga = Tensor::zeros_like(gr.value(a));
    for (std::size_t r = 0; r < up.rows(); ++r) {
      auto u = up.row(r);
      std::copy(u.begin(), u.end(), ga.row(r).begin() + static_cast<std::ptrdiff_t>(begin));
    }
    gr.accumulate(a, ga);
  });
}

Var pick(Var a, std::span<const std::size_t> index) {
  Graph& g = a.graph();
  const Tensor& x = a.value();
  require_matrix(x, "pick");
  if (index.size() != x.rows()) throw ShapeError("pick: one index per row required");
  std::vector<std::size_t> idx(index.begin(), index.end());
  Tensor out(Shape{x.rows(), 1});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (idx[r] >= x.cols()) throw ShapeError("pick: index " + std::to_string(idx[r]) + " out of range");
    out[r] = x.at(r, idx[r]);
  }
  return g.record("pick", std::move(out), {a}, [a, idx = std::move(idx)](Graph& gr, const Tensor& up, const Tensor&) {
    Tensor ga = Tensor::zeros_like(gr.value(a));
    for (std::size_t r = 0; r < idx.size(); ++r) ga.at(r, idx[r]) = up[r];
    gr.accumulate(a, ga);
  });
}

Var cross_entropy(Var logits, std::span<const std::size_t> labels) {
  return scale(mean(pick(log_softmax(logits), labels)), -1.0);
}

Var entropy_rows(Var logits) {
  Var logp = log_softmax(logits);
  Var p = softmax(logits);
  return scale(sum_cols(mul(p, logp)), -1.0);
}

Var squared_norm_rows(Var a) { return sum_cols(square(a)); }

Var l1_norm_rows(Var a) { return sum_cols(abs(a)); }

}  // namespace dgd::ad
