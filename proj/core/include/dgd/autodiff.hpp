#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "dgd/tensor.hpp"

// Tape-based reverse-mode differentiation over dense tensors.
//
// A Graph records every value produced by the primitives below in creation
// order, which is already a topological order, so backward() is a single
// reverse sweep. Values that do not depend on a parameter carry no gradient;
// asking for one is a GraphError. Every recorded value is checked for NaN/Inf.

namespace dgd::ad {

class Graph;

/// Handle to a value recorded in a Graph.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  Graph& graph() const;
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  /// Receives the upstream gradient and the node's own forward value.
  using Backward = std::function<void(Graph&, const Tensor& upstream, const Tensor& output)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;

  /// Reverse sweep from a one-element loss. A loss that depends on no
  /// parameter leaves every gradient at zero.
  void backward(Var loss);
  const Tensor& grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

  // Primitive authoring. Parents must belong to this graph.
  Var record(const char* op, Tensor value, std::initializer_list<Var> parents, Backward backward);
  void accumulate(Var v, const Tensor& gradient);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  void check_owner(Var v) const;

  std::deque<Node> nodes_;
  bool differentiated_ = false;
};

// ---- primitives -----------------------------------------------------------

Var matmul(Var a, Var b);
/// a[n,m] + bias[m] broadcast over rows.
Var add_bias(Var a, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var abs(Var a);

Var sum(Var a);
Var mean(Var a);
/// Per-row sum: [n,m] -> [n,1].
Var sum_cols(Var a);
/// Batch mean: [n,m] -> [1,m].
Var mean_rows(Var a);

/// Each row divided by its L2 norm (plus a 1e-12 guard).
Var normalize_rows(Var a);
Var softmax(Var a);
Var log_softmax(Var a);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
/// out[i] = a[i, index[i]] as an [n,1] column.
Var pick(Var a, std::span<const std::size_t> index);

// ---- composites -----------------------------------------------------------

/// Mean cross-entropy of row-wise softmax(logits) against class ids.
Var cross_entropy(Var logits, std::span<const std::size_t> labels);
/// Per-row Shannon entropy -sum p ln p of softmax(logits), as [n,1].
Var entropy_rows(Var logits);
/// Per-row sum of squares, as [n,1].
Var squared_norm_rows(Var a);
/// Per-row L1 norm, as [n,1].
Var l1_norm_rows(Var a);

}  // namespace dgd::ad
