#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dgd/autodiff.hpp"
#include "dgd/tensor.hpp"

namespace dgd {

enum class LayerKind { dense, relu, sigmoid, tanh, normalize, softmax };

struct Layer {
  LayerKind kind = LayerKind::dense;
  std::size_t units = 0;  // dense only

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Declarative feed-forward network layout.
///
/// Text form: input size followed by layers, separated by '-', e.g.
/// "16-dense:64-relu-dense:10-softmax". Softmax may only appear last and
/// at least one dense layer is required.
class Architecture {
 public:
  Architecture() = default;
  Architecture(std::size_t input_dim, std::vector<Layer> layers);

  static Architecture parse(std::string_view text);
  std::string to_string() const;

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept;
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t dense_count() const noexcept;
  /// Width of the activation feeding the final dense layer.
  std::size_t feature_dim() const noexcept;
  bool ends_with_softmax() const noexcept;

  friend bool operator==(const Architecture&, const Architecture&) = default;

 private:
  std::size_t input_dim_ = 0;
  std::vector<Layer> layers_;
};

/// Named parameters of one network. Entries are ordered "dense0.weight",
/// "dense0.bias", "dense1.weight", ...; weights are [fan_in, fan_out].
/// Entries before feature_boundary() form the backbone, the rest the head.
class ParamSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  ParamSet() = default;
  /// Validates names and shapes against the architecture.
  ParamSet(Architecture architecture, std::vector<Entry> entries);

  const Architecture& architecture() const noexcept { return architecture_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Entry>& mutable_entries() noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t feature_boundary() const noexcept { return 2 * (architecture_.dense_count() - 1); }

  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  Architecture architecture_;
  std::vector<Entry> entries_;
};

/// Gradient of a scalar with respect to every entry of a ParamSet.
class GradientMap {
 public:
  GradientMap() = default;
  explicit GradientMap(std::vector<ParamSet::Entry> entries) : entries_(std::move(entries)) {}

  static GradientMap zeros_like(const ParamSet& net);

  const std::vector<ParamSet::Entry>& entries() const noexcept { return entries_; }
  std::vector<ParamSet::Entry>& mutable_entries() noexcept { return entries_; }
  const Tensor& at(std::string_view name) const;
  /// Throws ShapeError unless keys and shapes match `net` exactly.
  void require_matches(const ParamSet& net) const;

 private:
  std::vector<ParamSet::Entry> entries_;
};

/// Uniform Glorot initialisation of dense weights, zero biases.
ParamSet xavier_init(const Architecture& architecture, std::uint64_t seed);

struct Activations {
  Tensor features;  // input of the final dense layer
  Tensor output;    // last layer output (probabilities for a softmax net)
};

Activations forward(const ParamSet& net, const Tensor& batch);

/// Row-wise argmax with ties resolved to the lowest index.
std::vector<std::size_t> argmax_rows(const Tensor& scores);
std::vector<std::size_t> predict(const ParamSet& net, const Tensor& batch);

// ---- graph binding --------------------------------------------------------

/// A ParamSet recorded into a graph, either as trainable parameters or as
/// frozen constants.
struct BoundNet {
  const ParamSet* net = nullptr;
  std::vector<ad::Var> params;
};

enum class Trainable { yes, no };

BoundNet bind(ad::Graph& graph, const ParamSet& net, Trainable trainable);

struct NetVars {
  ad::Var features;
  ad::Var logits;  // input of the trailing softmax, or the raw output otherwise
  ad::Var output;
};

NetVars apply(const BoundNet& bound, ad::Var input);

GradientMap collect_gradients(const ad::Graph& graph, const BoundNet& bound);

}  // namespace dgd
