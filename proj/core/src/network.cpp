#include "dgd/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "dgd/errors.hpp"
#include "dgd/rng.hpp"

namespace dgd {

namespace {

std::size_t parse_size(std::string_view text, std::string_view context) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    throw ConfigError("architecture: bad size '" + std::string(text) + "' in '" + std::string(context) + "'");
  }
  return value;
}

std::string layer_name(const Layer& layer) {
  switch (layer.kind) {
    case LayerKind::dense:
      return "dense:" + std::to_string(layer.units);
    case LayerKind::relu:
      return "relu";
    case LayerKind::sigmoid:
      return "sigmoid";
    case LayerKind::tanh:
      return "tanh";
    case LayerKind::normalize:
      return "normalize";
    case LayerKind::softmax:
      return "softmax";
  }
  return "?";
}

}  // namespace

Architecture::Architecture(std::size_t input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ == 0) throw ConfigError("architecture: input size must be positive");
  if (dense_count() == 0) throw ConfigError("architecture: at least one dense layer required");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.kind == LayerKind::dense && l.units == 0) throw ConfigError("architecture: dense layer with 0 units");
    if (l.kind == LayerKind::softmax && i + 1 != layers_.size()) {
      throw ConfigError("architecture: softmax must be the last layer");
    }
  }
  if (layers_.front().kind != LayerKind::dense) throw ConfigError("architecture: first layer must be dense");
}

Architecture Architecture::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('-', start);
    if (end == std::string_view::npos) end = text.size();
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (parts.size() < 2) throw ConfigError("architecture: '" + std::string(text) + "' has no layers");
  const std::size_t input = parse_size(parts[0], text);
  std::vector<Layer> layers;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::string_view p = parts[i];
    if (p.starts_with("dense:")) {
      layers.push_back({LayerKind::dense, parse_size(p.substr(6), text)});
    } else if (p == "relu") {
      layers.push_back({LayerKind::relu, 0});
    } else if (p == "sigmoid") {
      layers.push_back({LayerKind::sigmoid, 0});
    } else if (p == "tanh") {
      layers.push_back({LayerKind::tanh, 0});
    } else if (p == "normalize") {
      layers.push_back({LayerKind::normalize, 0});
    } else if (p == "softmax") {
      layers.push_back({LayerKind::softmax, 0});
    } else {
      throw ConfigError("architecture: unknown layer '" + std::string(p) + "'");
    }
  }
  return Architecture(input, std::move(layers));
}

std::string Architecture::to_string() const {
  std::string out = std::to_string(input_dim_);
  for (const Layer& l : layers_) out += "-" + layer_name(l);
  return out;
}

std::size_t Architecture::output_dim() const noexcept {
  std::size_t width = input_dim_;
  for (const Layer& l : layers_) {
    if (l.kind == LayerKind::dense) width = l.units;
  }
  return width;
}

std::size_t Architecture::dense_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(layers_.begin(), layers_.end(), [](const Layer& l) { return l.kind == LayerKind::dense; }));
}

std::size_t Architecture::feature_dim() const noexcept {
  std::size_t width = input_dim_;
  std::size_t seen = 0;
  const std::size_t last = dense_count();
  for (const Layer& l : layers_) {
    if (l.kind != LayerKind::dense) continue;
    if (++seen == last) return width;
    width = l.units;
  }
  return width;
}

bool Architecture::ends_with_softmax() const noexcept {
  return !layers_.empty() && layers_.back().kind == LayerKind::softmax;
}

ParamSet::ParamSet(Architecture architecture, std::vector<Entry> entries)
    : architecture_(std::move(architecture)), entries_(std::move(entries)) {
  if (entries_.size() != 2 * architecture_.dense_count()) {
    throw ShapeError("parameter set has " + std::to_string(entries_.size()) + " entries, architecture needs " +
                     std::to_string(2 * architecture_.dense_count()));
  }
  std::size_t fan_in = architecture_.input_dim();
  std::size_t d = 0;
  for (const Layer& l : architecture_.layers()) {
    if (l.kind != LayerKind::dense) continue;
    const auto& [wname, w] = entries_[2 * d];
    const auto& [bname, b] = entries_[2 * d + 1];
    const std::string prefix = "dense" + std::to_string(d);
    if (wname != prefix + ".weight" || bname != prefix + ".bias") {
      throw ShapeError("unexpected parameter names '" + wname + "', '" + bname + "'");
    }
    if (w.shape() != Shape{fan_in, l.units} || b.shape() != Shape{l.units}) {
      throw ShapeError("parameter shapes for " + prefix + " do not match architecture");
    }
    fan_in = l.units;
    ++d;
  }
}

const Tensor& ParamSet::at(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ShapeError("no parameter named '" + std::string(name) + "'");
}

Tensor& ParamSet::at(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamSet&>(*this).at(name));
}

std::size_t ParamSet::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

GradientMap GradientMap::zeros_like(const ParamSet& net) {
  std::vector<ParamSet::Entry> entries;
  for (const auto& [name, t] : net.entries()) entries.emplace_back(name, Tensor::zeros_like(t));
  return GradientMap(std::move(entries));
}

const Tensor& GradientMap::at(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ShapeError("no gradient named '" + std::string(name) + "'");
}

void GradientMap::require_matches(const ParamSet& net) const {
  if (entries_.size() != net.size()) throw ShapeError("gradient map and parameter set differ in size");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != net.entries()[i].first ||
        entries_[i].second.shape() != net.entries()[i].second.shape()) {
      throw ShapeError("gradient entry '" + entries_[i].first + "' does not match parameter '" +
                       net.entries()[i].first + "'");
    }
  }
}

ParamSet xavier_init(const Architecture& architecture, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ParamSet::Entry> entries;
  std::size_t fan_in = architecture.input_dim();
  std::size_t d = 0;
  for (const Layer& l : architecture.layers()) {
    if (l.kind != LayerKind::dense) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + l.units));
    Tensor w(Shape{fan_in, l.units});
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    const std::string prefix = "dense" + std::to_string(d++);
    entries.emplace_back(prefix + ".weight", std::move(w));
    entries.emplace_back(prefix + ".bias", Tensor(Shape{l.units}));
    fan_in = l.units;
  }
  return ParamSet(architecture, std::move(entries));
}

BoundNet bind(ad::Graph& graph, const ParamSet& net, Trainable trainable) {
  BoundNet bound{&net, {}};
  bound.params.reserve(net.size());
  for (const auto& [name, t] : net.entries()) {
    bound.params.push_back(trainable == Trainable::yes ? graph.parameter(t) : graph.constant(t));
  }
  return bound;
}

NetVars apply(const BoundNet& bound, ad::Var input) {
  const Architecture& arch = bound.net->architecture();
  const Tensor& x = input.value();
  require_matrix(x, "network input");
  if (x.cols() != arch.input_dim()) {
    throw ShapeError("network expects " + std::to_string(arch.input_dim()) + " input columns, got " +
                     std::to_string(x.cols()));
  }
  const std::size_t last_dense = arch.dense_count() - 1;
  NetVars out;
  ad::Var h = input;
  std::size_t d = 0;
  for (const Layer& l : arch.layers()) {
    switch (l.kind) {
      case LayerKind::dense:
        if (d == last_dense) out.features = h;
        h = ad::add_bias(ad::matmul(h, bound.params[2 * d]), bound.params[2 * d + 1]);
        ++d;
        break;
      case LayerKind::relu:
        h = ad::relu(h);
        break;
      case LayerKind::sigmoid:
        h = ad::sigmoid(h);
        break;
      case LayerKind::tanh:
        h = ad::tanh(h);
        break;
      case LayerKind::normalize:
        h = ad::normalize_rows(h);
        break;
      case LayerKind::softmax:
        out.logits = h;
        h = ad::softmax(h);
        break;
    }
  }
  if (!out.logits.valid()) out.logits = h;
  out.output = h;
  return out;
}

GradientMap collect_gradients(const ad::Graph& graph, const BoundNet& bound) {
  std::vector<ParamSet::Entry> entries;
  entries.reserve(bound.params.size());
  for (std::size_t i = 0; i < bound.params.size(); ++i) {
    entries.emplace_back(bound.net->entries()[i].first, graph.grad(bound.params[i]));
  }
  return GradientMap(std::move(entries));
}

Activations forward(const ParamSet& net, const Tensor& batch) {
  ad::Graph graph;
  BoundNet bound = bind(graph, net, Trainable::no);
  NetVars vars = apply(bound, graph.constant(batch));
  return {vars.features.value(), vars.output.value()};
}

std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  std::vector<std::size_t> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<std::size_t> predict(const ParamSet& net, const Tensor& batch) {
  return argmax_rows(forward(net, batch).output);
}

}  // namespace dgd
