#pragma once

// Independent reference computations used by unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "dgd/network.hpp"

namespace dgd::testing {

/// Exact P(argmax_k (h_k + Lap(b)) = k) by quadrature over the winner's noisy
/// count: integral of f(x - h_k) * prod_{j != k} F(x - h_j) dx.
inline std::vector<double> laplace_argmax_probabilities(const std::vector<std::size_t>& counts, double b) {
  auto pdf = [b](double x) { return std::exp(-std::fabs(x) / b) / (2.0 * b); };
  auto cdf = [b](double x) { return x < 0.0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b); };
  double lo = 0.0, hi = 0.0;
  for (auto c : counts) hi = std::max(hi, static_cast<double>(c));
  lo -= 50.0 * b;
  hi += 50.0 * b;
  const std::size_t steps = 400000;  // even, for Simpson
  const double dx = (hi - lo) / steps;
  std::vector<double> out(counts.size(), 0.0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    double total = 0.0;
    for (std::size_t s = 0; s <= steps; ++s) {
      const double x = lo + dx * static_cast<double>(s);
      double v = pdf(x - static_cast<double>(counts[k]));
      for (std::size_t j = 0; j < counts.size(); ++j) {
        if (j != k) v *= cdf(x - static_cast<double>(counts[j]));
      }
      const double w = (s == 0 || s == steps) ? 1.0 : (s % 2 ? 4.0 : 2.0);
      total += w * v;
    }
    out[k] = total * dx / 3.0;
  }
  return out;
}

/// Brute-force Monte-Carlo oracle with its own Laplace sampler (difference of exponentials).
inline std::vector<double> laplace_argmax_monte_carlo(const std::vector<std::size_t>& counts, double b,
                                                      std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> expo(1.0 / b);
  std::vector<double> hits(counts.size(), 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double v = static_cast<double>(counts[k]) + expo(gen) - expo(gen);
      if (v > best_v) best_v = v, best = k;
    }
    hits[best] += 1.0;
  }
  for (double& h : hits) h /= static_cast<double>(trials);
  return hits;
}

/// A classifier that ignores its input and always predicts `label`.
inline ParamSet constant_classifier(std::size_t dim, std::size_t classes, std::size_t label) {
  const auto arch = Architecture(dim, {{LayerKind::dense, classes}, {LayerKind::softmax, 0}});
  Tensor bias(Shape{classes}, 0.0);
  bias[label] = 10.0;
  return ParamSet(arch, {{"dense0.weight", Tensor(Shape{dim, classes})}, {"dense0.bias", bias}});
}

}  // namespace dgd::testing
