#pragma once

// Central-difference oracle for reverse-mode gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dgd/autodiff.hpp"
#include "dgd/network.hpp"
#include "dgd/rng.hpp"

namespace dgd::testing {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = scale * rng.normal();
  return t;
}

/// Largest relative error between backprop and central differences over
/// every input tensor. `build` maps parameter Vars to a scalar loss.
inline double max_relative_error(std::vector<Tensor> inputs,
                                 const std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>& build,
                                 double h = 1e-6) {
  std::vector<Tensor> analytic;
  {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) vars.push_back(g.parameter(t));
    ad::Var loss = build(g, vars);
    g.backward(loss);
    for (const auto& v : vars) analytic.push_back(g.grad(v));
  }
  auto eval = [&] {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) vars.push_back(g.constant(t));
    return build(g, vars).value().item();
  };
  double worst = 0.0;
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    for (std::size_t i = 0; i < inputs[p].size(); ++i) {
      const double keep = inputs[p][i];
      inputs[p][i] = keep + h;
      const double up = eval();
      inputs[p][i] = keep - h;
      const double down = eval();
      inputs[p][i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p][i];
      const double scale = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      worst = std::max(worst, std::fabs(a - numeric) / scale);
    }
  }
  return worst;
}

/// Same check over whole networks: perturbs every entry of every ParamSet.
inline double max_relative_error(std::vector<ParamSet> nets,
                                 const std::function<ad::Var(ad::Graph&, const std::vector<BoundNet>&)>& build,
                                 double h = 1e-6) {
  std::vector<GradientMap> analytic;
  {
    ad::Graph g;
    std::vector<BoundNet> bound;
    for (const auto& n : nets) bound.push_back(bind(g, n, Trainable::yes));
    ad::Var loss = build(g, bound);
    g.backward(loss);
    for (const auto& b : bound) analytic.push_back(collect_gradients(g, b));
  }
  auto eval = [&] {
    ad::Graph g;
    std::vector<BoundNet> bound;
    for (const auto& n : nets) bound.push_back(bind(g, n, Trainable::no));
    return build(g, bound).value().item();
  };
  double worst = 0.0;
  for (std::size_t n = 0; n < nets.size(); ++n) {
    auto& entries = nets[n].mutable_entries();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      Tensor& t = entries[e].second;
      const Tensor& a = analytic[n].at(entries[e].first);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double keep = t[i];
        t[i] = keep + h;
        const double up = eval();
        t[i] = keep - h;
        const double down = eval();
        t[i] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::fabs(a[i]), std::fabs(numeric), 1e-3});
        worst = std::max(worst, std::fabs(a[i] - numeric) / scale);
      }
    }
  }
  return worst;
}

}  // namespace dgd::testing
