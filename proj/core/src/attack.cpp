#include "dgd/attack.hpp"

#include <cmath>
#include <limits>

#include "dgd/errors.hpp"
#include "dgd/rng.hpp"

namespace dgd {

InversionResult inversion_attack(const ParamSet& victim, std::size_t target_class, std::size_t steps, double lr,
                                 double l2_weight, std::uint64_t seed) {
  const Architecture& arch = victim.architecture();
  if (!arch.ends_with_softmax()) throw ConfigError("inversion needs a softmax classifier");
  if (target_class >= arch.output_dim()) throw ConfigError("target class out of range");
  Rng rng(derive_seed(seed, 51));
  Tensor x(Shape{1, arch.input_dim()});
  for (double& v : x.data()) v = 0.01 * rng.normal();

  InversionResult result;
  const std::vector<std::size_t> target{target_class};
  for (std::size_t step = 0; step <= steps; ++step) {
    ad::Graph g;
    BoundNet bound = bind(g, victim, Trainable::no);
    ad::Var input = g.parameter(x);
    NetVars out = apply(bound, input);
    result.confidence.push_back(out.output.value()[target_class]);
    if (step == steps) break;
    // Descend on -(ln p - l2 |x|^2) = CE + l2 |x|^2.
    ad::Var objective = ad::add(ad::cross_entropy(out.logits, target), ad::scale(ad::sum(ad::square(input)), l2_weight));
    g.backward(objective);
    const Tensor& grad = g.grad(input);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * grad[i];
    require_finite(x, "inversion input");
  }
  result.input = std::move(x);
  return result;
}

namespace {

double correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

double template_agreement(std::span<const double> reconstruction, const Tensor& templates, std::size_t target) {
  if (reconstruction.size() != templates.cols()) throw ShapeError("reconstruction and templates differ in size");
  if (target >= templates.rows()) throw ShapeError("target class has no template");
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < templates.rows(); ++k) {
    if (k != target) other = std::max(other, correlation(reconstruction, templates.row(k)));
  }
  return correlation(reconstruction, templates.row(target)) - other;
}

double inversion_quality(const ParamSet& victim, const Tensor& templates, std::size_t steps, double lr,
                         double l2_weight, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t k = 0; k < templates.rows(); ++k) {
    const InversionResult r = inversion_attack(victim, k, steps, lr, l2_weight, derive_seed(seed, k));
    total += template_agreement(r.input.data(), templates, k);
  }
  return total / static_cast<double>(templates.rows());
}

}  // namespace dgd
