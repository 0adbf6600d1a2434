#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dgd/network.hpp"

namespace dgd {

/// Learning-rate schedule over a fixed number of rounds.
struct LrSchedule {
  enum class Kind { constant, linear, step };

  Kind kind = Kind::constant;
  double base = 1e-3;
  std::size_t total_rounds = 1;
  // step: multiply by `step_factor` every ceil(step_fraction * total_rounds) rounds
  double step_fraction = 0.4;
  double step_factor = 0.1;

  /// Learning rate at round t in [0, total_rounds]. Linear decay reaches 0 at t == total_rounds.
  double at(std::size_t round) const;

  static Kind parse_kind(std::string_view name);
  static std::string kind_name(Kind kind);
};

enum class OptimizerKind { adam, sgd };
OptimizerKind parse_optimizer(std::string_view name);
std::string optimizer_name(OptimizerKind kind);

/// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet& net, const GradientMap& grads, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::size_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// Plain gradient descent w <- w - lr * g.
void sgd_step(ParamSet& net, const GradientMap& grads, double lr);

/// Either optimizer behind one interface, as selected by configuration.
class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind) : kind_(kind) {}
  void step(ParamSet& net, const GradientMap& grads, double lr);

 private:
  OptimizerKind kind_;
  Adam adam_;
};

}  // namespace dgd
