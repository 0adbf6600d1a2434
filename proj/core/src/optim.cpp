#include "dgd/optim.hpp"

#include <cmath>

#include "dgd/errors.hpp"

namespace dgd {

double LrSchedule::at(std::size_t round) const {
  if (base < 0.0) throw ConfigError("learning rate must be non-negative");
  const std::size_t total = total_rounds == 0 ? 1 : total_rounds;
  switch (kind) {
    case Kind::constant:
      return base;
    case Kind::linear: {
      const double t = static_cast<double>(std::min(round, total));
      return base * (1.0 - t / static_cast<double>(total));
    }
    case Kind::step: {
      const auto every = static_cast<std::size_t>(std::ceil(step_fraction * static_cast<double>(total)));
      const std::size_t drops = every == 0 ? 0 : round / every;
      return base * std::pow(step_factor, static_cast<double>(drops));
    }
  }
  return base;
}

LrSchedule::Kind LrSchedule::parse_kind(std::string_view name) {
  if (name == "constant") return Kind::constant;
  if (name == "linear") return Kind::linear;
  if (name == "step") return Kind::step;
  throw ConfigError("unknown learning-rate schedule '" + std::string(name) + "'");
}

std::string LrSchedule::kind_name(Kind kind) {
  switch (kind) {
    case Kind::constant:
      return "constant";
    case Kind::linear:
      return "linear";
    case Kind::step:
      return "step";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

void Adam::step(ParamSet& net, const GradientMap& grads, double lr) {
  if (lr < 0.0 || !std::isfinite(lr)) throw ConfigError("Adam learning rate must be finite and non-negative");
  grads.require_matches(net);
  auto& entries = net.mutable_entries();
  if (m_.empty()) {
    for (const auto& e : entries) {
      m_.push_back(Tensor::zeros_like(e.second));
      v_.push_back(Tensor::zeros_like(e.second));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Tensor& w = entries[k].second;
    const Tensor& g = grads.entries()[k].second;
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
    require_finite(w, entries[k].first.c_str());
  }
}

void sgd_step(ParamSet& net, const GradientMap& grads, double lr) {
  if (lr < 0.0 || !std::isfinite(lr)) throw ConfigError("SGD learning rate must be finite and non-negative");
  grads.require_matches(net);
  auto& entries = net.mutable_entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Tensor& w = entries[k].second;
    const Tensor& g = grads.entries()[k].second;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    require_finite(w, entries[k].first.c_str());
  }
}

void Optimizer::step(ParamSet& net, const GradientMap& grads, double lr) {
  if (kind_ == OptimizerKind::adam) {
    adam_.step(net, grads, lr);
  } else {
    sgd_step(net, grads, lr);
  }
}

}  // namespace dgd
