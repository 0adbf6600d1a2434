#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgd/network.hpp"
#include "dgd/tensor.hpp"

namespace dgd {

struct InversionResult {
  Tensor input;                     // [1, dim] reconstruction
  std::vector<double> confidence;   // p(target | x) before each step, then after the last
};

/// Model inversion with confidence information: gradient ascent on
/// ln p(target | x) - l2_weight * |x|^2 over the input, from a seeded start
/// x0 ~ 0.01 * N(0, I). Evaluation only.
InversionResult inversion_attack(const ParamSet& victim, std::size_t target_class, std::size_t steps, double lr,
                                 double l2_weight, std::uint64_t seed);

/// Pearson correlation of `reconstruction` with the target template minus the
/// best correlation with any other template. Positive when the nearest
/// template (by correlation) is the target.
double template_agreement(std::span<const double> reconstruction, const Tensor& templates, std::size_t target);

/// Mean template_agreement over one attack per class.
double inversion_quality(const ParamSet& victim, const Tensor& templates, std::size_t steps, double lr,
                         double l2_weight, std::uint64_t seed);

}  // namespace dgd
