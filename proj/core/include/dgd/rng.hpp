#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace dgd {

/// splitmix64 finaliser; used to derive independent substreams.
std::uint64_t mix64(std::uint64_t x) noexcept;
/// Seed of substream `stream` under `seed`. Order-independent by construction.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  double normal() { return normal_(engine_); }
  /// Laplace(0, scale) by inverse CDF: x = -b sgn(u) ln(1 - 2|u|), u ~ U(-1/2, 1/2).
  double laplace(double scale);
  bool bernoulli(double p) { return unit_(engine_) < p; }
  std::size_t below(std::size_t n);

  void shuffle(std::span<std::size_t> values);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dgd
