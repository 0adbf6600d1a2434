#include "dgd/rng.hpp"

#include <cmath>

namespace dgd {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

double Rng::laplace(double scale) {
  if (scale == 0.0) return 0.0;
  double u = 0.0;
  do {
    u = unit_(engine_) - 0.5;
  } while (u == -0.5);
  const double sgn = u < 0.0 ? -1.0 : 1.0;
  return -scale * sgn * std::log(1.0 - 2.0 * std::fabs(u));
}

std::size_t Rng::below(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

void Rng::shuffle(std::span<std::size_t> values) {
  // Fisher-Yates with our own index draws so the order does not depend on
  // the standard library's std::shuffle implementation.
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = below(i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace dgd
