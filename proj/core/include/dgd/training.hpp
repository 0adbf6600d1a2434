#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgd/rng.hpp"

namespace dgd {

/// Epoch-wise reshuffled minibatch indices over [0, n).
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  /// Next batch; the last batch of an epoch may be short.
  std::vector<std::size_t> next();
  std::size_t batches_per_epoch() const noexcept;

 private:
  void reshuffle();

  std::size_t n_;
  std::size_t batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace dgd
