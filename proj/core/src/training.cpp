#include "dgd/training.hpp"

#include <algorithm>
#include <numeric>

#include "dgd/errors.hpp"

namespace dgd {

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_(std::min(batch_size, n)), rng_(seed), order_(n) {
  if (n == 0) throw PreconditionError("cannot sample batches from an empty set");
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  reshuffle();
}

void BatchSampler::reshuffle() {
  rng_.shuffle(order_);
  pos_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
  if (pos_ >= n_) reshuffle();
  const std::size_t len = std::min(batch_, n_ - pos_);
  std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                               order_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
  pos_ += len;
  return out;
}

std::size_t BatchSampler::batches_per_epoch() const noexcept { return (n_ + batch_ - 1) / batch_; }

}  // namespace dgd
