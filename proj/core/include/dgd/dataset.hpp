#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dgd/tensor.hpp"

namespace dgd {

/// Feature matrix (n x dim) with optional class labels in [0, class_count).
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(Tensor features, std::optional<std::vector<std::size_t>> labels, std::size_t class_count);

  const Tensor& features() const noexcept { return features_; }
  bool labeled() const noexcept { return labels_.has_value(); }
  /// Throws PreconditionError when the dataset is unlabeled.
  const std::vector<std::size_t>& labels() const;
  std::size_t size() const noexcept { return features_.rows(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  std::size_t class_count() const noexcept { return class_count_; }

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  /// Same rows with labels dropped.
  LabeledDataset unlabeled() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  Tensor features_{Shape{0, 0}};
  std::optional<std::vector<std::size_t>> labels_;
  std::size_t class_count_ = 0;
};

/// Disjoint, exhaustive index subsets of a parent dataset.
struct Partition {
  std::vector<std::vector<std::size_t>> subsets;

  /// Throws PreconditionError unless the subsets are non-empty, pairwise
  /// disjoint and cover 0..n-1.
  void validate(std::size_t n) const;
};

struct MixtureSpec {
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t per_class = 200;
  double spread = 0.2;  // per-coordinate standard deviation
  std::uint64_t seed = 1;
};

/// Balanced Gaussian clusters around random unit-norm centers that are
/// pairwise at least 2 * spread apart.
LabeledDataset make_mixture_dataset(const MixtureSpec& spec);

struct DigitGridSpec {
  std::size_t classes = 10;
  std::size_t per_class = 100;
  double noise = 0.1;  // pixel flip probability
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kDigitCell = 8;

/// The class glyphs as a [classes, 64] matrix of 0/1 pixels.
Tensor digit_templates(std::size_t classes = 10);
/// 8x8 binary glyphs with each pixel flipped independently with probability `noise`.
LabeledDataset make_digitgrid_dataset(const DigitGridSpec& spec);

/// Random disjoint subsets of equal size; the first (n mod teachers) subsets get one extra example.
Partition partition_disjoint(const LabeledDataset& ds, std::size_t teachers, std::uint64_t seed);

/// First `query_count` rows form the query pool, the remainder the unlabeled pool.
std::pair<LabeledDataset, LabeledDataset> split_query_pool(const LabeledDataset& ds, std::size_t query_count);

/// Seeded shuffle, then the first `test_count` rows become the test set. Returns (train, test).
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, std::size_t test_count,
                                                           std::uint64_t seed);

/// Rounds every feature to the nearest float32 so a dataset survives the
/// on-disk format unchanged.
Tensor quantize_f32(Tensor features);

// Dataset file layout (little-endian):
//   "DGDS" | version u32 | n u32 | dim u32 | K u32 | labeled u8 |
//   f32 features row-major | u16 labels (when labeled)
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
LabeledDataset read_dataset(const std::filesystem::path& path);
std::vector<char> encode_dataset(const LabeledDataset& ds);
LabeledDataset decode_dataset(std::vector<char> bytes);

}  // namespace dgd
