#include "dgd/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "dgd/binary_io.hpp"
#include "dgd/errors.hpp"
#include "dgd/rng.hpp"

namespace dgd {

LabeledDataset::LabeledDataset(Tensor features, std::optional<std::vector<std::size_t>> labels,
                               std::size_t class_count)
    : features_(std::move(features)), labels_(std::move(labels)), class_count_(class_count) {
  require_matrix(features_, "dataset features");
  require_finite(features_, "dataset features");
  if (class_count_ < 1) throw DataError("dataset needs at least one class");
  if (labels_) {
    if (labels_->size() != features_.rows()) {
      throw DataError("dataset has " + std::to_string(features_.rows()) + " rows but " +
                      std::to_string(labels_->size()) + " labels");
    }
    for (std::size_t l : *labels_) {
      if (l >= class_count_) throw DataError("label " + std::to_string(l) + " outside [0, K)");
    }
  }
}

const std::vector<std::size_t>& LabeledDataset::labels() const {
  if (!labels_) throw PreconditionError("dataset is unlabeled");
  return *labels_;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  std::optional<std::vector<std::size_t>> labels;
  if (labels_) {
    labels.emplace();
    labels->reserve(indices.size());
    for (std::size_t i : indices) labels->push_back((*labels_)[i]);
  }
  return LabeledDataset(features_.gather_rows(indices), std::move(labels), class_count_);
}

LabeledDataset LabeledDataset::unlabeled() const { return LabeledDataset(features_, std::nullopt, class_count_); }

void Partition::validate(std::size_t n) const {
  if (subsets.empty()) throw PreconditionError("partition has no subsets");
  std::vector<char> seen(n, 0);
  std::size_t total = 0;
  for (const auto& s : subsets) {
    if (s.empty()) throw PreconditionError("partition contains an empty subset");
    for (std::size_t i : s) {
      if (i >= n) throw PreconditionError("partition index " + std::to_string(i) + " out of range");
      if (seen[i]) throw PreconditionError("partition subsets overlap at index " + std::to_string(i));
      seen[i] = 1;
      ++total;
    }
  }
  if (total != n) throw PreconditionError("partition does not cover the dataset");
}

Tensor quantize_f32(Tensor features) {
  for (double& v : features.data()) v = static_cast<double>(static_cast<float>(v));
  return features;
}

LabeledDataset make_mixture_dataset(const MixtureSpec& spec) {
  if (spec.classes < 2) throw ConfigError("mixture needs at least 2 classes");
  if (spec.dim < 2) throw ConfigError("mixture needs dim >= 2");
  if (spec.per_class < 1) throw ConfigError("mixture needs per_class >= 1");
  if (!(spec.spread >= 0.0)) throw ConfigError("mixture spread must be non-negative");

  Rng center_rng(derive_seed(spec.seed, 0));
  std::vector<std::vector<double>> centers;
  constexpr int kAttempts = 2000;
  const double min_gap = 2.0 * spec.spread;
  for (std::size_t k = 0; k < spec.classes; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      std::vector<double> c(spec.dim);
      double norm = 0.0;
      for (double& v : c) {
        v = center_rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (double& v : c) v /= norm;
      placed = std::all_of(centers.begin(), centers.end(), [&](const std::vector<double>& o) {
        double d = 0.0;
        for (std::size_t j = 0; j < spec.dim; ++j) d += (c[j] - o[j]) * (c[j] - o[j]);
        return std::sqrt(d) >= min_gap;
      });
      if (placed) centers.push_back(std::move(c));
    }
    if (!placed) {
      throw ConfigError("cannot place " + std::to_string(spec.classes) + " unit centers " + std::to_string(min_gap) +
                        " apart in " + std::to_string(spec.dim) + " dimensions");
    }
  }

  Rng sample_rng(derive_seed(spec.seed, 1));
  const std::size_t n = spec.classes * spec.per_class;
  Tensor x(Shape{n, spec.dim});
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % spec.classes;
    labels[i] = k;
    auto row = x.row(i);
    for (std::size_t j = 0; j < spec.dim; ++j) row[j] = centers[k][j] + spec.spread * sample_rng.normal();
  }
  return LabeledDataset(quantize_f32(std::move(x)), std::move(labels), spec.classes);
}

Tensor digit_templates(std::size_t classes) {
  static constexpr std::array<std::array<const char*, 8>, 10> kGlyphs = {{
      {"..####..", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", "..####.."},
      {"...##...", "..###...", ".####...", "...##...", "...##...", "...##...", "...##...", ".######."},
      {"..####..", ".##..##.", ".....##.", "....##..", "...##...", "..##....", ".##.....", ".######."},
      {"..####..", ".##..##.", ".....##.", "...###..", ".....##.", ".....##.", ".##..##.", "..####.."},
      {"....##..", "...###..", "..####..", ".##.##..", "##..##..", "#######.", "....##..", "....##.."},
      {".######.", ".##.....", ".##.....", ".#####..", ".....##.", ".....##.", ".##..##.", "..####.."},
      {"..####..", ".##.....", ".##.....", ".#####..", ".##..##.", ".##..##.", ".##..##.", "..####.."},
      {".######.", ".....##.", "....##..", "....##..", "...##...", "...##...", "..##....", "..##...."},
      {"..####..", ".##..##.", ".##..##.", "..####..", ".##..##.", ".##..##.", ".##..##.", "..####.."},
      {"..####..", ".##..##.", ".##..##.", ".##..##.", "..#####.", ".....##.", ".....##.", "..####.."},
  }};
  if (classes < 2 || classes > kGlyphs.size()) throw ConfigError("digit grid supports 2..10 classes");
  Tensor t(Shape{classes, kDigitCell * kDigitCell});
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t r = 0; r < kDigitCell; ++r) {
      for (std::size_t c = 0; c < kDigitCell; ++c) {
        t.at(k, r * kDigitCell + c) = kGlyphs[k][r][c] == '#' ? 1.0 : 0.0;
      }
    }
  }
  return t;
}

LabeledDataset make_digitgrid_dataset(const DigitGridSpec& spec) {
  if (!(spec.noise >= 0.0 && spec.noise < 0.5)) throw ConfigError("digit grid noise must lie in [0, 0.5)");
  if (spec.per_class < 1) throw ConfigError("digit grid needs per_class >= 1");
  const Tensor templates = digit_templates(spec.classes);
  const std::size_t n = spec.classes * spec.per_class;
  const std::size_t dim = templates.cols();
  Rng rng(derive_seed(spec.seed, 2));
  Tensor x(Shape{n, dim});
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % spec.classes;
    labels[i] = k;
    auto row = x.row(i);
    auto tpl = templates.row(k);
    for (std::size_t j = 0; j < dim; ++j) row[j] = rng.bernoulli(spec.noise) ? 1.0 - tpl[j] : tpl[j];
  }
  return LabeledDataset(std::move(x), std::move(labels), spec.classes);
}

Partition partition_disjoint(const LabeledDataset& ds, std::size_t teachers, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (teachers < 1) throw ConfigError("teacher count must be at least 1");
  if (teachers > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " examples among " + std::to_string(teachers) +
                      " teachers");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 3));
  rng.shuffle(order);
  Partition p;
  const std::size_t base = n / teachers;
  const std::size_t extra = n % teachers;
  std::size_t pos = 0;
  for (std::size_t t = 0; t < teachers; ++t) {
    const std::size_t len = base + (t < extra ? 1 : 0);
    p.subsets.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                           order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return p;
}

std::pair<LabeledDataset, LabeledDataset> split_query_pool(const LabeledDataset& ds, std::size_t query_count) {
  if (query_count > ds.size()) {
    throw ConfigError("query count " + std::to_string(query_count) + " exceeds the " + std::to_string(ds.size()) +
                      " available examples");
  }
  std::vector<std::size_t> head(query_count);
  std::vector<std::size_t> tail(ds.size() - query_count);
  std::iota(head.begin(), head.end(), std::size_t{0});
  std::iota(tail.begin(), tail.end(), query_count);
  return {ds.subset(head), ds.subset(tail)};
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, std::size_t test_count,
                                                           std::uint64_t seed) {
  if (test_count >= ds.size()) throw ConfigError("test split leaves no training data");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 4));
  rng.shuffle(order);
  std::span<const std::size_t> all(order);
  return {ds.subset(all.subspan(test_count)), ds.subset(all.first(test_count))};
}

std::vector<char> encode_dataset(const LabeledDataset& ds) {
  if (ds.class_count() > 65536) throw DataError("class count does not fit the u16 label field");
  ByteWriter w;
  w.bytes("DGDS");
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.u32(static_cast<std::uint32_t>(ds.dim()));
  w.u32(static_cast<std::uint32_t>(ds.class_count()));
  w.u8(ds.labeled() ? 1 : 0);
  for (double v : ds.features().data()) w.f32(static_cast<float>(v));
  if (ds.labeled()) {
    for (std::size_t l : ds.labels()) w.u16(static_cast<std::uint16_t>(l));
  }
  return w.buffer();
}

LabeledDataset decode_dataset(std::vector<char> bytes) {
  ByteReader r(std::move(bytes));
  if (r.remaining() < 4 || r.bytes(4) != "DGDS") throw FormatError("bad dataset magic", 0);
  const std::size_t version_at = r.offset();
  if (const auto version = r.u32(); version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
  }
  const std::size_t n = r.u32();
  const std::size_t dim = r.u32();
  const std::size_t k = r.u32();
  const std::size_t flag_at = r.offset();
  const std::uint8_t flag = r.u8();
  if (flag > 1) throw FormatError("bad labeled flag", flag_at);
  if (n * dim > r.remaining() / 4) throw FormatError("feature payload truncated", r.offset());
  Tensor x(Shape{n, dim});
  for (double& v : x.data()) v = static_cast<double>(r.f32());
  std::optional<std::vector<std::size_t>> labels;
  if (flag) {
    labels.emplace(n);
    for (auto& l : *labels) {
      const std::size_t at = r.offset();
      l = r.u16();
      if (l >= k) throw FormatError("label out of range", at);
    }
  }
  r.expect_end("dataset");
  try {
    return LabeledDataset(std::move(x), std::move(labels), k);
  } catch (const DataError& e) {
    throw FormatError(std::string("invalid dataset: ") + e.what(), r.offset());
  } catch (const NumericError& e) {
    throw FormatError(std::string("invalid dataset: ") + e.what(), r.offset());
  }
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  ByteWriter w;
  const auto bytes = encode_dataset(ds);
  w.bytes(std::string_view(bytes.data(), bytes.size()));
  w.save(path);
}

LabeledDataset read_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace dgd
