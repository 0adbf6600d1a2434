#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "dgd/dataset.hpp"
#include "dgd/errors.hpp"

using namespace dgd;
namespace fs = std::filesystem;

namespace {

// Plain batch gradient descent on the logistic loss, independent of the library's autodiff.
double logistic_train_accuracy(const LabeledDataset& ds) {
  const std::size_t d = ds.dim();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  const auto& x = ds.features();
  const auto& y = ds.labels();
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x.at(i, j);
      const double err = 1.0 / (1.0 + std::exp(-z)) - static_cast<double>(y[i]);
      for (std::size_t j = 0; j < d; ++j) gw[j] += err * x.at(i, j);
      gb += err;
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= 0.5 * gw[j] / ds.size();
    b -= 0.5 * gb / ds.size();
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x.at(i, j);
    ok += (z > 0.0) == (y[i] == 1);
  }
  return static_cast<double>(ok) / ds.size();
}

std::vector<double> class_mean(const LabeledDataset& ds, std::size_t k) {
  std::vector<double> m(ds.dim(), 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels()[i] != k) continue;
    n += 1.0;
    for (std::size_t j = 0; j < ds.dim(); ++j) m[j] += ds.features().at(i, j);
  }
  for (double& v : m) v /= n;
  return m;
}

}  // namespace

TEST(Mixture, LinearlySeparableInTwoDimensions) {
  const auto ds = make_mixture_dataset({2, 2, 200, 0.05, 4});
  EXPECT_GE(logistic_train_accuracy(ds), 0.99);
}

TEST(Mixture, BalancedDeterministicUnitCenters) {
  const MixtureSpec spec{10, 16, 300, 0.2, 7};
  const auto ds = make_mixture_dataset(spec);
  EXPECT_EQ(ds.size(), 3000u);
  std::vector<std::size_t> counts(10, 0);
  for (auto l : ds.labels()) ++counts[l];
  for (auto c : counts) EXPECT_EQ(c, 300u);
  EXPECT_EQ(encode_dataset(ds), encode_dataset(make_mixture_dataset(spec)));
  EXPECT_NE(make_mixture_dataset({10, 16, 300, 0.2, 8}), ds);
  // Sample means estimate the centers to about spread * sqrt(dim / n).
  const double tol = 5.0 * 0.2 * std::sqrt(16.0 / 300.0);
  std::vector<std::vector<double>> means;
  for (std::size_t k = 0; k < 10; ++k) {
    means.push_back(class_mean(ds, k));
    double norm = 0.0;
    for (double v : means.back()) norm += v * v;
    EXPECT_NEAR(std::sqrt(norm), 1.0, tol);
  }
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = a + 1; b < 10; ++b) {
      double dist = 0.0;
      for (std::size_t j = 0; j < 16; ++j) dist += (means[a][j] - means[b][j]) * (means[a][j] - means[b][j]);
      EXPECT_GE(std::sqrt(dist), 2 * 0.2 - 2 * tol);
    }
  }
}

TEST(Mixture, InfeasibleSeparationIsConfigError) {
  EXPECT_THROW(make_mixture_dataset({10, 2, 5, 0.9, 1}), ConfigError);
  EXPECT_THROW(make_mixture_dataset({1, 4, 5, 0.1, 1}), ConfigError);
  EXPECT_THROW(make_mixture_dataset({2, 1, 5, 0.1, 1}), ConfigError);
}

TEST(DigitGrid, NoiselessExamplesAreTemplates) {
  const auto ds = make_digitgrid_dataset({10, 100, 0.0, 2});
  EXPECT_EQ(ds.size(), 1000u);
  EXPECT_EQ(ds.dim(), 64u);
  const Tensor t = digit_templates(10);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < 64; ++j) EXPECT_EQ(ds.features().at(i, j), t.at(ds.labels()[i], j));
  }
}

TEST(DigitGrid, TemplateMatchingOracle) {
  const auto ds = make_digitgrid_dataset({10, 100, 0.1, 3});
  const Tensor t = digit_templates(10);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0, best_d = 65;
    for (std::size_t k = 0; k < 10; ++k) {
      std::size_t d = 0;
      for (std::size_t j = 0; j < 64; ++j) d += ds.features().at(i, j) != t.at(k, j);
      if (d < best_d) best_d = d, best = k;
    }
    ok += best == ds.labels()[i];
  }
  EXPECT_GT(static_cast<double>(ok) / ds.size(), 0.95);
  for (double v : ds.features().data()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  EXPECT_THROW(make_digitgrid_dataset({10, 10, 0.5, 1}), ConfigError);
}

TEST(Partition, DisjointAndExhaustive) {
  const auto ds = make_mixture_dataset({2, 4, 500, 0.1, 1});
  const auto p = partition_disjoint(ds, 5, 9);
  ASSERT_EQ(p.subsets.size(), 5u);
  std::vector<std::size_t> all;
  for (const auto& s : p.subsets) {
    EXPECT_EQ(s.size(), 200u);
    all.insert(all.end(), s.begin(), s.end());
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_NO_THROW(p.validate(ds.size()));

  const auto uneven = partition_disjoint(ds, 7, 9);
  for (const auto& s : uneven.subsets) EXPECT_TRUE(s.size() == 142 || s.size() == 143);
  EXPECT_EQ(partition_disjoint(ds, 1, 9).subsets[0].size(), 1000u);
  EXPECT_THROW(partition_disjoint(ds, 1001, 9), ConfigError);
}

TEST(DatasetFile, RoundTripLabeledAndUnlabeled) {
  const auto ds = make_mixture_dataset({3, 4, 10, 0.1, 1});
  const LabeledDataset q(quantize_f32(ds.features()), ds.labels(), 3);
  const fs::path path = fs::temp_directory_path() / "dgd_ds_test.dgds";
  write_dataset(q, path);
  EXPECT_EQ(read_dataset(path), q);
  write_dataset(q.unlabeled(), path);
  const auto u = read_dataset(path);
  EXPECT_FALSE(u.labeled());
  EXPECT_EQ(u.features(), q.features());
  EXPECT_THROW(u.labels(), PreconditionError);
  fs::remove(path);
}

TEST(DatasetFile, CorruptMagicAndTruncation) {
  const auto bytes = encode_dataset(make_mixture_dataset({2, 2, 3, 0.1, 1}));
  auto bad = bytes;
  bad[1] = 'Z';
  EXPECT_THROW(decode_dataset(bad), FormatError);
  auto cut = bytes;
  cut.resize(cut.size() - 1);
  EXPECT_THROW(decode_dataset(cut), FormatError);
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(decode_dataset(version), FormatError);
}

TEST(QueryPool, SplitSizes) {
  const auto ds = make_mixture_dataset({2, 2, 50, 0.1, 1}).unlabeled();
  auto [s0, u0] = split_query_pool(ds, 0);
  EXPECT_EQ(s0.size(), 0u);
  EXPECT_EQ(u0.size(), 100u);
  auto [s1, u1] = split_query_pool(ds, 100);
  EXPECT_EQ(u1.size(), 0u);
  auto [s2, u2] = split_query_pool(ds, 13);
  EXPECT_EQ(s2.size() + u2.size(), 100u);
  EXPECT_EQ(s2.features().row(0)[0], ds.features().row(0)[0]);
  EXPECT_EQ(u2.features().row(0)[0], ds.features().row(13)[0]);
  EXPECT_THROW(split_query_pool(ds, 101), ConfigError);
}

TEST(QueryPool, LargePoolArithmetic) {
  const LabeledDataset big(Tensor(Shape{60000, 1}), std::nullopt, 10);
  auto [s, u] = split_query_pool(big, 1300);
  EXPECT_EQ(u.size(), 58700u);
}

TEST(Quantize, Idempotent) {
  Tensor t = Tensor::matrix(1, 2, {0.1, 1.0 / 3.0});
  Tensor q = quantize_f32(t);
  EXPECT_EQ(q.at(0, 0), static_cast<double>(0.1f));
  EXPECT_EQ(quantize_f32(q), q);
}
