#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dgd/errors.hpp"
#include "dgd/rng.hpp"
#include "dgd/tensor.hpp"

using namespace dgd;

TEST(Tensor, ShapeAndSizeMustAgree) {
  EXPECT_THROW(Tensor(Shape{2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t(Shape{2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 6.0);
  EXPECT_EQ(shape_string(t.shape()), "[2,3]");
}

TEST(Tensor, ItemNeedsOneElement) {
  EXPECT_DOUBLE_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor(Shape{2}).item(), ShapeError);
}

TEST(Tensor, GatherRowsKeepsOrder) {
  Tensor t = Tensor::matrix(3, 2, {0, 1, 10, 11, 20, 21});
  const std::vector<std::size_t> idx{2, 0};
  Tensor g = t.gather_rows(idx);
  EXPECT_EQ(g, Tensor::matrix(2, 2, {20, 21, 0, 1}));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(t.gather_rows(bad), ShapeError);
}

TEST(Tensor, FiniteCheck) {
  Tensor t(Shape{2}, 1.0);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
  EXPECT_THROW(require_finite(t, "t"), NumericError);
}

TEST(Rng, DeterministicStreams) {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 5; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(1, 5), derive_seed(1, 5));
}

TEST(Rng, LaplaceMoments) {
  Rng rng(3);
  const int n = 200000;
  const double b = 2.0;
  double sum = 0.0, abs_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.laplace(b);
    sum += x;
    abs_sum += std::fabs(x);
  }
  // E|X| = b, Var|X| = b^2; 5 standard errors.
  EXPECT_NEAR(sum / n, 0.0, 5.0 * std::sqrt(2.0) * b / std::sqrt(n));
  EXPECT_NEAR(abs_sum / n, b, 5.0 * b / std::sqrt(n));
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(11);
  std::vector<std::size_t> v(50);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  rng.shuffle(v);
  std::vector<std::size_t> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(sorted[i], i);
}
