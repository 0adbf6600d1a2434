#include <gtest/gtest.h>

#include <cmath>

#include "dgd/autodiff.hpp"
#include "dgd/errors.hpp"
#include "gradcheck.hpp"

using namespace dgd;
using dgd::testing::max_relative_error;
using dgd::testing::random_tensor;
namespace ad = dgd::ad;

namespace {

constexpr double kTol = 1e-4;

// Weighted sum so every output element gets a distinct upstream gradient.
ad::Var reduce(ad::Var v, std::uint64_t seed) {
  ad::Graph& g = v.graph();
  return ad::sum(ad::mul(v, g.constant(random_tensor(v.value().shape(), seed))));
}

Tensor positive(Shape s, std::uint64_t seed) {
  Tensor t = random_tensor(std::move(s), seed);
  for (double& v : t.data()) v = 0.5 + std::fabs(v);
  return t;
}

}  // namespace

TEST(Autodiff, MatmulAndBias) {
  auto err = max_relative_error({random_tensor({3, 4}, 1), random_tensor({4, 2}, 2), random_tensor({2}, 3)},
                                [](ad::Graph&, const std::vector<ad::Var>& v) {
                                  return reduce(ad::add_bias(ad::matmul(v[0], v[1]), v[2]), 9);
                                });
  EXPECT_LT(err, kTol);
}

TEST(Autodiff, Elementwise) {
  using Fn = ad::Var (*)(ad::Var);
  const std::vector<std::pair<const char*, Fn>> ops = {
      {"relu", ad::relu}, {"sigmoid", ad::sigmoid}, {"tanh", ad::tanh}, {"exp", ad::exp},
      {"square", ad::square}, {"abs", ad::abs}, {"normalize_rows", ad::normalize_rows},
      {"softmax", ad::softmax}, {"log_softmax", ad::log_softmax}, {"mean_rows", ad::mean_rows},
      {"sum_cols", ad::sum_cols}};
  for (const auto& [name, op] : ops) {
    auto err = max_relative_error({random_tensor({3, 5}, 4)}, [op = op](ad::Graph&, const std::vector<ad::Var>& v) {
      return reduce(op(v[0]), 5);
    });
    EXPECT_LT(err, kTol) << name;
  }
  auto err = max_relative_error({positive({3, 5}, 6)}, [](ad::Graph&, const std::vector<ad::Var>& v) {
    return reduce(ad::log(v[0]), 7);
  });
  EXPECT_LT(err, kTol) << "log";
}

TEST(Autodiff, BinaryAndScalarOps) {
  auto err = max_relative_error({random_tensor({2, 3}, 10), random_tensor({2, 3}, 11)},
                                [](ad::Graph&, const std::vector<ad::Var>& v) {
                                  ad::Var a = ad::add(v[0], ad::scale(v[1], -0.7));
                                  ad::Var b = ad::sub(ad::mul(v[0], v[1]), ad::add_scalar(v[1], 2.0));
                                  return ad::add(reduce(a, 12), ad::mean(ad::mul(b, b)));
                                });
  EXPECT_LT(err, kTol);
}

TEST(Autodiff, SliceAndPick) {
  const std::vector<std::size_t> idx{2, 0, 1};
  auto err = max_relative_error({random_tensor({3, 6}, 13)}, [&](ad::Graph&, const std::vector<ad::Var>& v) {
    return ad::add(reduce(ad::slice_cols(v[0], 1, 4), 14), ad::sum(ad::pick(v[0], idx)));
  });
  EXPECT_LT(err, kTol);
}

TEST(Autodiff, Composites) {
  const std::vector<std::size_t> labels{1, 0, 3};
  auto err = max_relative_error({random_tensor({3, 4}, 15)}, [&](ad::Graph&, const std::vector<ad::Var>& v) {
    return ad::add(ad::add(ad::cross_entropy(v[0], labels), ad::mean(ad::entropy_rows(v[0]))),
                   ad::add(reduce(ad::squared_norm_rows(v[0]), 16), reduce(ad::l1_norm_rows(v[0]), 17)));
  });
  EXPECT_LT(err, kTol);
}

TEST(Autodiff, CrossEntropyValue) {
  ad::Graph g;
  ad::Var logits = g.constant(Tensor::matrix(1, 3, {0.0, 0.0, 0.0}));
  const std::vector<std::size_t> labels{2};
  EXPECT_NEAR(ad::cross_entropy(logits, labels).value().item(), std::log(3.0), 1e-12);
  EXPECT_NEAR(ad::entropy_rows(logits).value().item(), std::log(3.0), 1e-12);
}

TEST(Autodiff, NormalizeRowsHasUnitNorm) {
  ad::Graph g;
  ad::Var y = ad::normalize_rows(g.constant(Tensor::matrix(2, 2, {3, 4, -1, 0})));
  EXPECT_NEAR(y.value().at(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(y.value().at(0, 1), 0.8, 1e-12);
  EXPECT_NEAR(y.value().at(1, 0), -1.0, 1e-11);
}

TEST(Autodiff, ConstantsCarryNoGradient) {
  ad::Graph g;
  ad::Var w = g.parameter(Tensor::matrix(1, 1, {2.0}));
  ad::Var c = g.constant(Tensor::matrix(1, 1, {3.0}));
  ad::Var loss = ad::sum(ad::mul(w, c));
  g.backward(loss);
  EXPECT_DOUBLE_EQ(g.grad(w).item(), 3.0);
  EXPECT_FALSE(g.requires_grad(c));
  EXPECT_THROW(g.grad(c), GraphError);
}

TEST(Autodiff, ConstantLossGivesZeroGradients) {
  ad::Graph g;
  ad::Var w = g.parameter(Tensor::matrix(1, 2, {1.0, 2.0}));
  ad::Var loss = ad::sum(g.constant(Tensor::matrix(1, 1, {5.0})));
  g.backward(loss);
  EXPECT_EQ(g.grad(w), Tensor(Shape{1, 2}));
}

TEST(Autodiff, LossMustBeScalar) {
  ad::Graph g;
  ad::Var w = g.parameter(Tensor::matrix(1, 2, {1.0, 2.0}));
  EXPECT_THROW(g.backward(w), GraphError);
}

TEST(Autodiff, NonFiniteValuesAreRejected) {
  ad::Graph g;
  ad::Var w = g.parameter(Tensor::matrix(1, 1, {-1.0}));
  EXPECT_THROW(ad::log(w), NumericError);
}

TEST(Autodiff, ShapeMismatch) {
  ad::Graph g;
  ad::Var a = g.constant(Tensor(Shape{2, 3}));
  ad::Var b = g.constant(Tensor(Shape{2, 2}));
  EXPECT_THROW(ad::matmul(a, b), ShapeError);
  EXPECT_THROW(ad::add(a, b), ShapeError);
}

TEST(Autodiff, VarsFromAnotherGraphAreRejected) {
  ad::Graph g1, g2;
  ad::Var a = g1.constant(Tensor(Shape{1, 1}));
  ad::Var b = g2.constant(Tensor(Shape{1, 1}));
  EXPECT_THROW(ad::add(a, b), GraphError);
}
