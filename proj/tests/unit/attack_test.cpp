#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dgd/attack.hpp"
#include "dgd/dataset.hpp"
#include "dgd/errors.hpp"
#include "dgd/rng.hpp"

using namespace dgd;

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Softmax regression whose class weight vectors are the rows of `w`.
ParamSet linear_victim(const Tensor& w) {
  const auto arch = Architecture::parse(std::to_string(w.cols()) + "-dense:" + std::to_string(w.rows()) + "-softmax");
  Tensor weight(Shape{w.cols(), w.rows()});
  for (std::size_t k = 0; k < w.rows(); ++k) {
    for (std::size_t i = 0; i < w.cols(); ++i) weight.at(i, k) = w.at(k, i);
  }
  return ParamSet(arch, {{"dense0.weight", weight}, {"dense0.bias", Tensor(Shape{w.rows()})}});
}

// Rows sum to zero across classes.
const Tensor kWeights = Tensor::matrix(3, 4, {2, -1, 0, 1, -1, 2, 1, -1, -1, -1, -1, 0});

}  // namespace

TEST(Inversion, LinearVictimRecoversClassDirection) {
  const auto victim = linear_victim(kWeights);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto r = inversion_attack(victim, k, 100, 0.1, 0.01, 3);
    EXPECT_GT(cosine(r.input.data(), kWeights.row(k)), 0.9);
    ASSERT_EQ(r.confidence.size(), 101u);
    EXPECT_GT(r.confidence.back(), r.confidence.front());
    EXPECT_GT(r.confidence.back(), 0.9);
  }
}

TEST(Inversion, ZeroStepsReturnsSeededStart) {
  const auto victim = linear_victim(kWeights);
  const auto r = inversion_attack(victim, 1, 0, 0.1, 0.01, 5);
  Rng rng(derive_seed(5, 51));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.input[i], 0.01 * rng.normal());
  EXPECT_EQ(r.confidence.size(), 1u);
  EXPECT_EQ(inversion_attack(victim, 1, 10, 0.1, 0.01, 5).input, inversion_attack(victim, 1, 10, 0.1, 0.01, 5).input);
}

TEST(Inversion, Errors) {
  const auto victim = linear_victim(kWeights);
  EXPECT_THROW(inversion_attack(victim, 3, 1, 0.1, 0.0, 1), ConfigError);
  const auto logits = xavier_init(Architecture::parse("4-dense:3"), 1);
  EXPECT_THROW(inversion_attack(logits, 0, 1, 0.1, 0.0, 1), ConfigError);
}

TEST(TemplateAgreement, HandComputedValues) {
  const Tensor templates = Tensor::matrix(2, 3, {1, 0, 0, 0, 1, 0});
  const std::vector<double> first{1, 0, 0};
  EXPECT_NEAR(template_agreement(first, templates, 0), 1.5, 1e-12);
  EXPECT_NEAR(template_agreement(first, templates, 1), -1.5, 1e-12);
  const std::vector<double> flat{2, 2, 2};
  EXPECT_EQ(template_agreement(flat, templates, 0), 0.0);
  EXPECT_THROW(template_agreement(std::vector<double>{1, 0}, templates, 0), ShapeError);
  EXPECT_THROW(template_agreement(first, templates, 2), ShapeError);
}

TEST(InversionQuality, PositiveForTemplateAlignedVictim) {
  const Tensor glyphs = digit_templates(10);
  Tensor w = glyphs;
  for (std::size_t i = 0; i < w.cols(); ++i) {
    double m = 0.0;
    for (std::size_t k = 0; k < w.rows(); ++k) m += glyphs.at(k, i) / 10.0;
    for (std::size_t k = 0; k < w.rows(); ++k) w.at(k, i) -= m;
  }
  EXPECT_GT(inversion_quality(linear_victim(w), glyphs, 100, 0.1, 0.01, 2), 0.2);
}
