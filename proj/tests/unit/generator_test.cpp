#include <gtest/gtest.h>

#include <cmath>

#include "dgd/dataset.hpp"
#include "dgd/discriminative.hpp"
#include "dgd/errors.hpp"
#include "dgd/generator.hpp"
#include "gradcheck.hpp"

using namespace dgd;
namespace ad = dgd::ad;

namespace {

ParamSet linear_disc(double scale) {
  const auto arch = Architecture::parse("2-dense:2-softmax");
  return ParamSet(arch, {{"dense0.weight", Tensor::matrix(2, 2, {scale, -scale, -scale, scale})},
                         {"dense0.bias", Tensor(Shape{2})}});
}

const ParamSet& mixture_discriminator() {
  static const ParamSet net = [] {
    const auto ds = make_mixture_dataset({10, 16, 100, 0.2, 6});
    TrainConfig cfg;
    cfg.rounds = 800;
    cfg.lr = 0.01;
    return train_classifier(ds, Architecture::parse("16-dense:64-relu-dense:10-softmax"), cfg);
  }();
  return net;
}

GeneratorConfig quick_config() {
  GeneratorConfig cfg;
  cfg.rounds = 1000;
  cfg.lr = 0.01;
  cfg.seed = 3;
  return cfg;
}

const Architecture kGenArch = Architecture::parse("16-dense:64-relu-dense:16-normalize");

}  // namespace

TEST(GeneratorLoss, OneHotPredictionsHaveZeroCrossEntropy) {
  ad::Graph g;
  const Tensor x = Tensor::matrix(2, 2, {1000, 0, 0, 1000});
  const auto t = generator_loss(linear_disc(1.0), g.constant(x), GeneratorConfig{});
  EXPECT_EQ(t.cross_entropy.value().item(), 0.0);
  EXPECT_NEAR(t.balance.value().item(), -std::log(2.0), 1e-10);  // one of each class
}

TEST(GeneratorLoss, UniformBatchMeanReachesBalanceMinimum) {
  ad::Graph g;
  const auto t = generator_loss(linear_disc(0.0), g.constant(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6})),
                                GeneratorConfig{});
  EXPECT_NEAR(t.balance.value().item(), -std::log(2.0), 1e-10);
}

TEST(GeneratorLoss, ZeroFeaturesGiveNoActivationTerm) {
  ad::Graph g;
  const auto t = generator_loss(linear_disc(1.0), g.constant(Tensor(Shape{4, 2})), GeneratorConfig{});
  EXPECT_EQ(t.activation.value().item(), 0.0);
}

TEST(GeneratorLoss, TotalCombinesTermsWithSigns) {
  ad::Graph g;
  GeneratorConfig cfg;
  cfg.alpha = 2.0;
  cfg.beta = 0.5;
  const auto x = g.constant(Tensor::matrix(2, 2, {0.3, -0.2, 0.1, 0.7}));
  const auto t = generator_loss(linear_disc(1.0), x, cfg);
  const double expected =
      t.cross_entropy.value().item() + 2.0 * t.balance.value().item() - 0.5 * t.activation.value().item();
  EXPECT_NEAR(t.total.value().item(), expected, 1e-12);
  cfg.reward_activation = false;
  ad::Graph g2;
  const auto u = generator_loss(linear_disc(1.0), g2.constant(x.value()), cfg);
  EXPECT_NEAR(u.total.value().item(),
              u.cross_entropy.value().item() + 2.0 * u.balance.value().item() + 0.5 * u.activation.value().item(),
              1e-12);
}

TEST(GeneratorLoss, PerSampleBalanceForm) {
  ad::Graph g;
  GeneratorConfig cfg;
  cfg.balance = BalanceForm::per_sample;
  const auto t = generator_loss(linear_disc(0.0), g.constant(Tensor(Shape{3, 2})), cfg);
  EXPECT_NEAR(t.balance.value().item(), -std::log(2.0), 1e-10);
}

TEST(GeneratorLoss, DiscriminatorIsFrozen) {
  ad::Graph g;
  const auto gen = xavier_init(Architecture::parse("3-dense:2"), 1);
  BoundNet bg = bind(g, gen, Trainable::yes);
  const auto out = apply(bg, g.constant(dgd::testing::random_tensor({4, 3}, 2)));
  const auto t = generator_loss(linear_disc(1.0), out.output, GeneratorConfig{});
  g.backward(t.total);
  EXPECT_THROW(g.grad(t.discriminator.params[0]), GraphError);
  EXPECT_NO_THROW(collect_gradients(g, bg));
}

TEST(GeneratorLoss, GradientMatchesFiniteDifferences) {
  const auto disc = xavier_init(Architecture::parse("4-dense:6-tanh-dense:3-softmax"), 4);
  const Tensor z = dgd::testing::random_tensor({5, 3}, 5);
  for (auto form : {BalanceForm::batch_mean, BalanceForm::per_sample}) {
    GeneratorConfig cfg;
    cfg.balance = form;
    const double err = dgd::testing::max_relative_error(
        std::vector<ParamSet>{xavier_init(Architecture::parse("3-dense:5-tanh-dense:4-sigmoid"), 6)},
        [&](ad::Graph& g, const std::vector<BoundNet>& nets) {
          return generator_loss(disc, apply(nets[0], g.constant(z)).output, cfg).total;
        });
    EXPECT_LT(err, 1e-4);
  }
}

TEST(TrainGenerator, ZeroRoundsReturnsInitialization) {
  auto cfg = quick_config();
  cfg.rounds = 0;
  const auto a = train_generator(mixture_discriminator(), kGenArch, cfg);
  EXPECT_EQ(a, xavier_init(kGenArch, derive_seed(cfg.seed, 21)));
  EXPECT_EQ(a.architecture(), kGenArch);
}

TEST(TrainGenerator, ConfidentBalancedAndDescending) {
  const ParamSet& disc = mixture_discriminator();
  const ParamSet before = disc;
  GeneratorLog log;
  const auto gen = train_generator(disc, kGenArch, quick_config(), &log);
  EXPECT_EQ(disc, before);
  ASSERT_EQ(log.round_loss.size(), 1000u);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    first += log.round_loss[i];
    last += log.round_loss[900 + i];
  }
  EXPECT_LT(last, first);

  const auto synth = synthesize_dataset(gen, 1000, 9, 10);
  const auto diag = inspect_samples(disc, synth.features());
  EXPECT_GE(diag.mean_max_probability, 0.7);
  EXPECT_GE(diag.class_entropy, 0.9 * std::log(10.0));

  // More confident on generated data than on uniform noise of matching scale.
  Rng rng(4);
  Tensor noise(Shape{1000, 16});
  for (double& v : noise.data()) v = rng.uniform(-0.25, 0.25);
  EXPECT_GT(diag.mean_max_probability, inspect_samples(disc, noise).mean_max_probability + 0.1);

  // No private example reproduced verbatim.
  const auto priv = make_mixture_dataset({10, 16, 100, 0.2, 6});
  double closest = 1e300;
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = 0; j < priv.size(); j += 7) {
      double d = 0.0;
      for (std::size_t c = 0; c < 16; ++c) {
        const double diff = synth.features().at(i, c) - priv.features().at(j, c);
        d += diff * diff;
      }
      closest = std::min(closest, d);
    }
  }
  EXPECT_GT(closest, 0.0);
}

TEST(Synthesize, DeterministicFiniteInRange) {
  const auto gen = xavier_init(Architecture::parse("4-dense:8-relu-dense:6-sigmoid"), 2);
  const auto a = synthesize_dataset(gen, 50, 7, 3);
  EXPECT_EQ(a, synthesize_dataset(gen, 50, 7, 3));
  EXPECT_NE(a, synthesize_dataset(gen, 50, 8, 3));
  EXPECT_FALSE(a.labeled());
  EXPECT_EQ(a.size(), 50u);
  for (double v : a.features().data()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(GeneratorConfig, Validation) {
  GeneratorConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(train_generator(linear_disc(1.0), Architecture::parse("3-dense:2"), GeneratorConfig{}), ConfigError);
}
