#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dgd/config.hpp"
#include "dgd/errors.hpp"
#include "dgd/pipeline.hpp"

using namespace dgd;

TEST(Config, ParsesCommentsAndWhitespace) {
  const auto c = Config::parse("# header\n  seed = 7  \n\nteachers.count=20 # trailing\naggregation.noise_scale = 40\n");
  EXPECT_EQ(c.values().size(), 3u);
  EXPECT_EQ(c.get_u64("seed", 0), 7u);
  EXPECT_EQ(c.get_size("teachers.count", 0), 20u);
  EXPECT_DOUBLE_EQ(c.get_double("aggregation.noise_scale", 0.0), 40.0);
  EXPECT_DOUBLE_EQ(c.get_double("missing", 2.5), 2.5);
  EXPECT_EQ(c.get_string("missing", "x"), "x");
}

TEST(Config, MalformedLinesAreErrors) {
  EXPECT_THROW(Config::parse("seed 7\n"), ConfigError);
  EXPECT_THROW(Config::parse(" = 7\n"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/dgd.cfg"), ConfigError);
}

TEST(Config, TypedGettersRejectBadValues) {
  const auto c = Config::parse("a = 1.5x\nb = -3\nc = maybe\nd = \ne = yes\n");
  EXPECT_THROW(c.get_double("a", 0.0), ConfigError);
  EXPECT_THROW(c.get_size("b", 0), ConfigError);
  EXPECT_THROW(c.get_bool("c", false), ConfigError);
  EXPECT_THROW(c.get_double("d", 0.0), ConfigError);
  EXPECT_TRUE(c.get_bool("e", false));
}

TEST(Config, TracksUnusedKeys) {
  const auto c = Config::parse("a = 1\nb = 2\n");
  c.get_size("a", 0);
  EXPECT_EQ(c.unused_keys(), (std::set<std::string>{"b"}));
}

TEST(RunConfig, DefaultsValidate) {
  const auto r = RunConfig::from(Config{});
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(r.teacher_count, 20u);
  EXPECT_DOUBLE_EQ(r.aggregation.noise_scale, 40.0);
  EXPECT_EQ(r.query_count, 100u);
  EXPECT_EQ(r.data_dim(), 16u);
}

TEST(RunConfig, UnknownKeyIsAnError) {
  try {
    RunConfig::from(Config::parse("teachers.cuont = 20\n"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("teachers.cuont"), std::string::npos);
  }
}

TEST(RunConfig, InvalidValuesAreErrors) {
  EXPECT_THROW(RunConfig::from(Config::parse("data.kind = faces\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("data.classes = 1\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("teachers.count = 0\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("triples.radius = -1\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("privacy.delta = 1\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("arch.student = 16-dense:10\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("vae.latent_dim = 0\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(Config::parse("student.w_sup = 0\nstudent.w_norm = 0\nstudent.w_tan = 0\n"
                                             "student.w_ent = 0\n")),
               ConfigError);
}

TEST(RunConfig, GaussianNeedsAccountingOff) {
  EXPECT_THROW(RunConfig::from(Config::parse("aggregation.mechanism = gaussian\n")), ConfigError);
  EXPECT_NO_THROW(RunConfig::from(Config::parse("aggregation.mechanism = gaussian\nprivacy.accounting = false\n")));
  EXPECT_NO_THROW(RunConfig::from(Config::parse("aggregation.mechanism = gaussian\nquery.count = 0\n")));
  EXPECT_THROW(RunConfig::from(Config::parse("aggregation.noise_scale = 0\n")), ConfigError);
}

TEST(RunConfig, AutoLatentNoiseFollowsEps1) {
  const auto r = RunConfig::from(Config::parse("vae.noise_scale = auto\nprivacy.eps1 = 0.5\nvae.latent_dim = 8\n"));
  EXPECT_DOUBLE_EQ(r.latent_noise_scale, 2.0 * 8 / 0.5);
  EXPECT_NEAR(r.implied_eps1(), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(RunConfig::from(Config{}).implied_eps1(), 0.0);
}

TEST(RunConfig, DigitGridDefaults) {
  const auto r = RunConfig::from(Config::parse("data.kind = digitgrid\n"));
  EXPECT_EQ(r.data_dim(), 64u);
  EXPECT_FALSE(r.vae.standardize);
  EXPECT_NE(r.generator_arch.find("sigmoid"), std::string::npos);
}

TEST(RunConfig, TextRoundTrip) {
  const auto r = RunConfig::from(Config::parse(
      "seed = 9\ndata.kind = digitgrid\nteachers.count = 7\naggregation.noise_scale = 12.5\nstudent.w_tan = 0\n"
      "generator.balance = per_sample\nvae.noise_scale = auto\nprivacy.eps1 = 0.3\nquery.count = 27\n"));
  const std::string text = r.to_text();
  const auto back = RunConfig::from(Config::parse(text));
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.teacher_count, 7u);
  EXPECT_DOUBLE_EQ(back.latent_noise_scale, r.latent_noise_scale);
  EXPECT_EQ(back.generator.balance, BalanceForm::per_sample);
  EXPECT_EQ(back.weights.w_tan, 0.0);
}

TEST(RunConfig, LedgerReflectsConfiguration) {
  const auto r = RunConfig::from(Config::parse("aggregation.noise_scale = 40\nprivacy.delta = 1e-6\n"));
  const auto ledger = r.ledger(100);
  EXPECT_DOUBLE_EQ(ledger.eps0, 0.05);
  EXPECT_EQ(ledger.query_count, 100u);
  EXPECT_DOUBLE_EQ(ledger.delta, 1e-6);
  EXPECT_EQ(ledger.latent_dim, r.vae.latent_dim);
}
