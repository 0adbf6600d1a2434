#include <gtest/gtest.h>

#include <cmath>

#include "dgd/accountant.hpp"
#include "dgd/errors.hpp"
#include "json.hpp"

using namespace dgd;

namespace {

PrivacyLedger ledger(std::size_t q, double eps0 = 0.05, double eps1 = 0.0) {
  PrivacyLedger l;
  l.eps0 = eps0;
  l.query_count = q;
  l.delta = 1e-5;
  l.eps1 = eps1;
  return l;
}

}  // namespace

TEST(Accountant, BasicArithmetic) {
  EXPECT_NEAR(compose_basic(ledger(27)).eps_total, 1.35, 1e-12);
  EXPECT_NEAR(compose_basic(ledger(1, 0.05, 0.01)).eps_total, 0.06, 1e-12);
}

TEST(Accountant, AdvancedReferenceValues) {
  EXPECT_NEAR(compose_advanced(ledger(400)).eps_total, 5.80, 0.01);
  EXPECT_NEAR(compose_advanced(ledger(1000)).eps_total, 10.1, 0.05);
  // Independent evaluation of q e^2 + e sqrt(-2 q ln delta).
  const double q = 400, e = 0.05;
  EXPECT_NEAR(compose_advanced(ledger(400)).eps_total, q * e * e + e * std::sqrt(-2 * q * std::log(1e-5)), 1e-12);
}

TEST(Accountant, MomentsIndependentBruteForce) {
  const auto r = compose_moments_independent(ledger(1000));
  double best = 1e300;
  int arg = 0;
  for (int lam = 1; lam <= 64; ++lam) {
    const double v = (1000 * 2 * 0.05 * 0.05 * lam * (lam + 1) + std::log(1e5)) / lam;
    if (v < best) best = v, arg = lam;
  }
  EXPECT_NEAR(r.eps_total, best, 1e-9);
  EXPECT_NEAR(r.eps_total, 20.76, 0.01);
  ASSERT_TRUE(r.minimizing_lambda.has_value());
  EXPECT_EQ(*r.minimizing_lambda, arg);
  EXPECT_EQ(*r.minimizing_lambda, 2);
  EXPECT_EQ(compose_moments_independent(ledger(1000), 200).eps_total, r.eps_total);
}

TEST(Accountant, ZeroQueriesGiveExactlyEps1) {
  for (double eps1 : {0.0, 0.01, 0.7}) {
    const auto l = ledger(0, 0.05, eps1);
    EXPECT_EQ(compose_basic(l).eps_total, eps1);
    EXPECT_EQ(compose_advanced(l).eps_total, eps1);
    EXPECT_EQ(compose_moments_independent(l).eps_total, eps1);
  }
}

TEST(Accountant, MonotoneInQueriesAndEps0) {
  for (auto method : {compose_basic, compose_advanced}) {
    double prev = -1.0;
    for (std::size_t q = 0; q <= 2000; q += 100) {
      const double e = method(ledger(q)).eps_total;
      EXPECT_GE(e, prev);
      prev = e;
    }
    prev = -1.0;
    for (int i = 1; i <= 20; ++i) {
      const double e = method(ledger(100, 0.01 * i)).eps_total;
      EXPECT_GE(e, prev);
      prev = e;
    }
  }
}

TEST(Accountant, ReportMinPicksSmallest) {
  for (std::size_t q : {1u, 27u, 400u, 1000u, 5000u}) {
    const auto l = ledger(q, 0.05, 0.01);
    const auto m = report_min(l);
    EXPECT_LE(m.eps_total, compose_basic(l).eps_total);
    EXPECT_LE(m.eps_total, compose_advanced(l).eps_total);
    EXPECT_LE(m.eps_total, compose_moments_independent(l).eps_total);
  }
  EXPECT_EQ(report_min(ledger(1, 0.05, 0.01)).method, CompositionMethod::basic);
  EXPECT_EQ(report_min(ledger(1000)).method, CompositionMethod::advanced);
}

TEST(Accountant, GenerativeScale) {
  EXPECT_DOUBLE_EQ(generative_noise_scale(0.01, 32), 6400.0);
  EXPECT_DOUBLE_EQ(generative_noise_scale(2.0, 1), 1.0);
  EXPECT_GT(generative_noise_scale(0.1, 32), generative_noise_scale(0.2, 32));
  EXPECT_DOUBLE_EQ(generative_epsilon(6400.0, 32), 0.01);
}

TEST(Accountant, InvalidLedger) {
  auto l = ledger(10);
  l.delta = 1.0;
  EXPECT_THROW(compose_advanced(l), ConfigError);
  l = ledger(10, -0.1);
  EXPECT_THROW(compose_basic(l), ConfigError);
}

TEST(Accountant, ReportJsonFields) {
  const auto l = ledger(400, 0.05, 0.01);
  const auto j = nlohmann::json::parse(budget_report_json(compose_advanced(l), l));
  EXPECT_EQ(j["method"], "advanced");
  EXPECT_EQ(j["query_count"], 400);
  EXPECT_DOUBLE_EQ(j["eps0"].get<double>(), 0.05);
  EXPECT_DOUBLE_EQ(j["eps1"].get<double>(), 0.01);
  EXPECT_EQ(j["c"], 32);
  EXPECT_NEAR(j["eps_total"].get<double>(), compose_advanced(l).eps_total, 1e-12);
}
