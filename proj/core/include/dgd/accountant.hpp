#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

namespace dgd {

/// Everything the budget computation needs about one pipeline run.
struct PrivacyLedger {
  double eps0 = 0.05;            // per-query budget of the Laplace aggregation
  std::size_t query_count = 0;   // mechanism invocations on the teacher ensemble
  double delta = 1e-5;
  double eps1 = 0.0;             // generative (latent-noise) stream
  std::size_t latent_dim = 32;

  void validate() const;
  /// Serialised appender for query counts.
  void record_queries(std::size_t count) { query_count += count; }
};

enum class CompositionMethod { basic, advanced, moments_independent };
std::string method_name(CompositionMethod m);

struct BudgetReport {
  CompositionMethod method = CompositionMethod::basic;
  double eps_total = 0.0;
  double delta = 0.0;
  double eps_discriminative = 0.0;
  double eps_generative = 0.0;
  std::optional<int> minimizing_lambda;
};

/// eps = q * eps0 + eps1.
BudgetReport compose_basic(const PrivacyLedger& ledger);
/// eps = q * eps0^2 + eps0 * sqrt(-2 q ln delta) + eps1.
BudgetReport compose_advanced(const PrivacyLedger& ledger);
/// Data-independent moments bound alpha(l) <= 2 eps0^2 l (l + 1) per query, composed
/// additively and converted with the tail bound, minimised over integer l in [1, lambda_max].
BudgetReport compose_moments_independent(const PrivacyLedger& ledger, int lambda_max = 64);
/// Smallest of the three methods.
BudgetReport report_min(const PrivacyLedger& ledger);

/// Laplace scale 2c / eps1 of the latent-code noise that yields eps1-DP
/// for codes clamped to [-1, 1]^c.
double generative_noise_scale(double eps1, std::size_t latent_dim);
/// Inverse of generative_noise_scale: eps1 = 2c / scale.
double generative_epsilon(double noise_scale, std::size_t latent_dim);

/// JSON object with method, eps_total, delta, eps0, query_count, eps1, c and
/// minimizing_lambda (when applicable).
std::string budget_report_json(const BudgetReport& report, const PrivacyLedger& ledger);
void write_budget_report(const BudgetReport& report, const PrivacyLedger& ledger, const std::filesystem::path& path);

}  // namespace dgd
