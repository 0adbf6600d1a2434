#include "dgd/accountant.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "dgd/errors.hpp"

namespace dgd {

void PrivacyLedger::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (query_count > 0 && !(eps0 > 0.0 && std::isfinite(eps0))) {
    throw ConfigError("per-query eps0 must be positive and finite when queries were made");
  }
  if (!(eps1 >= 0.0) || !std::isfinite(eps1)) throw ConfigError("eps1 must be finite and non-negative");
}

std::string method_name(CompositionMethod m) {
  switch (m) {
    case CompositionMethod::basic:
      return "basic";
    case CompositionMethod::advanced:
      return "advanced";
    case CompositionMethod::moments_independent:
      return "moments_independent";
  }
  return "?";
}

BudgetReport compose_basic(const PrivacyLedger& ledger) {
  ledger.validate();
  const double disc = ledger.query_count == 0 ? 0.0 : static_cast<double>(ledger.query_count) * ledger.eps0;
  return {CompositionMethod::basic, disc + ledger.eps1, ledger.delta, disc, ledger.eps1, std::nullopt};
}

BudgetReport compose_advanced(const PrivacyLedger& ledger) {
  ledger.validate();
  double disc = 0.0;
  if (ledger.query_count > 0) {
    const double q = static_cast<double>(ledger.query_count);
    disc = q * ledger.eps0 * ledger.eps0 + ledger.eps0 * std::sqrt(-2.0 * q * std::log(ledger.delta));
  }
  return {CompositionMethod::advanced, disc + ledger.eps1, ledger.delta, disc, ledger.eps1, std::nullopt};
}

BudgetReport compose_moments_independent(const PrivacyLedger& ledger, int lambda_max) {
  ledger.validate();
  if (lambda_max < 1) throw ConfigError("lambda_max must be at least 1");
  BudgetReport r{CompositionMethod::moments_independent, ledger.eps1, ledger.delta, 0.0, ledger.eps1, std::nullopt};
  if (ledger.query_count == 0) return r;
  const double q = static_cast<double>(ledger.query_count);
  const double log_delta = std::log(ledger.delta);
  double best = std::numeric_limits<double>::infinity();
  int best_lambda = 1;
  for (int lambda = 1; lambda <= lambda_max; ++lambda) {
    const double l = static_cast<double>(lambda);
    const double moment = q * 2.0 * ledger.eps0 * ledger.eps0 * l * (l + 1.0);
    const double eps = (moment - log_delta) / l;
    if (eps < best) {
      best = eps;
      best_lambda = lambda;
    }
  }
  r.eps_discriminative = best;
  r.eps_total = best + ledger.eps1;
  r.minimizing_lambda = best_lambda;
  return r;
}

BudgetReport report_min(const PrivacyLedger& ledger) {
  BudgetReport best = compose_basic(ledger);
  for (const BudgetReport& r : {compose_advanced(ledger), compose_moments_independent(ledger)}) {
    if (r.eps_total < best.eps_total) best = r;
  }
  return best;
}

double generative_noise_scale(double eps1, std::size_t latent_dim) {
  if (!(eps1 > 0.0)) throw ConfigError("eps1 must be positive");
  if (latent_dim < 1) throw ConfigError("latent dimension must be at least 1");
  return 2.0 * static_cast<double>(latent_dim) / eps1;
}

double generative_epsilon(double noise_scale, std::size_t latent_dim) {
  if (!(noise_scale > 0.0)) throw ConfigError("latent noise scale must be positive");
  if (latent_dim < 1) throw ConfigError("latent dimension must be at least 1");
  return 2.0 * static_cast<double>(latent_dim) / noise_scale;
}

std::string budget_report_json(const BudgetReport& report, const PrivacyLedger& ledger) {
  nlohmann::ordered_json j;
  j["method"] = method_name(report.method);
  j["eps_total"] = report.eps_total;
  j["delta"] = report.delta;
  j["eps0"] = ledger.eps0;
  j["query_count"] = ledger.query_count;
  j["eps1"] = ledger.eps1;
  j["c"] = ledger.latent_dim;
  j["eps_discriminative"] = report.eps_discriminative;
  if (report.minimizing_lambda) j["minimizing_lambda"] = *report.minimizing_lambda;
  return j.dump(2) + "\n";
}

void write_budget_report(const BudgetReport& report, const PrivacyLedger& ledger, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << budget_report_json(report, ledger);
}

}  // namespace dgd
