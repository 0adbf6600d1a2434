#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgd/accountant.hpp"
#include "dgd/aggregation.hpp"
#include "dgd/config.hpp"
#include "dgd/discriminative.hpp"
#include "dgd/generator.hpp"
#include "dgd/student.hpp"
#include "dgd/vae.hpp"

namespace dgd {

enum class DataKind { mixture, digitgrid };

/// Every knob of one pipeline run. Defaults follow the reference protocol
/// (batch 128, Adam, Xavier init, Laplace scale 40, c = 32, alpha = 5, beta = 0.1)
/// at desk scale.
struct RunConfig {
  std::uint64_t seed = 1;

  DataKind data = DataKind::mixture;
  std::size_t classes = 10;
  std::size_t dim = 16;  // mixture only; digit grids are 64
  std::size_t train_per_class = 200;
  std::size_t test_per_class = 100;
  double spread = 0.2;
  double pixel_noise = 0.1;

  std::string baseline_arch;
  std::string teacher_arch;
  std::string student_arch;
  std::string generator_arch;
  std::string encoder_arch;
  std::string decoder_arch;

  TrainConfig baseline;
  TrainConfig teachers;
  std::size_t teacher_count = 20;
  GeneratorConfig generator;
  std::size_t synthetic_count = 0;  // 0: as many as private training examples
  VaeConfig vae;
  double latent_noise_scale = 0.0;  // Laplace scale on clamped latent codes; 0 disables
  AggregationConfig aggregation;
  std::size_t query_count = 100;
  double radius = 0.5;
  StudentLossWeights weights;
  StudentConfig student;

  bool accounting = true;
  double delta = 1e-5;
  double eps1 = 0.01;  // used when the latent noise scale is "auto" (2c / eps1)

  std::size_t attack_steps = 200;
  double attack_lr = 0.1;
  double attack_l2 = 0.01;

  /// Parses and validates; unknown keys are a ConfigError.
  static RunConfig from(const Config& config);
  /// Fully resolved key/value text that parses back to the same RunConfig.
  std::string to_text() const;
  void validate() const;

  std::size_t data_dim() const noexcept { return data == DataKind::digitgrid ? 64 : dim; }
  std::size_t private_train_size() const noexcept { return classes * train_per_class; }
  /// eps1 implied by the configured latent noise (0 when disabled).
  double implied_eps1() const;
  PrivacyLedger ledger(std::size_t queries) const;
};

struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.txt"; }
  std::filesystem::path private_train() const { return root / "data" / "private_train.dgds"; }
  std::filesystem::path private_test() const { return root / "data" / "private_test.dgds"; }
  std::filesystem::path baseline() const { return root / "baseline" / "baseline.dgdw"; }
  std::filesystem::path baseline_summary() const { return root / "baseline" / "summary.json"; }
  std::filesystem::path teacher_dir() const { return root / "teachers"; }
  std::filesystem::path teacher(std::size_t i) const;
  std::filesystem::path teacher_manifest() const { return root / "teachers" / "manifest.json"; }
  std::filesystem::path generator() const { return root / "generator" / "generator.dgdw"; }
  std::filesystem::path generator_summary() const { return root / "generator" / "summary.json"; }
  std::filesystem::path synthetic() const { return root / "synthetic" / "synthetic.dgds"; }
  std::filesystem::path encoder() const { return root / "vae" / "encoder.dgdw"; }
  std::filesystem::path decoder() const { return root / "vae" / "decoder.dgdw"; }
  std::filesystem::path vae_summary() const { return root / "vae" / "summary.json"; }
  std::filesystem::path queries() const { return root / "query" / "queries.dgds"; }
  std::filesystem::path unlabeled() const { return root / "query" / "unlabeled.dgds"; }
  std::filesystem::path labels() const { return root / "query" / "labels.csv"; }
  std::filesystem::path query_ledger() const { return root / "query" / "ledger.json"; }
  std::filesystem::path triples_hat() const { return root / "triples" / "hat.dgds"; }
  std::filesystem::path triples_tan() const { return root / "triples" / "tan.dgds"; }
  std::filesystem::path triples_norm() const { return root / "triples" / "norm.dgds"; }
  std::filesystem::path triples_manifest() const { return root / "triples" / "manifest.json"; }
  std::filesystem::path student() const { return root / "student" / "student.dgdw"; }
  std::filesystem::path student_metrics() const { return root / "student" / "metrics.csv"; }
  std::filesystem::path budget() const { return root / "budget.json"; }
  std::filesystem::path attack() const { return root / "attack.csv"; }
};

struct AttackSummary {
  double baseline_quality = 0.0;
  double student_quality = 0.0;
};

/// Runs the stages of one experiment inside a run directory. Each stage reads
/// its inputs from the artifacts of earlier stages and writes its own, so any
/// stage can be rerun in isolation.
class Pipeline {
 public:
  Pipeline(RunConfig config, std::filesystem::path run_dir, std::size_t jobs = 1, bool resume = false);

  void set_log(std::ostream* log) { log_ = log; }
  const RunPaths& paths() const noexcept { return paths_; }
  const RunConfig& config() const noexcept { return config_; }

  void gen_data();
  void train_baseline();
  void train_teachers();
  void train_generator();
  void synthesize();
  void train_vae();
  void query();
  void build_triples();
  void train_student();
  BudgetReport budget();
  AttackSummary attack();

  /// All stages in order, then the budget report.
  void run_all();

  Architecture architecture(const std::string& text) const { return Architecture::parse(text); }
  TeacherEnsemble load_teachers() const;
  Vae load_vae() const;
  ParamSet load_baseline() const;
  ParamSet load_student() const;
  /// Class templates for inversion scoring: glyphs for digit grids, class means of the test set otherwise.
  Tensor attack_templates() const;

 private:
  void stage(const std::string& name, const std::vector<std::filesystem::path>& outputs,
             const std::function<void()>& body);
  void note(const std::string& message) const;

  RunConfig config_;
  RunPaths paths_;
  std::size_t jobs_;
  bool resume_;
  std::ostream* log_ = nullptr;
};

/// Default output root: $DGD_OUT when set, otherwise "runs".
std::filesystem::path default_output_root();

}  // namespace dgd
