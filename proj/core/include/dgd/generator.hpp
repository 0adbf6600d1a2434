#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgd/autodiff.hpp"
#include "dgd/dataset.hpp"
#include "dgd/network.hpp"
#include "dgd/optim.hpp"

namespace dgd {

/// How the class-balance term is applied.
enum class BalanceForm {
  batch_mean,  // sum_k pbar_k ln pbar_k over the batch-mean prediction (minimising balances classes)
  per_sample,  // mean over samples of sum_k p_k ln p_k, as the loss is written per example
};

struct GeneratorConfig {
  std::size_t latent_dim = 16;
  double alpha = 5.0;
  double beta = 0.1;
  std::size_t batch_size = 128;
  std::size_t rounds = 200;
  double lr = 0.2;
  LrSchedule::Kind schedule = LrSchedule::Kind::step;  // x0.1 every 40% of rounds
  BalanceForm balance = BalanceForm::batch_mean;
  /// When true the activation term is -beta * |features|_1 so minimising raises
  /// activations; false uses +beta.
  bool reward_activation = true;
  std::uint64_t seed = 1;

  void validate() const;
  LrSchedule lr_schedule() const { return {schedule, lr, rounds, 0.4, 0.1}; }
};

struct GeneratorLossTerms {
  ad::Var total;
  ad::Var cross_entropy;  // against the discriminator's own argmax
  ad::Var balance;        // before the alpha factor
  ad::Var activation;     // mean L1 norm of discriminator features, before the beta factor
  BoundNet discriminator;  // frozen constants; asking for their gradient is a GraphError
};

/// Data-free loss of a generated batch under a frozen discriminator.
GeneratorLossTerms generator_loss(const ParamSet& discriminator, ad::Var batch, const GeneratorConfig& cfg);

struct GeneratorLog {
  std::vector<double> round_loss;
};

ParamSet train_generator(const ParamSet& discriminator, const Architecture& generator_architecture,
                         const GeneratorConfig& cfg, GeneratorLog* log = nullptr);

/// `count` samples from i.i.d. standard-normal codes, rounded to float32. Unlabeled.
LabeledDataset synthesize_dataset(const ParamSet& generator, std::size_t count, std::uint64_t seed,
                                  std::size_t class_count);

struct GeneratorDiagnostics {
  double mean_max_probability = 0.0;
  double class_entropy = 0.0;  // entropy of the discriminator's argmax histogram
  std::vector<std::size_t> class_histogram;
};

GeneratorDiagnostics inspect_samples(const ParamSet& discriminator, const Tensor& samples);

}  // namespace dgd
