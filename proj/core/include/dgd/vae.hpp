#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dgd/autodiff.hpp"
#include "dgd/dataset.hpp"
#include "dgd/network.hpp"
#include "dgd/optim.hpp"
#include "dgd/rng.hpp"

namespace dgd {

inline constexpr double kSigmaFloor = 1e-6;

struct VaeConfig {
  std::size_t latent_dim = 32;
  std::size_t batch_size = 128;
  std::size_t rounds = 500;
  double lr = 0.001;
  LrSchedule::Kind schedule = LrSchedule::Kind::linear;
  double holdout_fraction = 0.1;
  /// Train on per-feature standardized data and fold the affine maps into the
  /// first encoder and last decoder layers afterwards. Needs a linear decoder output.
  bool standardize = false;
  std::uint64_t seed = 1;

  void validate() const;
  LrSchedule lr_schedule() const { return {schedule, lr, rounds}; }
};

/// Encoder emits [mu | log sigma^2] (2c outputs); decoder maps c -> data dim.
struct Vae {
  ParamSet encoder;
  ParamSet decoder;

  std::size_t latent_dim() const noexcept { return decoder.architecture().input_dim(); }
};

/// Throws ConfigError unless the two architectures form a VAE over `data_dim`.
void check_vae_architectures(const Architecture& encoder, const Architecture& decoder, std::size_t data_dim);

/// Closed-form KL(N(mu, sigma^2) || N(0, I)) = -1/2 sum(1 + ln sigma^2 - mu^2 - sigma^2).
double kl_divergence(std::span<const double> mu, std::span<const double> sigma);

struct ElboTerms {
  ad::Var total;
  ad::Var reconstruction;  // mean over the batch of the summed squared error
  ad::Var kl;              // mean over the batch
};

/// Negative ELBO of a batch with reparameterised codes e = mu + sigma * zeta.
/// `zeta` is [n, c] standard-normal noise supplied by the caller.
ElboTerms vae_loss(const BoundNet& encoder, const BoundNet& decoder, ad::Var batch, const Tensor& zeta);

struct VaeLog {
  std::vector<double> round_loss;
  double holdout_loss_start = 0.0;
  double holdout_loss_end = 0.0;
};

Vae train_vae(const LabeledDataset& synthetic, const Architecture& encoder_architecture,
              const Architecture& decoder_architecture, const VaeConfig& cfg, VaeLog* log = nullptr);

/// Mean squared error per element when decoding the posterior means.
double reconstruction_mse(const Vae& vae, const Tensor& batch);

struct LatentCode {
  std::vector<double> mu;
  std::vector<double> sigma;  // floored at kSigmaFloor
  std::vector<double> sample;
};

struct Posterior {
  Tensor mu;     // [n, c]
  Tensor sigma;  // [n, c], floored
};

Posterior posterior(const ParamSet& encoder, const Tensor& batch);
LatentCode encode(const ParamSet& encoder, std::span<const double> x, std::uint64_t seed);

enum class Direction { tangent, normal };

/// Code perturbed by r * unit(sigma * zeta) (tangent) or r * unit(zeta / sigma) (normal).
/// With dp_scale > 0 the perturbed code is clamped to [-1, 1] and Laplace(dp_scale)
/// noise is added to every coordinate.
std::vector<double> perturb_code(const LatentCode& code, Direction direction, double radius, double dp_scale,
                                 std::uint64_t seed);

/// Just the perturbation r * unit(...), without the code or privacy noise.
std::vector<double> perturbation(std::span<const double> sigma, Direction direction, double radius, Rng& rng);

struct SyntheticTriple {
  std::vector<double> x_hat;
  std::vector<double> x_tan;
  std::vector<double> x_norm;
};

/// Triples stored column-wise: row j of each matrix belongs to example j.
struct TripleSet {
  Tensor hat;
  Tensor tan;
  Tensor norm;

  std::size_t size() const noexcept { return hat.rows(); }
  SyntheticTriple at(std::size_t j) const;
  void validate() const;
};

/// One triple per row of `unlabeled`; example j uses substreams of derive_seed(seed, j).
TripleSet build_triples(const Vae& vae, const LabeledDataset& unlabeled, double radius, double dp_scale,
                        std::uint64_t seed, std::size_t jobs = 1);

}  // namespace dgd
