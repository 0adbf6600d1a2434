#include "dgd/generator.hpp"

#include <algorithm>
#include <cmath>

#include "dgd/errors.hpp"
#include "dgd/rng.hpp"

namespace dgd {

void GeneratorConfig::validate() const {
  if (latent_dim < 1) throw ConfigError("generator latent dimension must be at least 1");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("generator alpha and beta must be non-negative");
  if (batch_size < 1) throw ConfigError("generator batch size must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("generator learning rate must be non-negative");
}

namespace {

Tensor standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor z(Shape{rows, cols});
  for (double& v : z.data()) v = rng.normal();
  return z;
}

}  // namespace

GeneratorLossTerms generator_loss(const ParamSet& discriminator, ad::Var batch, const GeneratorConfig& cfg) {
  ad::Graph& g = batch.graph();
  GeneratorLossTerms t;
  t.discriminator = bind(g, discriminator, Trainable::no);
  NetVars out = apply(t.discriminator, batch);
  if (!discriminator.architecture().ends_with_softmax()) {
    throw ConfigError("the discriminator must be a softmax classifier");
  }
  const auto pseudo = argmax_rows(out.output.value());
  t.cross_entropy = ad::cross_entropy(out.logits, pseudo);

  if (cfg.balance == BalanceForm::batch_mean) {
    // The 1e-12 offset keeps ln finite if a class probability underflows for the whole batch.
    ad::Var pbar = ad::mean_rows(out.output);
    t.balance = ad::sum(ad::mul(pbar, ad::log(ad::add_scalar(pbar, 1e-12))));
  } else {
    t.balance = ad::scale(ad::mean(ad::entropy_rows(out.logits)), -1.0);
  }

  t.activation = ad::mean(ad::l1_norm_rows(out.features));
  const double act_weight = cfg.reward_activation ? -cfg.beta : cfg.beta;
  t.total = ad::add(ad::add(t.cross_entropy, ad::scale(t.balance, cfg.alpha)), ad::scale(t.activation, act_weight));
  return t;
}

ParamSet train_generator(const ParamSet& discriminator, const Architecture& generator_architecture,
                         const GeneratorConfig& cfg, GeneratorLog* log) {
  cfg.validate();
  if (generator_architecture.input_dim() != cfg.latent_dim) {
    throw ConfigError("generator input size must equal the latent dimension");
  }
  if (generator_architecture.output_dim() != discriminator.architecture().input_dim()) {
    throw ConfigError("generator output size must equal the discriminator input size");
  }
  ParamSet generator = xavier_init(generator_architecture, derive_seed(cfg.seed, 21));
  Adam adam;
  const LrSchedule schedule = cfg.lr_schedule();
  Rng noise(derive_seed(cfg.seed, 22));
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    try {
      ad::Graph graph;
      BoundNet bound = bind(graph, generator, Trainable::yes);
      ad::Var z = graph.constant(standard_normal(cfg.batch_size, cfg.latent_dim, noise));
      NetVars x = apply(bound, z);
      GeneratorLossTerms terms = generator_loss(discriminator, x.output, cfg);
      graph.backward(terms.total);
      adam.step(generator, collect_gradients(graph, bound), schedule.at(round));
      if (log) log->round_loss.push_back(terms.total.value().item());
    } catch (const NumericError& e) {
      throw TrainingError("generator", round, e.what());
    }
  }
  return generator;
}

LabeledDataset synthesize_dataset(const ParamSet& generator, std::size_t count, std::uint64_t seed,
                                  std::size_t class_count) {
  if (count < 1) throw ConfigError("synthesize needs count >= 1");
  Rng rng(derive_seed(seed, 23));
  const Tensor z = standard_normal(count, generator.architecture().input_dim(), rng);
  return LabeledDataset(quantize_f32(forward(generator, z).output), std::nullopt, class_count);
}

GeneratorDiagnostics inspect_samples(const ParamSet& discriminator, const Tensor& samples) {
  GeneratorDiagnostics d;
  const Tensor probs = forward(discriminator, samples).output;
  d.class_histogram.assign(probs.cols(), 0);
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    auto row = probs.row(r);
    const auto it = std::max_element(row.begin(), row.end());
    d.mean_max_probability += *it;
    ++d.class_histogram[static_cast<std::size_t>(it - row.begin())];
  }
  const double n = static_cast<double>(probs.rows());
  d.mean_max_probability /= n;
  for (std::size_t c : d.class_histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    d.class_entropy -= p * std::log(p);
  }
  return d;
}

}  // namespace dgd
