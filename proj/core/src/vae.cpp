#include "dgd/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgd/errors.hpp"
#include "dgd/parallel.hpp"
#include "dgd/rng.hpp"
#include "dgd/training.hpp"

namespace dgd {

void VaeConfig::validate() const {
  if (latent_dim < 1) throw ConfigError("VAE latent dimension must be at least 1");
  if (batch_size < 1) throw ConfigError("VAE batch size must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("VAE learning rate must be non-negative");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("VAE holdout must lie in [0, 1)");
}

void check_vae_architectures(const Architecture& encoder, const Architecture& decoder, std::size_t data_dim) {
  if (encoder.input_dim() != data_dim) throw ConfigError("encoder input size must equal the data dimension");
  if (decoder.output_dim() != data_dim) throw ConfigError("decoder output size must equal the data dimension");
  if (encoder.output_dim() != 2 * decoder.input_dim()) {
    throw ConfigError("encoder must emit 2c values (mean and log-variance) for a decoder with c inputs");
  }
  if (encoder.ends_with_softmax()) throw ConfigError("encoder must not end in a softmax");
  if (encoder.layers().back().kind != LayerKind::dense) throw ConfigError("encoder must end in a dense layer");
}

double kl_divergence(std::span<const double> mu, std::span<const double> sigma) {
  if (mu.size() != sigma.size()) throw ShapeError("kl_divergence: mu and sigma differ in length");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw GraphError("kl_divergence: sigma must be positive");
    const double s2 = sigma[i] * sigma[i];
    kl += 1.0 + std::log(s2) - mu[i] * mu[i] - s2;
  }
  return -0.5 * kl;
}

ElboTerms vae_loss(const BoundNet& encoder, const BoundNet& decoder, ad::Var batch, const Tensor& zeta) {
  const std::size_t c = decoder.net->architecture().input_dim();
  ad::Graph& g = batch.graph();
  ad::Var stats = apply(encoder, batch).output;
  if (zeta.shape() != Shape{batch.value().rows(), c}) throw ShapeError("vae_loss: zeta must be [n, c]");
  ad::Var mu = ad::slice_cols(stats, 0, c);
  ad::Var logvar = ad::slice_cols(stats, c, 2 * c);
  ad::Var sigma = ad::exp(ad::scale(logvar, 0.5));
  ad::Var code = ad::add(mu, ad::mul(sigma, g.constant(zeta)));
  ad::Var recon = apply(decoder, code).output;

  ElboTerms t;
  t.reconstruction = ad::mean(ad::squared_norm_rows(ad::sub(recon, batch)));
  ad::Var inner = ad::add_scalar(ad::sub(ad::add(ad::square(mu), ad::exp(logvar)), logvar), -1.0);
  t.kl = ad::scale(ad::mean(ad::sum_cols(inner)), 0.5);
  t.total = ad::add(t.reconstruction, t.kl);
  return t;
}

namespace {

Tensor normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor z(Shape{rows, cols});
  for (double& v : z.data()) v = rng.normal();
  return z;
}

double holdout_loss(const Vae& vae, const Tensor& x, const Tensor& zeta) {
  ad::Graph g;
  BoundNet enc = bind(g, vae.encoder, Trainable::no);
  BoundNet dec = bind(g, vae.decoder, Trainable::no);
  return vae_loss(enc, dec, g.constant(x), zeta).total.value().item();
}

}  // namespace

Vae train_vae(const LabeledDataset& synthetic, const Architecture& encoder_architecture,
              const Architecture& decoder_architecture, const VaeConfig& cfg, VaeLog* log) {
  cfg.validate();
  if (synthetic.size() == 0) throw PreconditionError("VAE training needs a non-empty dataset");
  check_vae_architectures(encoder_architecture, decoder_architecture, synthetic.dim());
  if (decoder_architecture.input_dim() != cfg.latent_dim) throw ConfigError("decoder input size must equal c");

  if (cfg.standardize && decoder_architecture.layers().back().kind != LayerKind::dense) {
    throw ConfigError("VAE standardization needs a decoder ending in a dense layer");
  }

  Vae vae{xavier_init(encoder_architecture, derive_seed(cfg.seed, 31)),
          xavier_init(decoder_architecture, derive_seed(cfg.seed, 32))};

  const std::size_t dim = synthetic.dim();
  std::vector<double> shift(dim, 0.0), spread(dim, 1.0);
  Tensor data = synthetic.features();
  if (cfg.standardize) {
    const double n = static_cast<double>(data.rows());
    for (std::size_t j = 0; j < dim; ++j) {
      double m = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < data.rows(); ++i) m += data.at(i, j);
      m /= n;
      for (std::size_t i = 0; i < data.rows(); ++i) sq += (data.at(i, j) - m) * (data.at(i, j) - m);
      shift[j] = m;
      spread[j] = std::max(std::sqrt(sq / n), 1e-3);
      for (std::size_t i = 0; i < data.rows(); ++i) data.at(i, j) = (data.at(i, j) - m) / spread[j];
    }
  }

  std::size_t held = static_cast<std::size_t>(cfg.holdout_fraction * static_cast<double>(synthetic.size()));
  if (held >= synthetic.size()) held = 0;
  std::vector<std::size_t> order(synthetic.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::span<const std::size_t> all(order);
  const Tensor train = data.gather_rows(all.subspan(held));
  const Tensor holdout = held > 0 ? data.gather_rows(all.first(held)) : train;
  Rng holdout_rng(derive_seed(cfg.seed, 33));
  const Tensor holdout_zeta = normal_matrix(holdout.rows(), cfg.latent_dim, holdout_rng);
  if (log) log->holdout_loss_start = holdout_loss(vae, holdout, holdout_zeta);

  Adam enc_opt;
  Adam dec_opt;
  const LrSchedule schedule = cfg.lr_schedule();
  BatchSampler sampler(train.rows(), cfg.batch_size, derive_seed(cfg.seed, 34));
  Rng noise(derive_seed(cfg.seed, 35));
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    const auto idx = sampler.next();
    try {
      ad::Graph graph;
      BoundNet enc = bind(graph, vae.encoder, Trainable::yes);
      BoundNet dec = bind(graph, vae.decoder, Trainable::yes);
      ElboTerms t = vae_loss(enc, dec, graph.constant(train.gather_rows(idx)),
                             normal_matrix(idx.size(), cfg.latent_dim, noise));
      graph.backward(t.total);
      const double lr = schedule.at(round);
      enc_opt.step(vae.encoder, collect_gradients(graph, enc), lr);
      dec_opt.step(vae.decoder, collect_gradients(graph, dec), lr);
      if (log) log->round_loss.push_back(t.total.value().item());
    } catch (const NumericError& e) {
      throw TrainingError("vae", round, e.what());
    }
  }
  if (log) log->holdout_loss_end = holdout_loss(vae, holdout, holdout_zeta);
  if (cfg.standardize) {
    // x_std = (x - shift) / spread on the way in, x = x_std * spread + shift on the way out.
    Tensor& w_in = vae.encoder.at("dense0.weight");
    Tensor& b_in = vae.encoder.at("dense0.bias");
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < w_in.cols(); ++k) {
        w_in.at(i, k) /= spread[i];
        b_in[k] -= shift[i] * w_in.at(i, k);
      }
    }
    const std::string last = "dense" + std::to_string(decoder_architecture.dense_count() - 1);
    Tensor& w_out = vae.decoder.at(last + ".weight");
    Tensor& b_out = vae.decoder.at(last + ".bias");
    for (std::size_t k = 0; k < dim; ++k) {
      for (std::size_t i = 0; i < w_out.rows(); ++i) w_out.at(i, k) *= spread[k];
      b_out[k] = b_out[k] * spread[k] + shift[k];
    }
  }
  return vae;
}

Posterior posterior(const ParamSet& encoder, const Tensor& batch) {
  const Tensor stats = forward(encoder, batch).output;
  const std::size_t c = stats.cols() / 2;
  Posterior p{Tensor(Shape{stats.rows(), c}), Tensor(Shape{stats.rows(), c})};
  for (std::size_t r = 0; r < stats.rows(); ++r) {
    for (std::size_t j = 0; j < c; ++j) {
      p.mu.at(r, j) = stats.at(r, j);
      p.sigma.at(r, j) = std::max(kSigmaFloor, std::exp(0.5 * stats.at(r, c + j)));
    }
  }
  return p;
}

double reconstruction_mse(const Vae& vae, const Tensor& batch) {
  const Tensor recon = forward(vae.decoder, posterior(vae.encoder, batch).mu).output;
  double total = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) total += (recon[i] - batch[i]) * (recon[i] - batch[i]);
  return total / static_cast<double>(recon.size());
}

namespace {

LatentCode sample_code(std::span<const double> mu, std::span<const double> sigma, Rng& rng) {
  LatentCode code{{mu.begin(), mu.end()}, {sigma.begin(), sigma.end()}, std::vector<double>(mu.size())};
  for (std::size_t j = 0; j < mu.size(); ++j) code.sample[j] = mu[j] + sigma[j] * rng.normal();
  return code;
}

void add_privacy_noise(std::vector<double>& code, double dp_scale, Rng& rng) {
  if (dp_scale <= 0.0) return;
  for (double& v : code) v = std::clamp(v, -1.0, 1.0) + rng.laplace(dp_scale);
}

}  // namespace

LatentCode encode(const ParamSet& encoder, std::span<const double> x, std::uint64_t seed) {
  const Tensor row = Tensor::matrix(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const Posterior p = posterior(encoder, row);
  Rng rng(seed);
  return sample_code(p.mu.row(0), p.sigma.row(0), rng);
}

std::vector<double> perturbation(std::span<const double> sigma, Direction direction, double radius, Rng& rng) {
  std::vector<double> n(sigma.size());
  double norm = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    const double z = rng.normal();
    const double s = std::max(kSigmaFloor, sigma[j]);
    n[j] = direction == Direction::tangent ? s * z : z / s;
    norm += n[j] * n[j];
  }
  norm = std::sqrt(norm);
  for (double& v : n) v = norm > 0.0 ? radius * v / norm : 0.0;
  return n;
}

std::vector<double> perturb_code(const LatentCode& code, Direction direction, double radius, double dp_scale,
                                 std::uint64_t seed) {
  if (!(radius >= 0.0)) throw ConfigError("perturbation radius must be non-negative");
  if (!(dp_scale >= 0.0)) throw ConfigError("latent noise scale must be non-negative");
  Rng rng(seed);
  std::vector<double> out = code.sample;
  const auto n = perturbation(code.sigma, direction, radius, rng);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += n[j];
  add_privacy_noise(out, dp_scale, rng);
  return out;
}

SyntheticTriple TripleSet::at(std::size_t j) const {
  auto copy = [j](const Tensor& t) {
    auto r = t.row(j);
    return std::vector<double>(r.begin(), r.end());
  };
  return {copy(hat), copy(tan), copy(norm)};
}

void TripleSet::validate() const {
  if (hat.shape() != tan.shape() || hat.shape() != norm.shape()) {
    throw ShapeError("triple members differ in shape");
  }
  require_finite(hat, "triples");
  require_finite(tan, "triples");
  require_finite(norm, "triples");
}

TripleSet build_triples(const Vae& vae, const LabeledDataset& unlabeled, double radius, double dp_scale,
                        std::uint64_t seed, std::size_t jobs) {
  if (!(radius >= 0.0)) throw ConfigError("perturbation radius must be non-negative");
  if (!(dp_scale >= 0.0)) throw ConfigError("latent noise scale must be non-negative");
  const std::size_t n = unlabeled.size();
  const std::size_t c = vae.latent_dim();
  if (n == 0) return {Tensor(Shape{0, unlabeled.dim()}), Tensor(Shape{0, unlabeled.dim()}), Tensor(Shape{0, unlabeled.dim()})};
  const Posterior post = posterior(vae.encoder, unlabeled.features());
  Tensor codes_hat(Shape{n, c});
  Tensor codes_tan(Shape{n, c});
  Tensor codes_norm(Shape{n, c});
  parallel_for(n, jobs, [&](std::size_t j) {
    const std::uint64_t base = derive_seed(seed, j);
    Rng sample_rng(derive_seed(base, 0));
    LatentCode code = sample_code(post.mu.row(j), post.sigma.row(j), sample_rng);
    const auto tan = perturb_code(code, Direction::tangent, radius, dp_scale, derive_seed(base, 1));
    const auto nrm = perturb_code(code, Direction::normal, radius, dp_scale, derive_seed(base, 2));
    Rng dp_rng(derive_seed(base, 3));
    add_privacy_noise(code.sample, dp_scale, dp_rng);
    std::copy(code.sample.begin(), code.sample.end(), codes_hat.row(j).begin());
    std::copy(tan.begin(), tan.end(), codes_tan.row(j).begin());
    std::copy(nrm.begin(), nrm.end(), codes_norm.row(j).begin());
  });
  TripleSet out{quantize_f32(forward(vae.decoder, codes_hat).output),
                quantize_f32(forward(vae.decoder, codes_tan).output),
                quantize_f32(forward(vae.decoder, codes_norm).output)};
  out.validate();
  return out;
}

}  // namespace dgd
