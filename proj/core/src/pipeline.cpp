#include "dgd/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dgd/attack.hpp"
#include "dgd/checkpoint.hpp"
#include "dgd/dataset.hpp"
#include "dgd/errors.hpp"
#include "dgd/rng.hpp"
#include "json.hpp"

namespace dgd {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Stream ids for per-stage seeds.
enum : std::uint64_t {
  kDataSeed = 1,
  kBaselineSeed,
  kTeacherSeed,
  kPartitionSeed,
  kGeneratorSeed,
  kSynthSeed,
  kVaeSeed,
  kAggregationSeed,
  kTripleSeed,
  kStudentSeed,
  kAttackSeed,
  kSplitSeed,
};

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string data_kind_name(DataKind k) { return k == DataKind::digitgrid ? "digitgrid" : "mixture"; }

DataKind parse_data_kind(const std::string& s) {
  if (s == "mixture") return DataKind::mixture;
  if (s == "digitgrid") return DataKind::digitgrid;
  throw ConfigError("unknown data.kind '" + s + "' (expected mixture or digitgrid)");
}

std::string balance_name(BalanceForm b) { return b == BalanceForm::per_sample ? "per_sample" : "batch_mean"; }

BalanceForm parse_balance(const std::string& s) {
  if (s == "batch_mean") return BalanceForm::batch_mean;
  if (s == "per_sample") return BalanceForm::per_sample;
  throw ConfigError("unknown generator.balance '" + s + "' (expected batch_mean or per_sample)");
}

void read_train(const Config& c, const std::string& prefix, TrainConfig& t) {
  t.rounds = c.get_size(prefix + ".rounds", t.rounds);
  t.batch_size = c.get_size(prefix + ".batch", t.batch_size);
  try {
    t.optimizer = parse_optimizer(c.get_string(prefix + ".optimizer", optimizer_name(t.optimizer)));
    t.schedule = LrSchedule::parse_kind(c.get_string(prefix + ".schedule", LrSchedule::kind_name(t.schedule)));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(prefix + ": " + e.what());
  }
  t.lr = c.get_double(prefix + ".lr", t.lr);
  t.validation_fraction = c.get_double(prefix + ".validation_fraction", t.validation_fraction);
}

void write_train(std::ostream& out, const std::string& prefix, const TrainConfig& t) {
  out << prefix << ".rounds = " << t.rounds << '\n'
      << prefix << ".batch = " << t.batch_size << '\n'
      << prefix << ".optimizer = " << optimizer_name(t.optimizer) << '\n'
      << prefix << ".lr = " << num(t.lr) << '\n'
      << prefix << ".schedule = " << LrSchedule::kind_name(t.schedule) << '\n'
      << prefix << ".validation_fraction = " << num(t.validation_fraction) << '\n';
}

std::string classifier_arch(std::size_t in, std::size_t hidden, std::size_t k) {
  return std::to_string(in) + "-dense:" + std::to_string(hidden) + "-relu-dense:" + std::to_string(k) + "-softmax";
}

void write_json(const json& j, const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "': " + e.what(), 0);
  }
}

}  // namespace

RunConfig RunConfig::from(const Config& c) {
  RunConfig r;
  r.seed = c.get_u64("seed", r.seed);

  r.data = parse_data_kind(c.get_string("data.kind", data_kind_name(r.data)));
  r.classes = c.get_size("data.classes", r.classes);
  r.dim = c.get_size("data.dim", r.dim);
  r.train_per_class = c.get_size("data.train_per_class", r.train_per_class);
  r.test_per_class = c.get_size("data.test_per_class", r.test_per_class);
  r.spread = c.get_double("data.spread", r.spread);
  r.pixel_noise = c.get_double("data.pixel_noise", r.pixel_noise);

  // Defaults sized for a single desktop core.
  r.baseline.rounds = 1500;
  r.baseline.lr = 0.01;
  r.teachers.rounds = 600;
  r.teachers.lr = 0.01;
  r.generator.rounds = 1000;
  r.generator.lr = 0.01;
  r.generator.schedule = LrSchedule::Kind::step;
  r.vae.rounds = 1500;
  r.vae.lr = 0.005;
  r.student.rounds = 300;
  r.student.lr = 0.002;
  r.student.log_every = 30;

  read_train(c, "baseline", r.baseline);
  read_train(c, "teachers", r.teachers);
  r.teacher_count = c.get_size("teachers.count", r.teacher_count);

  auto& g = r.generator;
  g.latent_dim = c.get_size("generator.latent_dim", g.latent_dim);
  g.alpha = c.get_double("generator.alpha", g.alpha);
  g.beta = c.get_double("generator.beta", g.beta);
  g.batch_size = c.get_size("generator.batch", g.batch_size);
  g.rounds = c.get_size("generator.rounds", g.rounds);
  g.lr = c.get_double("generator.lr", g.lr);
  g.schedule = LrSchedule::parse_kind(c.get_string("generator.schedule", LrSchedule::kind_name(g.schedule)));
  g.balance = parse_balance(c.get_string("generator.balance", balance_name(g.balance)));
  g.reward_activation = c.get_bool("generator.reward_activation", g.reward_activation);

  r.synthetic_count = c.get_size("synthetic.count", r.synthetic_count);

  auto& v = r.vae;
  v.latent_dim = c.get_size("vae.latent_dim", v.latent_dim);
  v.batch_size = c.get_size("vae.batch", v.batch_size);
  v.rounds = c.get_size("vae.rounds", v.rounds);
  v.lr = c.get_double("vae.lr", v.lr);
  v.schedule = LrSchedule::parse_kind(c.get_string("vae.schedule", LrSchedule::kind_name(v.schedule)));
  v.holdout_fraction = c.get_double("vae.holdout_fraction", v.holdout_fraction);
  v.standardize = c.get_bool("vae.standardize", r.data == DataKind::mixture);

  r.accounting = c.get_bool("privacy.accounting", r.accounting);
  r.delta = c.get_double("privacy.delta", r.delta);
  r.eps1 = c.get_double("privacy.eps1", r.eps1);
  const std::string latent_noise = c.get_string("vae.noise_scale", "0");
  if (latent_noise == "auto") {
    if (!(r.eps1 > 0.0)) throw ConfigError("vae.noise_scale = auto needs privacy.eps1 > 0");
    r.latent_noise_scale = generative_noise_scale(r.eps1, v.latent_dim);
  } else {
    Config single;
    single.set("vae.noise_scale", latent_noise);
    r.latent_noise_scale = single.get_double("vae.noise_scale", 0.0);
  }

  auto& a = r.aggregation;
  a.mechanism = parse_mechanism(c.get_string("aggregation.mechanism", mechanism_name(a.mechanism)));
  a.noise_scale = c.get_double("aggregation.noise_scale", a.noise_scale);
  r.query_count = c.get_size("query.count", r.query_count);
  r.radius = c.get_double("triples.radius", r.radius);

  auto& w = r.weights;
  w.w_sup = c.get_double("student.w_sup", w.w_sup);
  w.w_norm = c.get_double("student.w_norm", w.w_norm);
  w.w_tan = c.get_double("student.w_tan", w.w_tan);
  w.w_ent = c.get_double("student.w_ent", w.w_ent);
  auto& s = r.student;
  s.rounds = c.get_size("student.rounds", s.rounds);
  s.batch_size = c.get_size("student.batch", s.batch_size);
  s.lr = c.get_double("student.lr", s.lr);
  s.schedule = LrSchedule::parse_kind(c.get_string("student.schedule", LrSchedule::kind_name(s.schedule)));
  s.log_every = c.get_size("student.log_every", s.log_every);
  s.literal_entropy_sign = c.get_bool("student.literal_entropy_sign", s.literal_entropy_sign);

  r.attack_steps = c.get_size("attack.steps", r.attack_steps);
  r.attack_lr = c.get_double("attack.lr", r.attack_lr);
  r.attack_l2 = c.get_double("attack.l2", r.attack_l2);

  const std::size_t hidden = c.get_size("model.hidden", 64);
  const std::size_t d = r.data_dim();
  // Generated samples are squashed onto the data's support: the unit cube for
  // digit grids, the unit sphere (where the class centers sit) for mixtures.
  const std::string squash = r.data == DataKind::digitgrid ? "-sigmoid" : "-normalize";
  r.baseline_arch = c.get_string("arch.baseline", classifier_arch(d, hidden, r.classes));
  r.teacher_arch = c.get_string("arch.teacher", classifier_arch(d, hidden, r.classes));
  r.student_arch = c.get_string("arch.student", classifier_arch(d, hidden, r.classes));
  r.generator_arch = c.get_string(
      "arch.generator",
      std::to_string(g.latent_dim) + "-dense:" + std::to_string(hidden) + "-relu-dense:" + std::to_string(d) + squash);
  r.encoder_arch = c.get_string("arch.encoder", std::to_string(d) + "-dense:" + std::to_string(hidden) +
                                                    "-relu-dense:" + std::to_string(2 * v.latent_dim));
  r.decoder_arch = c.get_string(
      "arch.decoder",
      std::to_string(v.latent_dim) + "-dense:" + std::to_string(hidden) + "-relu-dense:" + std::to_string(d) +
          (r.data == DataKind::digitgrid ? "-sigmoid" : ""));

  if (auto unused = c.unused_keys(); !unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key(s): " + list);
  }

  r.baseline.seed = derive_seed(r.seed, kBaselineSeed);
  r.teachers.seed = derive_seed(r.seed, kTeacherSeed);
  g.seed = derive_seed(r.seed, kGeneratorSeed);
  v.seed = derive_seed(r.seed, kVaeSeed);
  a.seed = derive_seed(r.seed, kAggregationSeed);
  s.seed = derive_seed(r.seed, kStudentSeed);

  r.validate();
  return r;
}

void RunConfig::validate() const {
  if (classes < 2) throw ConfigError("data.classes must be at least 2");
  if (data == DataKind::digitgrid && classes > 10) throw ConfigError("digit grids have at most 10 classes");
  if (train_per_class == 0 || test_per_class == 0) throw ConfigError("data sizes must be positive");
  if (!(spread > 0.0)) throw ConfigError("data.spread must be positive");
  if (!(pixel_noise >= 0.0 && pixel_noise < 0.5)) throw ConfigError("data.pixel_noise must be in [0, 0.5)");
  if (teacher_count == 0) throw ConfigError("teachers.count must be positive");
  if (teacher_count > private_train_size()) throw ConfigError("more teachers than private training examples");
  if (!(radius > 0.0)) throw ConfigError("triples.radius must be positive");
  if (!(latent_noise_scale >= 0.0) || !std::isfinite(latent_noise_scale)) {
    throw ConfigError("vae.noise_scale must be finite and non-negative");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("privacy.delta must be in (0, 1)");
  if (attack_steps == 0 || !(attack_lr > 0.0) || !(attack_l2 >= 0.0)) throw ConfigError("invalid attack settings");
  baseline.validate();
  teachers.validate();
  generator.validate();
  vae.validate();
  aggregation.validate();
  weights.validate();
  student.validate();
  if (accounting && query_count > 0) {
    if (aggregation.mechanism == NoiseMechanism::gaussian) {
      throw ConfigError("gaussian aggregation has no budget accounting; set privacy.accounting = false");
    }
    if (!(aggregation.noise_scale > 0.0)) {
      throw ConfigError("aggregation.noise_scale must be positive when privacy.accounting is enabled");
    }
  }
  const auto d = data_dim();
  auto check_classifier = [&](const std::string& text, const char* what) {
    const auto arch = Architecture::parse(text);
    if (arch.input_dim() != d || arch.output_dim() != classes || !arch.ends_with_softmax()) {
      throw ConfigError(std::string(what) + " must map " + std::to_string(d) + " inputs to a softmax over " +
                        std::to_string(classes) + " classes");
    }
  };
  check_classifier(baseline_arch, "arch.baseline");
  check_classifier(teacher_arch, "arch.teacher");
  check_classifier(student_arch, "arch.student");
  const auto gen = Architecture::parse(generator_arch);
  if (gen.input_dim() != generator.latent_dim || gen.output_dim() != d) {
    throw ConfigError("arch.generator must map generator.latent_dim to the data dimension");
  }
  const auto enc = Architecture::parse(encoder_arch);
  const auto dec = Architecture::parse(decoder_arch);
  try {
    check_vae_architectures(enc, dec, d);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (dec.input_dim() != vae.latent_dim) throw ConfigError("arch.decoder input must equal vae.latent_dim");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "seed = " << seed << "\n\n"
      << "data.kind = " << data_kind_name(data) << '\n'
      << "data.classes = " << classes << '\n'
      << "data.dim = " << dim << '\n'
      << "data.train_per_class = " << train_per_class << '\n'
      << "data.test_per_class = " << test_per_class << '\n'
      << "data.spread = " << num(spread) << '\n'
      << "data.pixel_noise = " << num(pixel_noise) << "\n\n"
      << "arch.baseline = " << baseline_arch << '\n'
      << "arch.teacher = " << teacher_arch << '\n'
      << "arch.student = " << student_arch << '\n'
      << "arch.generator = " << generator_arch << '\n'
      << "arch.encoder = " << encoder_arch << '\n'
      << "arch.decoder = " << decoder_arch << "\n\n";
  write_train(out, "baseline", baseline);
  out << '\n' << "teachers.count = " << teacher_count << '\n';
  write_train(out, "teachers", teachers);
  out << '\n'
      << "generator.latent_dim = " << generator.latent_dim << '\n'
      << "generator.alpha = " << num(generator.alpha) << '\n'
      << "generator.beta = " << num(generator.beta) << '\n'
      << "generator.batch = " << generator.batch_size << '\n'
      << "generator.rounds = " << generator.rounds << '\n'
      << "generator.lr = " << num(generator.lr) << '\n'
      << "generator.schedule = " << LrSchedule::kind_name(generator.schedule) << '\n'
      << "generator.balance = " << balance_name(generator.balance) << '\n'
      << "generator.reward_activation = " << (generator.reward_activation ? "true" : "false") << "\n\n"
      << "synthetic.count = " << synthetic_count << "\n\n"
      << "vae.latent_dim = " << vae.latent_dim << '\n'
      << "vae.batch = " << vae.batch_size << '\n'
      << "vae.rounds = " << vae.rounds << '\n'
      << "vae.lr = " << num(vae.lr) << '\n'
      << "vae.schedule = " << LrSchedule::kind_name(vae.schedule) << '\n'
      << "vae.holdout_fraction = " << num(vae.holdout_fraction) << '\n'
      << "vae.standardize = " << (vae.standardize ? "true" : "false") << '\n'
      << "vae.noise_scale = " << num(latent_noise_scale) << "\n\n"
      << "aggregation.mechanism = " << mechanism_name(aggregation.mechanism) << '\n'
      << "aggregation.noise_scale = " << num(aggregation.noise_scale) << '\n'
      << "query.count = " << query_count << '\n'
      << "triples.radius = " << num(radius) << "\n\n"
      << "student.w_sup = " << num(weights.w_sup) << '\n'
      << "student.w_norm = " << num(weights.w_norm) << '\n'
      << "student.w_tan = " << num(weights.w_tan) << '\n'
      << "student.w_ent = " << num(weights.w_ent) << '\n'
      << "student.rounds = " << student.rounds << '\n'
      << "student.batch = " << student.batch_size << '\n'
      << "student.lr = " << num(student.lr) << '\n'
      << "student.schedule = " << LrSchedule::kind_name(student.schedule) << '\n'
      << "student.log_every = " << student.log_every << '\n'
      << "student.literal_entropy_sign = " << (student.literal_entropy_sign ? "true" : "false") << "\n\n"
      << "privacy.accounting = " << (accounting ? "true" : "false") << '\n'
      << "privacy.delta = " << num(delta) << '\n'
      << "privacy.eps1 = " << num(eps1) << "\n\n"
      << "attack.steps = " << attack_steps << '\n'
      << "attack.lr = " << num(attack_lr) << '\n'
      << "attack.l2 = " << num(attack_l2) << '\n';
  return out.str();
}

double RunConfig::implied_eps1() const {
  return latent_noise_scale > 0.0 ? generative_epsilon(latent_noise_scale, vae.latent_dim) : 0.0;
}

PrivacyLedger RunConfig::ledger(std::size_t queries) const {
  PrivacyLedger l;
  l.eps0 = aggregation.noise_scale > 0.0 ? aggregation.eps0() : 0.0;
  l.query_count = queries;
  l.delta = delta;
  l.eps1 = implied_eps1();
  l.latent_dim = vae.latent_dim;
  return l;
}

fs::path RunPaths::teacher(std::size_t i) const {
  char name[32];
  std::snprintf(name, sizeof name, "teacher_%03zu.dgdw", i);
  return teacher_dir() / name;
}

fs::path default_output_root() {
  if (const char* env = std::getenv("DGD_OUT"); env && *env) return env;
  return "runs";
}

Pipeline::Pipeline(RunConfig config, fs::path run_dir, std::size_t jobs, bool resume)
    : config_(std::move(config)), paths_{std::move(run_dir)}, jobs_(jobs == 0 ? 1 : jobs), resume_(resume) {
  config_.validate();
}

void Pipeline::note(const std::string& message) const {
  if (log_) *log_ << message << std::endl;
}

void Pipeline::stage(const std::string& name, const std::vector<fs::path>& outputs,
                     const std::function<void()>& body) {
  if (resume_ && !outputs.empty()) {
    bool all = true;
    for (const auto& p : outputs) all = all && fs::exists(p);
    if (all) {
      note("[" + name + "] artifacts present, skipped");
      return;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(paths_.root);
    {
      std::ofstream cfg(paths_.config());
      cfg << config_.to_text();
    }
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const FormatError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, std::string(e.what()) + " (run directory '" + paths_.root.string() + "', partial outputs kept)");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", secs);
  note("[" + name + "] done in " + buf);
}

void Pipeline::gen_data() {
  stage("gen-data", {paths_.private_train(), paths_.private_test()}, [&] {
    const auto& c = config_;
    const std::size_t per_class = c.train_per_class + c.test_per_class;
    const std::uint64_t seed = derive_seed(c.seed, kDataSeed);
    LabeledDataset all;
    if (c.data == DataKind::mixture) {
      all = make_mixture_dataset({c.classes, c.dim, per_class, c.spread, seed});
    } else {
      all = make_digitgrid_dataset({c.classes, per_class, c.pixel_noise, seed});
    }
    auto [train, test] = split_train_test(all, c.classes * c.test_per_class, derive_seed(c.seed, kSplitSeed));
    fs::create_directories(paths_.private_train().parent_path());
    write_dataset(train, paths_.private_train());
    write_dataset(test, paths_.private_test());
    note("[gen-data] " + std::to_string(train.size()) + " train / " + std::to_string(test.size()) + " test, dim " +
         std::to_string(train.dim()));
  });
}

void Pipeline::train_baseline() {
  stage("train-baseline", {paths_.baseline(), paths_.baseline_summary()}, [&] {
    const auto train = read_dataset(paths_.private_train());
    const auto test = read_dataset(paths_.private_test());
    TrainLog log;
    ParamSet net;
    try {
      net = train_classifier(train, architecture(config_.baseline_arch), config_.baseline, &log);
    } catch (const NumericError& e) {
      throw TrainingError("train-baseline", 0, e.what());
    }
    fs::create_directories(paths_.baseline().parent_path());
    write_checkpoint(net, paths_.baseline());
    const double acc = evaluate_accuracy(net, test);
    json j;
    j["validation_accuracy"] = log.validation_accuracy;
    j["test_accuracy"] = acc;
    j["final_epoch_loss"] = log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back();
    write_json(j, paths_.baseline_summary());
    note("[train-baseline] test accuracy " + brief(acc));
  });
}

void Pipeline::train_teachers() {
  stage("train-teachers", {paths_.teacher_manifest()}, [&] {
    const auto train = read_dataset(paths_.private_train());
    const auto test = read_dataset(paths_.private_test());
    const auto partition = partition_disjoint(train, config_.teacher_count, derive_seed(config_.seed, kPartitionSeed));
    const auto ensemble =
        train_teacher_ensemble(train, partition, architecture(config_.teacher_arch), config_.teachers, jobs_);
    fs::create_directories(paths_.teacher_dir());
    json j;
    j["architecture"] = ensemble.architecture.to_string();
    j["count"] = ensemble.size();
    json entries = json::array();
    double mean_acc = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      write_checkpoint(ensemble.teachers[i], paths_.teacher(i));
      const double acc = evaluate_accuracy(ensemble.teachers[i], test);
      mean_acc += acc / static_cast<double>(ensemble.size());
      entries.push_back({{"file", paths_.teacher(i).filename().string()},
                         {"seed", ensemble.seeds[i]},
                         {"subset_size", partition.subsets[i].size()},
                         {"test_accuracy", acc}});
    }
    j["teachers"] = entries;
    j["mean_test_accuracy"] = mean_acc;
    write_json(j, paths_.teacher_manifest());
    note("[train-teachers] mean teacher test accuracy " + brief(mean_acc));
  });
}

TeacherEnsemble Pipeline::load_teachers() const {
  const json j = read_json(paths_.teacher_manifest());
  TeacherEnsemble ens;
  try {
    ens.architecture = Architecture::parse(j.at("architecture").get<std::string>());
    for (const auto& e : j.at("teachers")) {
      ens.teachers.push_back(read_checkpoint(paths_.teacher_dir() / e.at("file").get<std::string>(), ens.architecture));
      ens.seeds.push_back(e.at("seed").get<std::uint64_t>());
    }
  } catch (const json::exception& e) {
    throw FormatError("teacher manifest: " + std::string(e.what()), 0);
  }
  if (ens.teachers.empty()) throw FormatError("teacher manifest lists no teachers", 0);
  return ens;
}

void Pipeline::train_generator() {
  stage("train-generator", {paths_.generator(), paths_.generator_summary()}, [&] {
    const auto baseline = load_baseline();
    GeneratorLog log;
    ParamSet gen;
    try {
      gen = dgd::train_generator(baseline, architecture(config_.generator_arch), config_.generator, &log);
    } catch (const NumericError& e) {
      throw TrainingError("train-generator", log.round_loss.size(), e.what());
    }
    fs::create_directories(paths_.generator().parent_path());
    write_checkpoint(gen, paths_.generator());
    const auto probe = synthesize_dataset(gen, 1000, derive_seed(config_.seed, kSynthSeed) ^ 0x5a5a, config_.classes);
    const auto diag = inspect_samples(baseline, probe.features());
    json j;
    j["first_loss"] = log.round_loss.empty() ? 0.0 : log.round_loss.front();
    j["last_loss"] = log.round_loss.empty() ? 0.0 : log.round_loss.back();
    j["mean_max_probability"] = diag.mean_max_probability;
    j["class_entropy"] = diag.class_entropy;
    j["class_histogram"] = diag.class_histogram;
    write_json(j, paths_.generator_summary());
    note("[train-generator] mean max probability " + brief(diag.mean_max_probability) + ", class entropy " +
         brief(diag.class_entropy));
  });
}

void Pipeline::synthesize() {
  stage("synthesize", {paths_.synthetic()}, [&] {
    const auto gen = read_checkpoint(paths_.generator(), architecture(config_.generator_arch));
    const std::size_t count = config_.synthetic_count ? config_.synthetic_count : config_.private_train_size();
    if (count < config_.query_count) throw PreconditionError("synthetic.count is smaller than query.count");
    const auto ds = synthesize_dataset(gen, count, derive_seed(config_.seed, kSynthSeed), config_.classes);
    fs::create_directories(paths_.synthetic().parent_path());
    write_dataset(ds, paths_.synthetic());
  });
}

void Pipeline::train_vae() {
  stage("train-vae", {paths_.encoder(), paths_.decoder(), paths_.vae_summary()}, [&] {
    const auto synthetic = read_dataset(paths_.synthetic());
    VaeLog log;
    Vae vae;
    try {
      vae = dgd::train_vae(synthetic, architecture(config_.encoder_arch), architecture(config_.decoder_arch),
                           config_.vae, &log);
    } catch (const NumericError& e) {
      throw TrainingError("train-vae", log.round_loss.size(), e.what());
    }
    fs::create_directories(paths_.encoder().parent_path());
    write_checkpoint(vae.encoder, paths_.encoder());
    write_checkpoint(vae.decoder, paths_.decoder());
    json j;
    j["holdout_loss_start"] = log.holdout_loss_start;
    j["holdout_loss_end"] = log.holdout_loss_end;
    j["reconstruction_mse"] = reconstruction_mse(vae, synthetic.features());
    write_json(j, paths_.vae_summary());
    note("[train-vae] holdout loss " + brief(log.holdout_loss_start) + " -> " + brief(log.holdout_loss_end));
  });
}

Vae Pipeline::load_vae() const {
  return {read_checkpoint(paths_.encoder(), architecture(config_.encoder_arch)),
          read_checkpoint(paths_.decoder(), architecture(config_.decoder_arch))};
}

ParamSet Pipeline::load_baseline() const { return read_checkpoint(paths_.baseline(), architecture(config_.baseline_arch)); }

ParamSet Pipeline::load_student() const { return read_checkpoint(paths_.student(), architecture(config_.student_arch)); }

void Pipeline::query() {
  stage("query", {paths_.queries(), paths_.unlabeled(), paths_.labels(), paths_.query_ledger()}, [&] {
    const auto synthetic = read_dataset(paths_.synthetic());
    auto [pool, rest] = split_query_pool(synthetic, config_.query_count);
    std::vector<NoisyLabel> labels;
    if (config_.query_count > 0) {
      const auto ensemble = load_teachers();
      auto result = label_query_batch(ensemble, pool.features(), config_.aggregation);
      labels = std::move(result.labels);
    }
    fs::create_directories(paths_.queries().parent_path());
    write_dataset(pool, paths_.queries());
    write_dataset(rest, paths_.unlabeled());
    write_labels_csv(labels, config_.aggregation, paths_.labels());
    json j;
    j["mechanism"] = mechanism_name(config_.aggregation.mechanism);
    j["noise_scale"] = config_.aggregation.noise_scale;
    j["query_count"] = labels.size();
    j["teacher_count"] = config_.teacher_count;
    write_json(j, paths_.query_ledger());
  });
}

void Pipeline::build_triples() {
  stage("build-triples", {paths_.triples_hat(), paths_.triples_tan(), paths_.triples_norm(), paths_.triples_manifest()},
        [&] {
          const auto vae = load_vae();
          const auto unlabeled = read_dataset(paths_.unlabeled());
          const auto triples = dgd::build_triples(vae, unlabeled, config_.radius, config_.latent_noise_scale,
                                                  derive_seed(config_.seed, kTripleSeed), jobs_);
          const std::size_t k = config_.classes;
          fs::create_directories(paths_.triples_hat().parent_path());
          write_dataset(LabeledDataset(triples.hat, std::nullopt, k), paths_.triples_hat());
          write_dataset(LabeledDataset(triples.tan, std::nullopt, k), paths_.triples_tan());
          write_dataset(LabeledDataset(triples.norm, std::nullopt, k), paths_.triples_norm());
          json j;
          j["count"] = triples.size();
          j["radius"] = config_.radius;
          j["latent_noise_scale"] = config_.latent_noise_scale;
          j["latent_dim"] = vae.latent_dim();
          write_json(j, paths_.triples_manifest());
        });
}

void Pipeline::train_student() {
  stage("train-student", {paths_.student(), paths_.student_metrics()}, [&] {
    const auto pool = read_dataset(paths_.queries());
    const auto labels = read_labels_csv(paths_.labels());
    const auto labeled = LabeledQueries::attach(pool, labels);
    TripleSet triples{read_dataset(paths_.triples_hat()).features(), read_dataset(paths_.triples_tan()).features(),
                      read_dataset(paths_.triples_norm()).features()};
    triples.validate();
    StudentLossWeights weights = config_.weights;
    if (labeled.size() == 0) weights.w_sup = 0.0;
    const auto test = read_dataset(paths_.private_test());
    AccuracyProbe probe = [&](const ParamSet& net) { return evaluate_accuracy(net, test); };
    StudentLog log;
    ParamSet student;
    try {
      student =
          dgd::train_student(labeled, triples, architecture(config_.student_arch), weights, config_.student, probe, &log);
    } catch (const NumericError& e) {
      throw TrainingError("train-student", log.rounds.size(), e.what());
    }
    fs::create_directories(paths_.student().parent_path());
    write_checkpoint(student, paths_.student());
    write_student_metrics(log.epochs, paths_.student_metrics());
    note("[train-student] test accuracy " + brief(evaluate_accuracy(student, test)));
  });
}

BudgetReport Pipeline::budget() {
  const PrivacyLedger ledger = config_.ledger(config_.query_count);
  BudgetReport report;
  stage("budget", {}, [&] {
    if (!config_.accounting) {
      note("[budget] accounting disabled, no report written");
      return;
    }
    if (fs::exists(paths_.query_ledger())) {
      const json q = read_json(paths_.query_ledger());
      if (q.value("query_count", config_.query_count) != config_.query_count) {
        throw DataError("query ledger disagrees with query.count");
      }
    }
    report = report_min(ledger);
    write_budget_report(report, ledger, paths_.budget());
    note("[budget] " + method_name(report.method) + " eps_total " + brief(report.eps_total));
  });
  return report;
}

Tensor Pipeline::attack_templates() const {
  if (config_.data == DataKind::digitgrid) return digit_templates(config_.classes);
  const auto test = read_dataset(paths_.private_test());
  Tensor means(Shape{config_.classes, test.dim()}, 0.0);
  std::vector<double> counts(config_.classes, 0.0);
  const auto& labels = test.labels();
  for (std::size_t i = 0; i < test.size(); ++i) {
    counts[labels[i]] += 1.0;
    for (std::size_t j = 0; j < test.dim(); ++j) means.at(labels[i], j) += test.features().at(i, j);
  }
  for (std::size_t k = 0; k < config_.classes; ++k) {
    if (counts[k] == 0.0) continue;
    for (std::size_t j = 0; j < test.dim(); ++j) means.at(k, j) /= counts[k];
  }
  return means;
}

AttackSummary Pipeline::attack() {
  AttackSummary summary;
  stage("attack", {}, [&] {
    const auto templates = attack_templates();
    const std::uint64_t seed = derive_seed(config_.seed, kAttackSeed);
    const auto baseline = load_baseline();
    const auto student = load_student();
    fs::create_directories(paths_.root);
    std::ofstream out(paths_.attack());
    if (!out) throw IoError("cannot write '" + paths_.attack().string() + "'");
    out << "model,class,agreement,final_confidence\n";
    for (const auto* which : {"baseline", "student"}) {
      const ParamSet& victim = std::string(which) == "baseline" ? baseline : student;
      double total = 0.0;
      for (std::size_t k = 0; k < config_.classes; ++k) {
        const auto r = inversion_attack(victim, k, config_.attack_steps, config_.attack_lr, config_.attack_l2,
                                        derive_seed(seed, k));
        const double agreement = template_agreement(r.input.data(), templates, k);
        total += agreement;
        out << which << ',' << k << ',' << num(agreement) << ',' << num(r.confidence.back()) << '\n';
      }
      (std::string(which) == "baseline" ? summary.baseline_quality : summary.student_quality) =
          total / static_cast<double>(config_.classes);
    }
    note("[attack] inversion quality baseline " + brief(summary.baseline_quality) + ", student " +
         brief(summary.student_quality));
  });
  return summary;
}

void Pipeline::run_all() {
  gen_data();
  train_baseline();
  train_teachers();
  train_generator();
  synthesize();
  train_vae();
  query();
  build_triples();
  train_student();
  budget();
}

}  // namespace dgd
