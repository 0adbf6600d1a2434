// dgd: command-line driver for the distillation pipeline.
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgd/errors.hpp"
#include "dgd/pipeline.hpp"
#include "dgd/report.hpp"

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kStage = 2, kIo = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;
  bool resume = false;
  bool quiet = false;
  std::vector<std::string> runs;  // report only
};

dgd::RunConfig load_config(const Options& o) {
  dgd::Config cfg = o.config.empty() ? dgd::Config{} : dgd::Config::load(o.config);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  return dgd::RunConfig::from(cfg);
}

std::filesystem::path run_dir(const Options& o, const dgd::RunConfig& cfg) {
  if (!o.out.empty()) return o.out;
  return dgd::default_output_root() / ("seed-" + std::to_string(cfg.seed));
}

int run(const std::string& command, const Options& o) {
  if (command == "report") {
    std::vector<std::filesystem::path> dirs(o.runs.begin(), o.runs.end());
    const std::filesystem::path out = o.out.empty() ? dgd::default_output_root() / "report" : std::filesystem::path(o.out);
    const auto rows = dgd::emit_report(dirs, out);
    for (const auto& r : rows) {
      std::printf("%s queries=%zu accuracy=%.4f eps_total=%.4f (%s)\n", r.run.c_str(), r.query_count,
                  r.test_accuracy, r.eps_total, r.method.c_str());
    }
    return kOk;
  }

  const auto cfg = load_config(o);
  dgd::Pipeline p(cfg, run_dir(o, cfg), o.jobs, o.resume);
  if (!o.quiet) p.set_log(&std::cerr);
  if (command == "gen-data") p.gen_data();
  else if (command == "train-baseline") p.train_baseline();
  else if (command == "train-teachers") p.train_teachers();
  else if (command == "train-generator") p.train_generator();
  else if (command == "synthesize") p.synthesize();
  else if (command == "train-vae") p.train_vae();
  else if (command == "query") p.query();
  else if (command == "build-triples") p.build_triples();
  else if (command == "train-student") p.train_student();
  else if (command == "run-all") p.run_all();
  else if (command == "budget") {
    const auto r = p.budget();
    if (cfg.accounting) std::printf("%s eps_total=%.6f delta=%g\n", dgd::method_name(r.method).c_str(), r.eps_total, r.delta);
  } else if (command == "attack") {
    const auto s = p.attack();
    std::printf("inversion quality: baseline %.4f, student %.4f\n", s.baseline_quality, s.student_quality);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-free private distillation pipeline"};
  app.require_subcommand(1, 1);
  Options o;
  app.add_option("--config", o.config, "Config file (flat key = value)")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Override the run seed");
  app.add_option("--out", o.out, "Run directory (report: output directory)");
  app.add_option("--jobs", o.jobs, "Worker threads for parallel stages")->check(CLI::PositiveNumber);
  app.add_flag("--resume", o.resume, "Skip stages whose artifacts already exist");
  app.add_flag("-q,--quiet", o.quiet, "No progress output");

  const std::map<std::string, std::string> commands = {
      {"gen-data", "Generate the private train/test data"},
      {"train-baseline", "Train the non-private baseline classifier"},
      {"train-teachers", "Train the teacher ensemble on disjoint partitions"},
      {"train-generator", "Train the data-free generator against the baseline"},
      {"synthesize", "Sample the synthetic dataset"},
      {"train-vae", "Train the VAE on synthetic data"},
      {"query", "Label the query pool by noisy teacher aggregation"},
      {"build-triples", "Build perturbation triples from the unlabeled pool"},
      {"train-student", "Train the student"},
      {"attack", "Model inversion probe on baseline and student"},
      {"budget", "Write the privacy budget report"},
      {"report", "Summarize completed runs"},
      {"run-all", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (name == "report") sub->add_option("runs", o.runs, "Run directories")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return run(command, o);
  } catch (const dgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const dgd::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const dgd::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStage;
  }
}
