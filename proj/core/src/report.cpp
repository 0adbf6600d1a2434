#include "dgd/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dgd/config.hpp"
#include "dgd/errors.hpp"
#include "json.hpp"

namespace dgd {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double last_test_accuracy(const fs::path& metrics) {
  std::ifstream in(metrics);
  if (!in) throw IoError("cannot read '" + metrics.string() + "'");
  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw ReportError("'" + metrics.string() + "' has no epochs");
  const auto comma = last.rfind(',');
  try {
    return std::stod(last.substr(comma + 1));
  } catch (const std::exception&) {
    throw ReportError("'" + metrics.string() + "': unreadable test accuracy");
  }
}

std::ofstream open_csv(const fs::path& path, const char* header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << header << '\n';
  return out;
}

}  // namespace

RunSummary summarize_run(const fs::path& run_dir) {
  const fs::path config = run_dir / "config.txt";
  const fs::path metrics = run_dir / "student" / "metrics.csv";
  const fs::path budget = run_dir / "budget.json";
  std::string missing;
  for (const auto& p : {config, metrics, budget}) {
    if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p.string();
  }
  if (!missing.empty()) throw ReportError("missing artifacts: " + missing);

  RunSummary s;
  s.run = run_dir.filename().string();
  if (s.run.empty()) s.run = run_dir.parent_path().filename().string();
  const Config cfg = Config::load(config);
  s.noise_scale = cfg.get_double("aggregation.noise_scale", 0.0);
  s.test_accuracy = last_test_accuracy(metrics);

  std::ifstream in(budget);
  try {
    const auto j = nlohmann::json::parse(in);
    s.method = j.at("method").get<std::string>();
    s.eps_total = j.at("eps_total").get<double>();
    s.query_count = j.at("query_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ReportError("'" + budget.string() + "': " + e.what());
  }
  return s;
}

std::vector<RunSummary> emit_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) throw ReportError("no run directories given");
  std::vector<RunSummary> rows;
  std::string problems;
  for (const auto& dir : run_dirs) {
    try {
      rows.push_back(summarize_run(dir));
    } catch (const ReportError& e) {
      problems += (problems.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  if (!problems.empty()) throw ReportError(problems);

  fs::create_directories(out_dir);
  {
    auto out = open_csv(out_dir / "summary.csv", "run,query_count,noise_scale,test_accuracy,method,eps_total");
    for (const auto& r : rows) {
      out << r.run << ',' << r.query_count << ',' << num(r.noise_scale) << ',' << num(r.test_accuracy) << ','
          << r.method << ',' << num(r.eps_total) << '\n';
    }
  }
  auto sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RunSummary& a, const RunSummary& b) { return a.query_count < b.query_count; });
  {
    auto acc = open_csv(out_dir / "accuracy_vs_queries.csv", "query_count,test_accuracy,run");
    auto eps = open_csv(out_dir / "budget_vs_queries.csv", "query_count,eps_total,run");
    for (const auto& r : sorted) {
      acc << r.query_count << ',' << num(r.test_accuracy) << ',' << r.run << '\n';
      eps << r.query_count << ',' << num(r.eps_total) << ',' << r.run << '\n';
    }
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const RunSummary& a, const RunSummary& b) {
    return a.query_count != b.query_count ? a.query_count < b.query_count : a.noise_scale < b.noise_scale;
  });
  {
    auto out = open_csv(out_dir / "budget_vs_noise_scale.csv", "query_count,noise_scale,eps_total,run");
    for (const auto& r : sorted) {
      out << r.query_count << ',' << num(r.noise_scale) << ',' << num(r.eps_total) << ',' << r.run << '\n';
    }
  }
  return rows;
}

}  // namespace dgd
