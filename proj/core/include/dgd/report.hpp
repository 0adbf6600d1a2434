#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace dgd {

struct RunSummary {
  std::string run;
  std::size_t query_count = 0;
  double noise_scale = 0.0;
  double test_accuracy = 0.0;  // final logged student epoch
  std::string method;
  double eps_total = 0.0;
};

/// Reads the artifacts of one completed run. Throws ReportError naming every missing file.
RunSummary summarize_run(const std::filesystem::path& run_dir);

/// Writes summary.csv plus one plot-ready CSV per curve (accuracy_vs_queries,
/// budget_vs_queries, budget_vs_noise_scale) into `out_dir`.
std::vector<RunSummary> emit_report(const std::vector<std::filesystem::path>& run_dirs,
                                    const std::filesystem::path& out_dir);

}  // namespace dgd
