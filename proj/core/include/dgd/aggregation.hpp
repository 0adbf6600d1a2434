#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dgd/discriminative.hpp"
#include "dgd/rng.hpp"
#include "dgd/tensor.hpp"

namespace dgd {

/// Per-class vote counts of the teacher ensemble for one query.
struct VoteHistogram {
  std::vector<std::size_t> counts;

  std::size_t teacher_count() const noexcept;
  friend bool operator==(const VoteHistogram&, const VoteHistogram&) = default;
};

struct NoisyLabel {
  std::size_t query_index = 0;
  std::size_t label = 0;

  friend bool operator==(const NoisyLabel&, const NoisyLabel&) = default;
};

enum class NoiseMechanism { laplace, gaussian };
NoiseMechanism parse_mechanism(std::string_view name);
std::string mechanism_name(NoiseMechanism m);

struct AggregationConfig {
  NoiseMechanism mechanism = NoiseMechanism::laplace;
  /// Laplace scale b = 2 / eps0 (laplace) or standard deviation sigma (gaussian). 0 disables noise.
  double noise_scale = 40.0;
  std::uint64_t seed = 1;

  void validate() const;
  /// Per-query budget 2 / b of the Laplace mechanism.
  double eps0() const;
};

VoteHistogram vote_histogram(const TeacherEnsemble& ensemble, const Tensor& query);
/// One histogram per query row; each teacher evaluates the whole batch once.
std::vector<VoteHistogram> vote_histograms(const TeacherEnsemble& ensemble, const Tensor& queries);

/// argmax_k(counts[k] + noise_k) with i.i.d. noise; ties go to the lowest index.
std::size_t noisy_argmax(const VoteHistogram& histogram, const AggregationConfig& cfg, Rng& rng);

struct QueryLabels {
  std::vector<NoisyLabel> labels;
  std::vector<VoteHistogram> histograms;
  /// Number of mechanism invocations, for the privacy ledger.
  std::size_t ledger_delta = 0;
};

/// Labels each query row with an independent substream derive_seed(cfg.seed, row),
/// so the result does not depend on evaluation order.
QueryLabels label_query_batch(const TeacherEnsemble& ensemble, const Tensor& queries, const AggregationConfig& cfg);

/// CSV with header "query_index,label,mechanism,noise_param".
void write_labels_csv(const std::vector<NoisyLabel>& labels, const AggregationConfig& cfg,
                      const std::filesystem::path& path);
std::vector<NoisyLabel> read_labels_csv(const std::filesystem::path& path);

}  // namespace dgd
