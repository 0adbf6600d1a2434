#include "dgd/aggregation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dgd/errors.hpp"

namespace dgd {

std::size_t VoteHistogram::teacher_count() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

NoiseMechanism parse_mechanism(std::string_view name) {
  if (name == "laplace") return NoiseMechanism::laplace;
  if (name == "gaussian") return NoiseMechanism::gaussian;
  throw ConfigError("unknown aggregation mechanism '" + std::string(name) + "'");
}

std::string mechanism_name(NoiseMechanism m) { return m == NoiseMechanism::laplace ? "laplace" : "gaussian"; }

void AggregationConfig::validate() const {
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError("aggregation noise scale must be finite and non-negative");
  }
}

double AggregationConfig::eps0() const {
  if (mechanism != NoiseMechanism::laplace) throw ConfigError("eps0 is only defined for Laplace aggregation");
  if (noise_scale <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / noise_scale;
}

std::vector<VoteHistogram> vote_histograms(const TeacherEnsemble& ensemble, const Tensor& queries) {
  require_matrix(queries, "queries");
  if (queries.cols() != ensemble.architecture.input_dim()) {
    throw ShapeError("queries have " + std::to_string(queries.cols()) + " columns, teachers expect " +
                     std::to_string(ensemble.architecture.input_dim()));
  }
  const std::size_t k = ensemble.architecture.output_dim();
  std::vector<VoteHistogram> out(queries.rows(), VoteHistogram{std::vector<std::size_t>(k, 0)});
  for (const ParamSet& teacher : ensemble.teachers) {
    const auto votes = predict(teacher, queries);
    for (std::size_t q = 0; q < votes.size(); ++q) ++out[q].counts[votes[q]];
  }
  return out;
}

VoteHistogram vote_histogram(const TeacherEnsemble& ensemble, const Tensor& query) {
  Tensor row = query;
  if (row.rank() == 1) row = Tensor::matrix(1, query.size(), std::vector<double>(query.data().begin(), query.data().end()));
  if (row.rows() != 1) throw ShapeError("vote_histogram takes a single query");
  return vote_histograms(ensemble, row).front();
}

std::size_t noisy_argmax(const VoteHistogram& histogram, const AggregationConfig& cfg, Rng& rng) {
  if (histogram.counts.empty()) throw PreconditionError("empty vote histogram");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    double noise = 0.0;
    if (cfg.noise_scale > 0.0) {
      noise = cfg.mechanism == NoiseMechanism::laplace ? rng.laplace(cfg.noise_scale)
                                                       : cfg.noise_scale * rng.normal();
    }
    const double score = static_cast<double>(histogram.counts[k]) + noise;
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

QueryLabels label_query_batch(const TeacherEnsemble& ensemble, const Tensor& queries, const AggregationConfig& cfg) {
  cfg.validate();
  if (queries.rows() == 0) throw PreconditionError("no queries to label");
  QueryLabels out;
  out.histograms = vote_histograms(ensemble, queries);
  out.labels.reserve(out.histograms.size());
  for (std::size_t q = 0; q < out.histograms.size(); ++q) {
    Rng rng(derive_seed(cfg.seed, q));
    out.labels.push_back({q, noisy_argmax(out.histograms[q], cfg, rng)});
    ++out.ledger_delta;
  }
  return out;
}

void write_labels_csv(const std::vector<NoisyLabel>& labels, const AggregationConfig& cfg,
                      const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  std::ostringstream param;
  param.precision(17);
  param << cfg.noise_scale;
  out << "query_index,label,mechanism,noise_param\n";
  for (const NoisyLabel& l : labels) {
    out << l.query_index << ',' << l.label << ',' << mechanism_name(cfg.mechanism) << ',' << param.str() << '\n';
  }
}

std::vector<NoisyLabel> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "query_index,label,mechanism,noise_param") {
    throw FormatError("unexpected label CSV header in '" + path.string() + "'", 0);
  }
  std::vector<NoisyLabel> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    NoisyLabel l;
    char comma = 0;
    if (!(fields >> l.query_index >> comma >> l.label) || comma != ',') {
      throw FormatError("malformed label CSV line " + std::to_string(line_no), line_no);
    }
    labels.push_back(l);
  }
  return labels;
}

}  // namespace dgd
