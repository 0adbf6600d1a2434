#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <functional>
#include <vector>

#include "dgd/aggregation.hpp"
#include "dgd/autodiff.hpp"
#include "dgd/dataset.hpp"
#include "dgd/network.hpp"
#include "dgd/optim.hpp"
#include "dgd/vae.hpp"

namespace dgd {

/// Query examples paired with their privately aggregated labels. The only
/// labeled input the student accepts.
class LabeledQueries {
 public:
  LabeledQueries() = default;

  /// `pool` must be unlabeled (synthetic); ground-truth labeled data is rejected.
  static LabeledQueries attach(const LabeledDataset& pool, const std::vector<NoisyLabel>& labels);

  const Tensor& features() const noexcept { return features_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  std::size_t class_count() const noexcept { return class_count_; }
  std::size_t size() const noexcept { return labels_.size(); }

 private:
  Tensor features_{Shape{0, 0}};
  std::vector<std::size_t> labels_;
  std::size_t class_count_ = 0;
};

struct StudentLossWeights {
  double w_sup = 1.0;
  double w_norm = 1.0;
  double w_tan = 1.0;
  double w_ent = 1.0;

  void validate() const;
  bool unsupervised_active() const noexcept { return w_norm > 0.0 || w_tan > 0.0 || w_ent > 0.0; }
};

struct StudentConfig {
  std::size_t rounds = 500;
  std::size_t batch_size = 128;
  double lr = 0.001;
  LrSchedule::Kind schedule = LrSchedule::Kind::linear;
  std::size_t log_every = 50;  // rounds per logged epoch
  /// false: the entropy term is H = -sum p ln p (minimised, sharper predictions).
  /// true: the term is sum p ln p as written, i.e. -H.
  bool literal_entropy_sign = false;
  std::uint64_t seed = 1;

  void validate() const;
  LrSchedule lr_schedule() const { return {schedule, lr, rounds}; }
};

/// Mean cross-entropy of the student against the noisy labels.
ad::Var supervised_energy(const BoundNet& student, ad::Var batch, std::span<const std::size_t> labels);

struct UnsupervisedTerms {
  ad::Var normal;   // mean |f(x_hat) - f(x_norm)|^2
  ad::Var tangent;  // mean |f(x_hat) - f(x_tan)|^2
  ad::Var entropy;  // mean H(p(x_hat)) (or -H with the literal sign)
  ad::Var total;    // weighted sum
};

UnsupervisedTerms unsupervised_energy(const BoundNet& student, ad::Var hat, ad::Var tan, ad::Var norm,
                                      const StudentLossWeights& weights, bool literal_entropy_sign = false);

double supervised_energy(const ParamSet& student, const LabeledQueries& labeled);

struct UnsupervisedValues {
  double normal = 0.0;
  double tangent = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

UnsupervisedValues unsupervised_energy(const ParamSet& student, const TripleSet& triples,
                                       const StudentLossWeights& weights, bool literal_entropy_sign = false);

struct StudentRound {
  double supervised = 0.0;
  UnsupervisedValues unsupervised;
  double total = 0.0;  // w_sup * supervised + unsupervised.total
};

struct StudentEpoch {
  std::size_t epoch = 0;
  double supervised = 0.0;
  double normal = 0.0;
  double tangent = 0.0;
  double entropy = 0.0;
  double train_accuracy = 0.0;  // against the noisy labels
  double test_accuracy = 0.0;   // from the evaluation hook, NaN without one
};

struct StudentLog {
  std::vector<StudentRound> rounds;
  std::vector<StudentEpoch> epochs;
};

/// Evaluation-only hook; its result is logged and never feeds back into training.
using AccuracyProbe = std::function<double(const ParamSet&)>;

/// Alternates one labeled step on w_sup * E_s and one triple step on E_u per round.
ParamSet train_student(const LabeledQueries& labeled, const TripleSet& triples, const Architecture& architecture,
                       const StudentLossWeights& weights, const StudentConfig& cfg,
                       const AccuracyProbe& test_probe = {}, StudentLog* log = nullptr);

/// Header: epoch,E_s,E_u_norm,E_u_tan,E_u_ent,train_acc,test_acc
void write_student_metrics(const std::vector<StudentEpoch>& epochs, const std::filesystem::path& path);

}  // namespace dgd
