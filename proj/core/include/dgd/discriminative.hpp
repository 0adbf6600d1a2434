#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgd/dataset.hpp"
#include "dgd/network.hpp"
#include "dgd/optim.hpp"

namespace dgd {

struct TrainConfig {
  std::size_t rounds = 3000;  // minibatch steps
  std::size_t batch_size = 128;
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 0.05;
  LrSchedule::Kind schedule = LrSchedule::Kind::linear;
  double validation_fraction = 0.1;  // held out for logging only
  std::uint64_t seed = 1;

  void validate() const;
  LrSchedule lr_schedule() const { return {schedule, lr, rounds}; }
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
  double validation_accuracy = 0.0;
  std::size_t train_examples = 0;
};

/// Cross-entropy training of a softmax classifier on a labeled dataset.
ParamSet train_classifier(const LabeledDataset& ds, const Architecture& architecture, const TrainConfig& cfg,
                          TrainLog* log = nullptr);

struct TeacherEnsemble {
  Architecture architecture;
  std::vector<ParamSet> teachers;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const noexcept { return teachers.size(); }
};

/// Teacher i sees only ds.subset(partition.subsets[i]) and trains with seed cfg.seed + i.
TeacherEnsemble train_teacher_ensemble(const LabeledDataset& ds, const Partition& partition,
                                       const Architecture& architecture, const TrainConfig& cfg,
                                       std::size_t jobs = 1);

/// Fraction of rows whose argmax prediction (lowest index on ties) equals the label.
double evaluate_accuracy(const ParamSet& net, const LabeledDataset& ds);

}  // namespace dgd
