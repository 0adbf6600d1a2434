#include "dgd/discriminative.hpp"

#include <numeric>
#include <string>

#include "dgd/errors.hpp"
#include "dgd/parallel.hpp"
#include "dgd/rng.hpp"
#include "dgd/training.hpp"

namespace dgd {

void TrainConfig::validate() const {
  if (rounds < 1) throw ConfigError("training rounds must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
}

ParamSet train_classifier(const LabeledDataset& ds, const Architecture& architecture, const TrainConfig& cfg,
                          TrainLog* log) {
  if (!ds.labeled()) throw PreconditionError("train_classifier needs a labeled dataset");
  cfg.validate();
  if (!architecture.ends_with_softmax() || architecture.output_dim() != ds.class_count()) {
    throw ConfigError("classifier architecture must end in a softmax over " + std::to_string(ds.class_count()) +
                      " classes");
  }
  if (architecture.input_dim() != ds.dim()) throw ConfigError("classifier input size does not match the data");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t held_out = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(ds.size()));
  if (held_out >= ds.size()) held_out = 0;
  if (held_out > 0) {
    Rng split_rng(derive_seed(cfg.seed, 11));
    split_rng.shuffle(order);
  }
  std::span<const std::size_t> all(order);
  const LabeledDataset train = held_out > 0 ? ds.subset(all.subspan(held_out)) : ds;

  ParamSet net = xavier_init(architecture, derive_seed(cfg.seed, 12));
  Optimizer optimizer(cfg.optimizer);
  const LrSchedule schedule = cfg.lr_schedule();
  BatchSampler sampler(train.size(), cfg.batch_size, derive_seed(cfg.seed, 13));
  const std::size_t per_epoch = sampler.batches_per_epoch();

  double epoch_total = 0.0;
  std::size_t epoch_batches = 0;
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    const auto idx = sampler.next();
    std::vector<std::size_t> labels;
    labels.reserve(idx.size());
    for (std::size_t i : idx) labels.push_back(train.labels()[i]);
    try {
      ad::Graph graph;
      BoundNet bound = bind(graph, net, Trainable::yes);
      NetVars out = apply(bound, graph.constant(train.features().gather_rows(idx)));
      ad::Var loss = ad::cross_entropy(out.logits, labels);
      graph.backward(loss);
      optimizer.step(net, collect_gradients(graph, bound), schedule.at(round));
      epoch_total += loss.value().item();
    } catch (const NumericError& e) {
      throw TrainingError("classifier", round, e.what());
    }
    if (++epoch_batches == per_epoch || round + 1 == cfg.rounds) {
      if (log) log->epoch_loss.push_back(epoch_total / static_cast<double>(epoch_batches));
      epoch_total = 0.0;
      epoch_batches = 0;
    }
  }
  if (log) {
    log->train_examples = train.size();
    log->validation_accuracy = held_out > 0 ? evaluate_accuracy(net, ds.subset(all.first(held_out))) : 0.0;
  }
  return net;
}

TeacherEnsemble train_teacher_ensemble(const LabeledDataset& ds, const Partition& partition,
                                       const Architecture& architecture, const TrainConfig& cfg, std::size_t jobs) {
  if (!ds.labeled()) throw PreconditionError("teachers need a labeled dataset");
  partition.validate(ds.size());
  TeacherEnsemble ensemble{architecture, std::vector<ParamSet>(partition.subsets.size()),
                           std::vector<std::uint64_t>(partition.subsets.size())};
  parallel_for(partition.subsets.size(), jobs, [&](std::size_t i) {
    TrainConfig local = cfg;
    local.seed = cfg.seed + i;
    ensemble.seeds[i] = local.seed;
    ensemble.teachers[i] = train_classifier(ds.subset(partition.subsets[i]), architecture, local);
  });
  return ensemble;
}

double evaluate_accuracy(const ParamSet& net, const LabeledDataset& ds) {
  if (!ds.labeled()) throw PreconditionError("accuracy needs a labeled dataset");
  if (ds.size() == 0) return 0.0;
  const auto pred = predict(net, ds.features());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == ds.labels()[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace dgd
