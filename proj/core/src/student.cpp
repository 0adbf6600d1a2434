#include "dgd/student.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dgd/errors.hpp"
#include "dgd/rng.hpp"
#include "dgd/training.hpp"

namespace dgd {

LabeledQueries LabeledQueries::attach(const LabeledDataset& pool, const std::vector<NoisyLabel>& labels) {
  if (pool.labeled()) {
    throw PreconditionError("student inputs must be unlabeled synthetic queries; got a dataset with ground-truth labels");
  }
  if (labels.size() != pool.size()) {
    throw DataError(std::to_string(labels.size()) + " noisy labels for " + std::to_string(pool.size()) + " queries");
  }
  LabeledQueries q;
  q.features_ = pool.features();
  q.class_count_ = pool.class_count();
  q.labels_.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const NoisyLabel& l = labels[i];
    if (l.query_index != i) throw DataError("noisy labels are not in query order");
    if (l.label >= q.class_count_) throw DataError("noisy label " + std::to_string(l.label) + " out of range");
    q.labels_[i] = l.label;
  }
  return q;
}

void StudentLossWeights::validate() const {
  for (double w : {w_sup, w_norm, w_tan, w_ent}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("student loss weights must be finite and non-negative");
  }
  if (w_sup == 0.0 && !unsupervised_active()) throw ConfigError("at least one student loss weight must be positive");
}

void StudentConfig::validate() const {
  if (batch_size < 1) throw ConfigError("student batch size must be at least 1");
  if (log_every < 1) throw ConfigError("student log interval must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("student learning rate must be non-negative");
}

ad::Var supervised_energy(const BoundNet& student, ad::Var batch, std::span<const std::size_t> labels) {
  const std::size_t k = student.net->architecture().output_dim();
  for (std::size_t l : labels) {
    if (l >= k) throw DataError("label " + std::to_string(l) + " outside the student's " + std::to_string(k) + " classes");
  }
  return ad::cross_entropy(apply(student, batch).logits, labels);
}

UnsupervisedTerms unsupervised_energy(const BoundNet& student, ad::Var hat, ad::Var tan, ad::Var norm,
                                      const StudentLossWeights& weights, bool literal_entropy_sign) {
  if (hat.value().shape() != tan.value().shape() || hat.value().shape() != norm.value().shape()) {
    throw ShapeError("triple members differ in shape");
  }
  NetVars on_hat = apply(student, hat);
  ad::Var f_tan = apply(student, tan).features;
  ad::Var f_norm = apply(student, norm).features;
  UnsupervisedTerms t;
  t.normal = ad::mean(ad::squared_norm_rows(ad::sub(on_hat.features, f_norm)));
  t.tangent = ad::mean(ad::squared_norm_rows(ad::sub(on_hat.features, f_tan)));
  ad::Var h = ad::mean(ad::entropy_rows(on_hat.logits));
  t.entropy = literal_entropy_sign ? ad::scale(h, -1.0) : h;
  t.total = ad::add(ad::add(ad::scale(t.normal, weights.w_norm), ad::scale(t.tangent, weights.w_tan)),
                    ad::scale(t.entropy, weights.w_ent));
  return t;
}

double supervised_energy(const ParamSet& student, const LabeledQueries& labeled) {
  ad::Graph g;
  BoundNet bound = bind(g, student, Trainable::no);
  return supervised_energy(bound, g.constant(labeled.features()), labeled.labels()).value().item();
}

UnsupervisedValues unsupervised_energy(const ParamSet& student, const TripleSet& triples,
                                       const StudentLossWeights& weights, bool literal_entropy_sign) {
  ad::Graph g;
  BoundNet bound = bind(g, student, Trainable::no);
  UnsupervisedTerms t = unsupervised_energy(bound, g.constant(triples.hat), g.constant(triples.tan),
                                            g.constant(triples.norm), weights, literal_entropy_sign);
  return {t.normal.value().item(), t.tangent.value().item(), t.entropy.value().item(), t.total.value().item()};
}

namespace {

double accuracy_against(const ParamSet& net, const Tensor& x, const std::vector<std::size_t>& labels) {
  if (labels.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto pred = predict(net, x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace

ParamSet train_student(const LabeledQueries& labeled, const TripleSet& triples, const Architecture& architecture,
                       const StudentLossWeights& weights, const StudentConfig& cfg, const AccuracyProbe& test_probe,
                       StudentLog* log) {
  weights.validate();
  cfg.validate();
  if (!architecture.ends_with_softmax()) throw ConfigError("student architecture must end in a softmax");
  const bool supervised = weights.w_sup > 0.0;
  if (supervised && labeled.size() == 0) {
    throw PreconditionError("student needs labeled queries unless the supervised weight is 0");
  }
  if (supervised && labeled.features().cols() != architecture.input_dim()) {
    throw ShapeError("labeled queries do not match the student input size");
  }
  const bool unsupervised = weights.unsupervised_active() && triples.size() > 0;
  if (unsupervised) {
    triples.validate();
    if (triples.hat.cols() != architecture.input_dim()) throw ShapeError("triples do not match the student input size");
  }

  ParamSet net = xavier_init(architecture, derive_seed(cfg.seed, 41));
  Adam adam;
  const LrSchedule schedule = cfg.lr_schedule();
  std::optional<BatchSampler> labeled_batches;
  std::optional<BatchSampler> triple_batches;
  if (supervised) labeled_batches.emplace(labeled.size(), cfg.batch_size, derive_seed(cfg.seed, 42));
  if (unsupervised) triple_batches.emplace(triples.size(), cfg.batch_size, derive_seed(cfg.seed, 43));

  StudentEpoch acc;
  std::size_t in_epoch = 0;
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    const double lr = schedule.at(round);
    StudentRound r;
    try {
      if (supervised) {
        const auto idx = labeled_batches->next();
        std::vector<std::size_t> y;
        for (std::size_t i : idx) y.push_back(labeled.labels()[i]);
        ad::Graph g;
        BoundNet bound = bind(g, net, Trainable::yes);
        ad::Var es = supervised_energy(bound, g.constant(labeled.features().gather_rows(idx)), y);
        g.backward(ad::scale(es, weights.w_sup));
        adam.step(net, collect_gradients(g, bound), lr);
        r.supervised = es.value().item();
      }
      if (unsupervised) {
        const auto idx = triple_batches->next();
        ad::Graph g;
        BoundNet bound = bind(g, net, Trainable::yes);
        UnsupervisedTerms t =
            unsupervised_energy(bound, g.constant(triples.hat.gather_rows(idx)), g.constant(triples.tan.gather_rows(idx)),
                                g.constant(triples.norm.gather_rows(idx)), weights, cfg.literal_entropy_sign);
        g.backward(t.total);
        adam.step(net, collect_gradients(g, bound), lr);
        r.unsupervised = {t.normal.value().item(), t.tangent.value().item(), t.entropy.value().item(),
                          t.total.value().item()};
      }
    } catch (const NumericError& e) {
      throw TrainingError("student", round, e.what());
    }
    r.total = weights.w_sup * r.supervised + r.unsupervised.total;
    acc.supervised += r.supervised;
    acc.normal += r.unsupervised.normal;
    acc.tangent += r.unsupervised.tangent;
    acc.entropy += r.unsupervised.entropy;
    if (log) log->rounds.push_back(r);

    if (++in_epoch == cfg.log_every || round + 1 == cfg.rounds) {
      const double n = static_cast<double>(in_epoch);
      StudentEpoch e{log ? log->epochs.size() : 0, acc.supervised / n, acc.normal / n, acc.tangent / n,
                     acc.entropy / n, 0.0, std::numeric_limits<double>::quiet_NaN()};
      if (log) {
        e.train_accuracy = accuracy_against(net, labeled.features(), labeled.labels());
        if (test_probe) e.test_accuracy = test_probe(net);
        log->epochs.push_back(e);
      }
      acc = StudentEpoch{};
      in_epoch = 0;
    }
  }
  return net;
}

void write_student_metrics(const std::vector<StudentEpoch>& epochs, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "epoch,E_s,E_u_norm,E_u_tan,E_u_ent,train_acc,test_acc\n";
  char buf[256];
  for (const StudentEpoch& e : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g,%.6f,%.6f\n", e.epoch, e.supervised, e.normal,
                  e.tangent, e.entropy, e.train_accuracy, e.test_accuracy);
    out << buf;
  }
}

}  // namespace dgd
