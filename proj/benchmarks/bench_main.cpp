#include <benchmark/benchmark.h>

#include "dgd/accountant.hpp"
#include "dgd/aggregation.hpp"
#include "dgd/autodiff.hpp"
#include "dgd/network.hpp"
#include "dgd/rng.hpp"

namespace {

dgd::Tensor random_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
  dgd::Rng rng(seed);
  dgd::Tensor t(dgd::Shape{n, d});
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

void BM_Forward(benchmark::State& state) {
  const auto arch = dgd::Architecture::parse("64-dense:64-relu-dense:10-softmax");
  const auto net = dgd::xavier_init(arch, 1);
  const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dgd::forward(net, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  const auto arch = dgd::Architecture::parse("64-dense:64-relu-dense:10-softmax");
  const auto net = dgd::xavier_init(arch, 1);
  const auto batch = random_batch(128, 64, 2);
  std::vector<std::size_t> labels(128);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 10;
  for (auto _ : state) {
    dgd::ad::Graph g;
    auto bound = dgd::bind(g, net, dgd::Trainable::yes);
    auto out = dgd::apply(bound, g.constant(batch));
    auto loss = dgd::ad::cross_entropy(out.logits, labels);
    g.backward(loss);
    benchmark::DoNotOptimize(dgd::collect_gradients(g, bound));
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_NoisyArgmax(benchmark::State& state) {
  dgd::VoteHistogram h{{8, 5, 3, 2, 1, 1, 0, 0, 0, 0}};
  dgd::AggregationConfig cfg;
  dgd::Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(dgd::noisy_argmax(h, cfg, rng));
}
BENCHMARK(BM_NoisyArgmax);

void BM_MomentsAccountant(benchmark::State& state) {
  dgd::PrivacyLedger ledger;
  ledger.query_count = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(dgd::report_min(ledger));
}
BENCHMARK(BM_MomentsAccountant);

}  // namespace

BENCHMARK_MAIN();
