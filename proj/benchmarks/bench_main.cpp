#include <benchmark/benchmark.h>

#include <vector>

#include "tcl/encoder.hpp"
#include "tcl/losses.hpp"
#include "tcl/memory_bank.hpp"
#include "tcl/rng.hpp"
#include "tcl/tensor_ops.hpp"
#include "tcl/train_config.hpp"
#include "tcl/trainer.hpp"

namespace {

using namespace tcl;

Tensor rand_rows(Rng& rng, std::size_t n, std::size_t d) {
  Tensor x = Tensor::zeros({n, d});
  for (double& v : x.values) v = rng.gaussian();
  return x;
}

Tensor unit_rows(Rng& rng, std::size_t n, std::size_t d) {
  return ops::row_l2norm(rand_rows(rng, n, d));
}

EncoderPair bench_pair(std::size_t input_dim, std::size_t classes) {
  EncoderArch arch;
  arch.input_dim = input_dim;
  arch.classes = classes;
  Rng rng(7);
  return EncoderPair::init(arch, 0.99, rng);
}

void BM_EncodeKey(benchmark::State& state) {
  const EncoderPair pair = bench_pair(256, 10);
  Rng rng(11);
  const Tensor x = rand_rows(rng, 32, 256);
  for (auto _ : state) {
    auto out = pair.encode_key(x);
    benchmark::DoNotOptimize(out.projection.values.data());
  }
}
BENCHMARK(BM_EncodeKey);

void BM_EncodeQueryForwardBackward(benchmark::State& state) {
  EncoderPair pair = bench_pair(256, 10);
  Rng rng(11);
  const Tensor x = rand_rows(rng, 32, 256);
  const std::vector<int> labels(32, 3);
  for (auto _ : state) {
    Graph g;
    const auto bind = pair.bind_query(g);
    const auto q = pair.encode_query(g, bind, x);
    const NodeId loss = nll_mean(g, q.logits, labels);
    g.backward(loss);
    pair.pull_gradients(g, bind);
    benchmark::DoNotOptimize(pair.query().items.front().second.grad.data());
  }
}
BENCHMARK(BM_EncodeQueryForwardBackward);

void BM_BankEnqueueSnapshot(benchmark::State& state) {
  Rng rng(13);
  MemoryBank bank(512, 32, 10);
  const Tensor block = unit_rows(rng, 32, 32);
  std::vector<int> labels;
  for (std::size_t i = 0; i < 32; ++i) labels.push_back(static_cast<int>(rng.below(10)));
  for (auto _ : state) {
    bank.enqueue(block, labels);
    auto view = bank.snapshot();
    benchmark::DoNotOptimize(view.keys.values.data());
  }
}
BENCHMARK(BM_BankEnqueueSnapshot);

void BM_TclMultiBuildBackward(benchmark::State& state) {
  Rng rng(17);
  const std::size_t M = 4, b = 32, K = 512, d = 32, C = 10;
  std::vector<MemoryBank::View> sbanks(M);
  for (auto& v : sbanks) {
    v.keys = unit_rows(rng, K, d);
    for (std::size_t i = 0; i < K; ++i) v.labels.push_back(static_cast<int>(rng.below(C)));
  }
  MemoryBank::View tbank;
  tbank.keys = unit_rows(rng, K, d);
  for (std::size_t i = 0; i < K; ++i) tbank.labels.push_back(static_cast<int>(rng.below(C)));
  std::vector<Tensor> srcq;
  std::vector<std::vector<int>> srcl(M);
  for (std::size_t m = 0; m < M; ++m) {
    srcq.push_back(unit_rows(rng, b, d));
    for (std::size_t i = 0; i < b; ++i) srcl[m].push_back(static_cast<int>(rng.below(C)));
  }
  const Tensor tgtq = unit_rows(rng, b, d);
  std::vector<int> tgtl;
  for (std::size_t i = 0; i < b; ++i) tgtl.push_back(static_cast<int>(rng.below(C)));

  for (auto _ : state) {
    Graph g;
    std::vector<DomainBatch> sources(M);
    std::vector<NodeId> leaves(M);
    for (std::size_t m = 0; m < M; ++m) {
      leaves[m] = g.parameter(srcq[m]);
      sources[m] = {leaves[m], &srcl[m]};
    }
    const DomainBatch target{g.parameter(tgtq), &tgtl};
    const VariantLoss v = tcl_multi(g, sources, target, sbanks, tbank, 0.05);
    g.backward(v.node);
    benchmark::DoNotOptimize(g.gradient(leaves[0]).values.data());
  }
}
BENCHMARK(BM_TclMultiBuildBackward);

void BM_TrainStepDigits(benchmark::State& state) {
  TrainConfig cfg;
  cfg.suite = "DIGITS-5";
  cfg.n_per_domain = 128;
  cfg.n_test = 64;
  cfg.batch_size = 32;
  cfg.epochs = 2;
  cfg.warmup_epochs = 1;
  cfg.lambda = 0.1;
  cfg.k_mem = 256;
  Trainer tr(cfg);
  tr.start_epoch(1);
  std::size_t step = 0;
  for (auto _ : state) {
    auto stats = tr.train_step(1, step % tr.steps_per_epoch());
    benchmark::DoNotOptimize(stats.report.total);
    ++step;
  }
}
BENCHMARK(BM_TrainStepDigits)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
