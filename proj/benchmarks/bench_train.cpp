#include <benchmark/benchmark.h>

#include "topics/corpus.hpp"
#include "topics/scvb0.hpp"
#include "topics/svb.hpp"

using namespace topics;

namespace {

const Corpus& bench_corpus() {
  static const SyntheticCorpus synth = synth_corpus(20, 2000, 1000, 80, 0.1, 0.05, 42);
  return synth.corpus;
}

}  // namespace

// Documents per second through the collapsed trainer, burn-in included.
static void Scvb0Documents(benchmark::State& state) {
  const Corpus& corpus = bench_corpus();
  Scvb0Config config{state.range(0), HyperParams::symmetric(0.1, 0.01, corpus.n_words())};
  config.seed = 7;
  Scvb0Trainer trainer(corpus, config);
  Eigen::Index doc = 0;
  std::int64_t tokens = 0;
  for (auto _ : state) {
    trainer.process_document(doc);
    tokens += corpus.docs[static_cast<std::size_t>(doc)].tokens;
    doc = (doc + 1) % corpus.n_docs();
    if (doc % config.minibatch_docs == 0) trainer.finish_minibatch();
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["tokens/s"] =
      benchmark::Counter(static_cast<double>(tokens), benchmark::Counter::kIsRate);
}
BENCHMARK(Scvb0Documents)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

// One uncollapsed epoch: local steps plus the dense natural-gradient mixes.
static void SvbEpoch(benchmark::State& state) {
  const Corpus& corpus = bench_corpus();
  SvbConfig config{state.range(0), HyperParams::symmetric(0.1, 0.01, corpus.n_words())};
  config.hyper_offset = 0.5;
  config.epochs = 1;
  config.seed = 7;
  for (auto _ : state) {
    state.PauseTiming();
    SvbTrainer trainer(corpus, config);
    state.ResumeTiming();
    trainer.train();
  }
  state.SetItemsProcessed(state.iterations() * corpus.n_docs());
}
BENCHMARK(SvbEpoch)->Arg(20)->Unit(benchmark::kMillisecond);
