#include <benchmark/benchmark.h>

#include <random>

#include "topics/model.hpp"
#include "topics/scvb0.hpp"
#include "topics/svb.hpp"

using namespace topics;

namespace {

ModelStats bench_stats(Eigen::Index n_words, Eigen::Index n_topics, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.1, 5.0);
  ModelStats stats;
  stats.n_phi.resize(n_words, n_topics);
  for (Eigen::Index w = 0; w < n_words; ++w) {
    for (Eigen::Index k = 0; k < n_topics; ++k) stats.n_phi(w, k) = mass(rng);
  }
  stats.n_z = stats.n_phi.colwise().sum().transpose();
  stats.n_theta.resize(1, n_topics);
  for (Eigen::Index k = 0; k < n_topics; ++k) stats.n_theta(0, k) = mass(rng);
  return stats;
}

}  // namespace

static void TokenResponsibility(benchmark::State& state) {
  const Eigen::Index n_topics = state.range(0);
  const Eigen::Index n_words = 2000;
  const ModelStats stats = bench_stats(n_words, n_topics, 1);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, n_words);
  Eigen::Index word = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamma_update(stats, 0, word, hyper));
    word = (word + 1) % n_words;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(TokenResponsibility)->Arg(10)->Arg(20)->Arg(50)->Arg(100)->Arg(500);

static void ClumpedDocUpdate(benchmark::State& state) {
  const Eigen::Index n_topics = state.range(0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  Eigen::VectorXd gamma(n_topics);
  for (Eigen::Index k = 0; k < n_topics; ++k) gamma[k] = unit(rng);
  gamma /= gamma.sum();
  Eigen::RowVectorXd row = (80.0 * gamma).transpose();
  for (auto _ : state) {
    clumped_doc_update(row, 80.0, gamma, 0.05, 3);
    benchmark::DoNotOptimize(row.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(ClumpedDocUpdate)->Arg(10)->Arg(100)->Arg(500);

static void MinibatchClose(benchmark::State& state) {
  const Eigen::Index n_topics = 20;
  const Eigen::Index n_words = state.range(0);
  ModelStats stats = bench_stats(n_words, n_topics, 3);
  stats.n_theta.resize(0, n_topics);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Eigen::Index> word(0, n_words - 1);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  Eigen::VectorXd gamma(n_topics);
  for (Eigen::Index k = 0; k < n_topics; ++k) gamma[k] = unit(rng);
  gamma /= gamma.sum();

  MinibatchAccumulator acc(n_words, n_topics);
  for (auto _ : state) {
    state.PauseTiming();
    for (int i = 0; i < 5000; ++i) accumulate_token(acc, word(rng), gamma, 160000.0, 1);
    state.ResumeTiming();
    minibatch_update(stats, acc, 0.02);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(MinibatchClose)->Arg(2000)->Arg(20000);

static void Digamma(benchmark::State& state) {
  double x = 0.013;
  for (auto _ : state) {
    benchmark::DoNotOptimize(digamma(x));
    x += 0.37;
    if (x > 500.0) x -= 500.0;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(Digamma);
