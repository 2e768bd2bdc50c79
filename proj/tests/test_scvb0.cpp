#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "topics/cvb0.hpp"
#include "topics/eval.hpp"
#include "topics/scvb0.hpp"

using namespace topics;

namespace {

// Reference for the clumped update: fold the single-token update m times with
// gamma held fixed, carried in extended precision.
Eigen::RowVectorXd iterate_doc_update(Eigen::RowVectorXd row, double doc_tokens,
                                      const Eigen::VectorXd& gamma, double rho, int m) {
  std::vector<long double> acc(static_cast<std::size_t>(row.size()));
  for (Eigen::Index k = 0; k < row.size(); ++k) acc[static_cast<std::size_t>(k)] = row[k];
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < row.size(); ++k) {
      acc[static_cast<std::size_t>(k)] =
          (1.0L - static_cast<long double>(rho)) * acc[static_cast<std::size_t>(k)] +
          static_cast<long double>(rho) * static_cast<long double>(doc_tokens) *
              static_cast<long double>(gamma[k]);
    }
  }
  for (Eigen::Index k = 0; k < row.size(); ++k) {
    row[k] = static_cast<double>(acc[static_cast<std::size_t>(k)]);
  }
  return row;
}

ModelStats example_stats() {
  ModelStats stats;
  stats.n_phi.resize(2, 2);
  stats.n_phi << 1.0, 1.0, 0.5, 0.5;
  stats.n_z.resize(2);
  stats.n_z << 2.0, 2.0;
  stats.n_theta.resize(1, 2);
  stats.n_theta << 3.0, 1.0;
  return stats;
}

}  // namespace

TEST_CASE("gamma_update evaluates the collapsed responsibility") {
  const ModelStats stats = example_stats();
  const HyperParams hyper = HyperParams::symmetric(1.0, 1.0, 2);
  const Eigen::VectorXd gamma = gamma_update(stats, 0, 0, hyper);
  CHECK(std::abs(gamma[0] - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(gamma[1] - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("gamma_update is uniform on symmetric statistics") {
  ModelStats stats;
  stats.n_phi = RowMajorMatrixXd::Constant(3, 4, 2.0);
  stats.n_z = Eigen::VectorXd::Constant(4, 6.0);
  stats.n_theta = RowMajorMatrixXd::Constant(1, 4, 1.5);
  const HyperParams hyper = HyperParams::symmetric(0.3, 0.2, 3);
  const Eigen::VectorXd gamma = gamma_update(stats, 0, 1, hyper);
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(gamma[k] - 0.25) < 1e-15);
}

TEST_CASE("gamma_update equals the excluded update on pre-excluded statistics") {
  // State whose statistics already have one token's worth removed.
  const ModelStats excluded = example_stats();
  const HyperParams hyper = HyperParams::symmetric(1.0, 1.0, 2);
  const Eigen::VectorXd direct = gamma_update(excluded, 0, 0, hyper);

  // The same statistics with gamma_old = (1, 0), m = 1 folded back in.
  ModelStats full = excluded;
  Eigen::VectorXd gamma_old(2);
  gamma_old << 1.0, 0.0;
  full.n_phi.row(0) += gamma_old.transpose();
  full.n_z += gamma_old;
  full.n_theta.row(0) += gamma_old.transpose();
  const Eigen::VectorXd via_exclusion =
      excluded_responsibility(full, 0, 0, gamma_old, 1.0, hyper);
  CHECK((direct - via_exclusion).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("update_doc_stats mixes toward the scaled responsibility") {
  Eigen::RowVectorXd row(2);
  row << 3.0, 1.0;
  Eigen::VectorXd gamma(2);
  gamma << 0.5, 0.5;
  update_doc_stats(row, 4.0, gamma, 0.5);
  CHECK(row[0] == 2.5);
  CHECK(row[1] == 1.5);

  // Full replacement at rho = 1.
  row << 3.0, 1.0;
  update_doc_stats(row, 4.0, gamma, 1.0);
  CHECK(row[0] == 2.0);
  CHECK(row[1] == 2.0);

  // gamma proportional to the row is a fixed point.
  row << 3.0, 1.0;
  gamma << 0.75, 0.25;
  update_doc_stats(row, 4.0, gamma, 0.37);
  CHECK(std::abs(row[0] - 3.0) < 1e-12);
  CHECK(std::abs(row[1] - 1.0) < 1e-12);
}

TEST_CASE("update_doc_stats preserves the document total") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> rho_dist(1e-3, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(trial % 6);
    const double doc_tokens = 1.0 + static_cast<double>(trial % 40);
    Eigen::RowVectorXd row = (doc_tokens * test::random_simplex(k, rng)).transpose();
    const Eigen::VectorXd gamma = test::random_simplex(k, rng);
    update_doc_stats(row, doc_tokens, gamma, rho_dist(rng));
    CHECK(std::abs(row.sum() - doc_tokens) < 1e-9 * doc_tokens);
    CHECK(row.minCoeff() >= 0.0);
  }
}

TEST_CASE("clumped_doc_update matches iterated single updates") {
  Eigen::RowVectorXd row(2);
  row << 3.0, 1.0;
  Eigen::VectorXd gamma(2);
  gamma << 0.5, 0.5;

  // m = 1 reduces to the single update.
  Eigen::RowVectorXd single = row;
  update_doc_stats(single, 4.0, gamma, 0.5);
  Eigen::RowVectorXd clumped = row;
  clumped_doc_update(clumped, 4.0, gamma, 0.5, 1);
  CHECK((single - clumped).cwiseAbs().maxCoeff() == 0.0);

  // m = 2 hand value: 0.25 * (3,1) + 0.75 * (2,2).
  clumped = row;
  clumped_doc_update(clumped, 4.0, gamma, 0.5, 2);
  CHECK(std::abs(clumped[0] - 2.25) < 1e-15);
  CHECK(std::abs(clumped[1] - 1.75) < 1e-15);

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> rho_dist(1e-3, 1.0);
  std::uniform_int_distribution<int> m_dist(1, 50);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(trial % 5);
    const double doc_tokens = 1.0 + static_cast<double>(trial % 30);
    const Eigen::RowVectorXd start = (doc_tokens * test::random_simplex(k, rng)).transpose();
    const Eigen::VectorXd g = test::random_simplex(k, rng);
    const double rho = rho_dist(rng);
    const int m = m_dist(rng);
    Eigen::RowVectorXd fast = start;
    clumped_doc_update(fast, doc_tokens, g, rho, m);
    const Eigen::RowVectorXd slow = iterate_doc_update(start, doc_tokens, g, rho, m);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(clumped_doc_update(row, 4.0, gamma, 0.5, 0), ConfigError);
}

TEST_CASE("accumulate_token weights clumped entries by multiplicity") {
  MinibatchAccumulator acc(4, 2);
  Eigen::VectorXd gamma(2);
  gamma << 0.25, 0.75;
  accumulate_token(acc, 2, gamma, 10.0, 3);
  CHECK(acc.token_count() == 3);
  CHECK(std::abs(acc.row(2)[0] - 7.5) < 1e-12);
  CHECK(std::abs(acc.row(2)[1] - 22.5) < 1e-12);
  CHECK(std::abs(acc.n_hat_z().sum() - 30.0) < 1e-12);
}

TEST_CASE("minibatch_update mixes the statistics and resets the accumulator") {
  ModelStats stats;
  stats.n_phi = RowMajorMatrixXd::Constant(3, 1, 10.0);
  stats.n_z = Eigen::VectorXd::Constant(1, 30.0);
  stats.n_theta = RowMajorMatrixXd::Zero(1, 1);

  MinibatchAccumulator acc(3, 1);
  Eigen::VectorXd gamma(1);
  gamma << 1.0;
  accumulate_token(acc, 0, gamma, 20.0, 1);  // estimate row = 20
  minibatch_update(stats, acc, 0.1);
  CHECK(std::abs(stats.n_phi(0, 0) - 11.0) < 1e-12);  // 0.9*10 + 0.1*20
  CHECK(std::abs(stats.n_phi(1, 0) - 9.0) < 1e-12);   // untouched row decays
  CHECK(acc.token_count() == 0);

  // rho = 1 replaces everything.
  accumulate_token(acc, 1, gamma, 20.0, 1);
  minibatch_update(stats, acc, 1.0);
  CHECK(stats.n_phi(1, 0) == 20.0);
  CHECK(stats.n_phi(0, 0) == 0.0);
  CHECK(stats.n_z[0] == 20.0);

  CHECK_THROWS_AS(minibatch_update(stats, acc, 0.5), ConfigError);
}

TEST_CASE("minibatch_update keeps topic totals consistent with column sums") {
  std::mt19937_64 rng(29);
  ModelStats stats = test::random_stats(rng, 6, 3, 1);
  MinibatchAccumulator acc(6, 3);
  std::uniform_int_distribution<Eigen::Index> word(0, 5);
  std::uniform_real_distribution<double> rho_dist(0.05, 1.0);
  for (int round = 0; round < 30; ++round) {
    for (int i = 0; i < 20; ++i) {
      accumulate_token(acc, word(rng), test::random_simplex(3, rng), 100.0, 1);
    }
    minibatch_update(stats, acc, rho_dist(rng));
    const Eigen::VectorXd colsums = stats.n_phi.colwise().sum().transpose();
    CHECK((colsums - stats.n_z).cwiseAbs().maxCoeff() <
          1e-8 * std::max(1.0, stats.n_z.maxCoeff()));
  }
}

TEST_CASE("trainer composition matches a dense by-hand replay") {
  // Single-entry documents so entry shuffling inside a pass is a no-op and
  // the update sequence can be replayed with the public pieces.
  const Corpus corpus = test::make_corpus(4, {{{0, 2}}, {{1, 3}}, {{2, 1}}});
  const HyperParams hyper = HyperParams::symmetric(0.4, 0.3, 4);
  Scvb0Config config{2, hyper};
  config.minibatch_docs = 2;  // one full batch plus a ragged one
  config.burn_in_passes = 1;
  config.epochs = 1;
  config.seed = 123;

  Scvb0Trainer trainer(corpus, config);
  const ModelStats result = trainer.train();

  // Replay: same init, same document order, dense updates.
  ModelStats stats = init_stats(corpus, 2, mix_seed(123, 0x1717));
  std::mt19937_64 rng(123);
  std::vector<Eigen::Index> order(3);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  // Each document has one entry, but the trainer still draws its per-pass
  // shuffles from the same stream; mirror those draws.
  MinibatchAccumulator acc(4, 2);
  std::int64_t phi_step = 1;
  int in_batch = 0;
  for (Eigen::Index j : order) {
    const auto& doc = corpus.docs[static_cast<std::size_t>(j)];
    std::vector<Eigen::Index> entry_order(doc.entries.size());
    std::int64_t theta_step = 1;  // restarts at each document visit
    for (int pass = 0; pass <= config.burn_in_passes; ++pass) {
      std::iota(entry_order.begin(), entry_order.end(), Eigen::Index{0});
      std::shuffle(entry_order.begin(), entry_order.end(), rng);
      const auto& entry = doc.entries[0];
      const Eigen::VectorXd gamma = gamma_update(stats, j, entry.word, hyper);
      clumped_doc_update(stats.n_theta.row(j), static_cast<double>(doc.tokens), gamma,
                         config.theta_schedule.rho(theta_step), entry.count);
      theta_step += entry.count;
      if (pass == config.burn_in_passes) {
        accumulate_token(acc, entry.word, gamma, static_cast<double>(corpus.total_tokens),
                         entry.count);
      }
    }
    if (++in_batch == config.minibatch_docs) {
      minibatch_update(stats, acc, config.phi_schedule.rho(phi_step++));
      in_batch = 0;
    }
  }
  if (in_batch > 0) minibatch_update(stats, acc, config.phi_schedule.rho(phi_step++));

  CHECK((result.n_phi - stats.n_phi).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((result.n_z - stats.n_z).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((result.n_theta - stats.n_theta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero epochs returns the initial statistics") {
  const Corpus corpus = test::make_corpus(3, {{{0, 2}, {1, 1}}, {{2, 3}}});
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 3);
  Scvb0Config config{2, hyper};
  config.epochs = 0;
  config.seed = 9;
  Scvb0Trainer trainer(corpus, config);
  int checkpoints = 0;
  const ModelStats result = trainer.train({}, [&](const ModelStats& stats, const TrainProgress& p) {
    ++checkpoints;
    CHECK(p.docs_seen == 0);
    CHECK(stats == init_stats(corpus, 2, mix_seed(9, 0x1717)));
  });
  CHECK(checkpoints == 1);
  CHECK(result == init_stats(corpus, 2, mix_seed(9, 0x1717)));
}

TEST_CASE("single doc with forced full replacement leaves the accumulator mean") {
  const Corpus corpus = test::make_corpus(3, {{{0, 2}, {2, 1}}});
  const HyperParams hyper = HyperParams::symmetric(0.2, 0.1, 3);
  Scvb0Config config{2, hyper};
  config.phi_schedule = {1.0, 0.0, 1.0};  // rho_1 = 1
  config.minibatch_docs = 1;
  config.burn_in_passes = 0;
  config.epochs = 1;
  config.seed = 4;
  Scvb0Trainer trainer(corpus, config);
  const ModelStats result = trainer.train();

  // After a full-replacement minibatch, n_phi rows are the supplied
  // estimates: rows of words in the doc get (m * C * gamma) / token_count.
  CHECK(result.n_z.sum() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(result.n_phi.row(1).maxCoeff() == 0.0);
  const Eigen::VectorXd colsums = result.n_phi.colwise().sum().transpose();
  CHECK((colsums - result.n_z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("training keeps document totals and stays inside the token budget") {
  const SyntheticCorpus synth = synth_corpus(3, 20, 60, 15, 0.2, 0.2, 55);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 20);
  Scvb0Config config{3, hyper};
  config.minibatch_docs = 7;
  config.epochs = 4;
  config.seed = 21;
  Scvb0Trainer trainer(synth.corpus, config);
  const auto doc_tokens = doc_token_counts(synth.corpus);
  trainer.minibatch_observer = [&](const ModelStats& stats, const TrainProgress&) {
    for (Eigen::Index j = 0; j < stats.n_docs(); ++j) {
      const double expect = static_cast<double>(doc_tokens[static_cast<std::size_t>(j)]);
      CHECK(std::abs(stats.n_theta.row(j).sum() - expect) <= 1e-9 * expect);
    }
    CHECK(stats.n_z.sum() <= static_cast<double>(synth.corpus.total_tokens) + 1e-6);
  };
  trainer.train();
}

TEST_CASE("every responsibility during training is a simplex") {
  const SyntheticCorpus synth = synth_corpus(4, 15, 30, 12, 0.3, 0.3, 77);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 15);
  ModelStats stats = init_stats(synth.corpus, 4, 1);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index j = std::uniform_int_distribution<Eigen::Index>(
        0, synth.corpus.n_docs() - 1)(rng);
    const auto& entries = synth.corpus.docs[static_cast<std::size_t>(j)].entries;
    const auto& entry = entries[std::uniform_int_distribution<std::size_t>(
        0, entries.size() - 1)(rng)];
    const Eigen::VectorXd gamma = gamma_update(stats, j, entry.word, hyper);
    CHECK(is_simplex(gamma, 1e-12));
  }
}

TEST_CASE("trainer is deterministic under the seed") {
  const SyntheticCorpus synth = synth_corpus(3, 12, 40, 10, 0.2, 0.2, 5);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 12);
  Scvb0Config config{3, hyper};
  config.epochs = 2;
  config.minibatch_docs = 9;
  config.seed = 31;
  const ModelStats a = Scvb0Trainer(synth.corpus, config).train();
  const ModelStats b = Scvb0Trainer(synth.corpus, config).train();
  CHECK(a == b);
  config.seed = 32;
  const ModelStats c = Scvb0Trainer(synth.corpus, config).train();
  CHECK(!(a == c));
}

TEST_CASE("a global theta step counter is available as an option") {
  const SyntheticCorpus synth = synth_corpus(2, 10, 20, 8, 0.3, 0.3, 8);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 10);
  Scvb0Config config{2, hyper};
  config.epochs = 1;
  config.seed = 3;
  const ModelStats per_doc = Scvb0Trainer(synth.corpus, config).train();
  config.theta_step_global = true;
  const ModelStats global_counter = Scvb0Trainer(synth.corpus, config).train();
  CHECK(!(global_counter == per_doc));
}

TEST_CASE("config validation rejects bad schedules and sizes") {
  const Corpus corpus = test::make_corpus(2, {{{0, 1}}});
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 2);
  Scvb0Config config{1, hyper};
  config.phi_schedule = {2.0, 0.0, 1.0};
  CHECK_THROWS_AS(Scvb0Trainer(corpus, config), ConfigError);
  config.phi_schedule = {1.0, 0.0, 1.0};
  config.minibatch_docs = 0;
  CHECK_THROWS_AS(Scvb0Trainer(corpus, config), ConfigError);
  config.minibatch_docs = 1;
  config.n_topics = 0;
  CHECK_THROWS_AS(Scvb0Trainer(corpus, config), ConfigError);
}

TEST_CASE("held-out likelihood improves over the initialization") {
  const SyntheticCorpus synth = synth_corpus(5, 50, 300, 30, 0.1, 0.08, 404);
  const HoldoutSplit split = holdout_split(synth.corpus, 50, 11);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.01, 50);

  Scvb0Config config{5, hyper};
  config.epochs = 5;
  config.seed = 12;
  Scvb0Trainer trainer(split.train, config);

  EvalConfig eval_config;
  eval_config.seed = 90;
  const Eigen::MatrixXd phi_init =
      recover_topics(trainer.snapshot(), hyper, RecoveryMode::kVariationalMean);
  const double ll_init =
      heldout_loglik(phi_init, split.test.docs, hyper.alpha(), eval_config).ll_per_token;

  const ModelStats trained = trainer.train();
  const Eigen::MatrixXd phi_trained =
      recover_topics(trained, hyper, RecoveryMode::kVariationalMean);
  const double ll_trained =
      heldout_loglik(phi_trained, split.test.docs, hyper.alpha(), eval_config).ll_per_token;

  CHECK(ll_trained > ll_init);
}
