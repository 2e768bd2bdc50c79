#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "topics/model.hpp"

using namespace topics;

TEST_CASE("HyperParams validates and tracks eta_sum") {
  const HyperParams h = HyperParams::symmetric(0.1, 0.01, 5);
  CHECK(h.alpha() == 0.1);
  CHECK(h.eta(3) == 0.01);
  CHECK(std::abs(h.eta_sum() - 0.05) < 1e-15);
  CHECK(h.n_words() == 5);

  CHECK_THROWS_AS(HyperParams::symmetric(0.0, 0.01, 5), ConfigError);
  CHECK_THROWS_AS(HyperParams::symmetric(0.1, -0.01, 5), ConfigError);
  Eigen::VectorXd eta(3);
  eta << 0.1, 0.0, 0.2;
  CHECK_THROWS_AS(HyperParams(0.1, eta), ConfigError);

  const HyperParams shifted = h.shifted(1.0);
  CHECK(shifted.alpha() == 1.1);
  CHECK(shifted.eta(0) == 1.01);
}

TEST_CASE("init_stats with one topic reproduces corpus counts") {
  const Corpus corpus = test::make_corpus(4, {{{0, 2}, {2, 1}}, {{1, 4}, {3, 3}}});
  const ModelStats stats = init_stats(corpus, 1, 42);
  CHECK(stats.n_phi(0, 0) == 2.0);
  CHECK(stats.n_phi(1, 0) == 4.0);
  CHECK(stats.n_phi(2, 0) == 1.0);
  CHECK(stats.n_phi(3, 0) == 3.0);
  CHECK(stats.n_theta(0, 0) == 3.0);
  CHECK(stats.n_theta(1, 0) == 7.0);
  CHECK(stats.n_z[0] == 10.0);
}

TEST_CASE("init_stats assigns every token exactly once") {
  std::mt19937_64 rng(3);
  const Corpus corpus = test::random_corpus(rng, 20, 9, 30);
  for (Eigen::Index k : {1, 2, 5}) {
    const ModelStats stats = init_stats(corpus, k, 7);
    CHECK(stats.n_z.sum() == static_cast<double>(corpus.total_tokens));
    const auto doc_tokens = doc_token_counts(corpus);
    CHECK(check_stats(stats, doc_tokens, static_cast<double>(corpus.total_tokens)).empty());
    // Integer counts, exact consistency.
    CHECK((stats.n_phi.colwise().sum().transpose() - stats.n_z).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index j = 0; j < corpus.n_docs(); ++j) {
      CHECK(stats.n_theta.row(j).sum() ==
            static_cast<double>(corpus.docs[static_cast<std::size_t>(j)].tokens));
    }
  }
  CHECK(init_stats(corpus, 3, 7) == init_stats(corpus, 3, 7));
  CHECK(init_stats(corpus, 3, 7) != init_stats(corpus, 3, 8));
}

TEST_CASE("check_stats reports violations") {
  std::mt19937_64 rng(5);
  ModelStats stats = test::random_stats(rng, 4, 2, 3);
  const std::vector<std::int64_t> doc_tokens = {0, 0, 0};  // wrong totals
  CHECK(!check_stats(stats, doc_tokens, 1e9).empty());
  stats.n_z[0] += 1.0;  // break column consistency
  CHECK(!check_stats(stats, {}, 1e9).empty());
}

TEST_CASE("recover_topics variational mean matches the direct formula") {
  ModelStats stats;
  stats.n_phi.resize(2, 2);
  stats.n_phi << 3.0, 0.0, 1.0, 0.0;
  stats.n_z.resize(2);
  stats.n_z << 4.0, 0.0;
  stats.n_theta.resize(1, 2);
  stats.n_theta << 2.0, 2.0;
  const HyperParams hyper = HyperParams::symmetric(1.0, 1.0, 2);
  const Eigen::MatrixXd phi = recover_topics(stats, hyper, RecoveryMode::kVariationalMean);
  CHECK(std::abs(phi(0, 0) - 4.0 / 6.0) < 1e-15);
  CHECK(std::abs(phi(0, 1) - 2.0 / 6.0) < 1e-15);
}

TEST_CASE("recover_topics with zero stats and symmetric prior is uniform") {
  ModelStats stats;
  stats.n_phi = RowMajorMatrixXd::Zero(5, 3);
  stats.n_z = Eigen::VectorXd::Zero(3);
  stats.n_theta = RowMajorMatrixXd::Zero(2, 3);
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.7, 5);
  const Eigen::MatrixXd phi = recover_topics(stats, hyper, RecoveryMode::kVariationalMean);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (Eigen::Index w = 0; w < 5; ++w) CHECK(std::abs(phi(k, w) - 0.2) < 1e-15);
  }
}

TEST_CASE("MAP recovery with unit priors is pure normalization") {
  std::mt19937_64 rng(8);
  const ModelStats stats = test::random_stats(rng, 6, 3, 4);
  const HyperParams hyper = HyperParams::symmetric(1.0, 1.0, 6);
  const Eigen::MatrixXd phi = recover_topics(stats, hyper, RecoveryMode::kMap);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (Eigen::Index w = 0; w < 6; ++w) {
      CHECK(std::abs(phi(k, w) - stats.n_phi(w, k) / stats.n_z[k]) < 1e-12);
    }
  }
  const std::vector<std::int64_t> doc_tokens = {10, 10, 10, 10};
  ModelStats theta_stats = stats;
  for (Eigen::Index j = 0; j < 4; ++j) {
    theta_stats.n_theta.row(j) *= 10.0 / theta_stats.n_theta.row(j).sum();
  }
  const Eigen::MatrixXd theta =
      recover_theta(theta_stats, hyper, doc_tokens, RecoveryMode::kMap);
  for (Eigen::Index j = 0; j < 4; ++j) {
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(std::abs(theta(j, k) - theta_stats.n_theta(j, k) / 10.0) < 1e-12);
    }
  }
}

TEST_CASE("MAP recovery rejects priors below one") {
  std::mt19937_64 rng(9);
  const ModelStats stats = test::random_stats(rng, 4, 2, 2);
  const HyperParams hyper = HyperParams::symmetric(0.5, 0.5, 4);
  CHECK_THROWS_AS(recover_topics(stats, hyper, RecoveryMode::kMap), ConfigError);
  const std::vector<std::int64_t> doc_tokens = {3, 3};
  CHECK_THROWS_AS(recover_theta(stats, hyper, doc_tokens, RecoveryMode::kMap), ConfigError);
}

TEST_CASE("recover_theta variational mean matches the direct formula") {
  ModelStats stats;
  stats.n_phi = RowMajorMatrixXd::Zero(2, 2);
  stats.n_z = Eigen::VectorXd::Zero(2);
  stats.n_theta.resize(1, 2);
  stats.n_theta << 3.0, 1.0;
  const HyperParams hyper = HyperParams::symmetric(0.1, 0.5, 2);
  const std::vector<std::int64_t> doc_tokens = {4};
  const Eigen::MatrixXd theta =
      recover_theta(stats, hyper, doc_tokens, RecoveryMode::kVariationalMean);
  CHECK(std::abs(theta(0, 0) - 3.1 / 4.2) < 1e-15);
  CHECK(std::abs(theta(0, 1) - 1.1 / 4.2) < 1e-15);

  // Uniform counts recover uniform weights.
  stats.n_theta << 2.0, 2.0;
  const Eigen::MatrixXd uniform =
      recover_theta(stats, hyper, doc_tokens, RecoveryMode::kVariationalMean);
  CHECK(std::abs(uniform(0, 0) - 0.5) < 1e-15);
}

TEST_CASE("recovered rows are simplices for random statistics") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelStats stats = test::random_stats(rng, 7, 4, 5);
    const HyperParams hyper = HyperParams::symmetric(0.2, 0.05, 7);
    const Eigen::MatrixXd phi = recover_topics(stats, hyper, RecoveryMode::kVariationalMean);
    for (Eigen::Index k = 0; k < phi.rows(); ++k) {
      CHECK(std::abs(phi.row(k).sum() - 1.0) <= 1e-9);
      CHECK(phi.row(k).minCoeff() >= 0.0);
    }
    std::vector<std::int64_t> doc_tokens;
    for (Eigen::Index j = 0; j < 5; ++j) {
      doc_tokens.push_back(static_cast<std::int64_t>(stats.n_theta.row(j).sum()));
    }
    const Eigen::MatrixXd theta =
        recover_theta(stats, hyper, doc_tokens, RecoveryMode::kVariationalMean);
    for (Eigen::Index j = 0; j < theta.rows(); ++j) {
      CHECK(std::abs(theta.row(j).sum() - 1.0) <= 1e-9);
      CHECK(theta.row(j).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("topic_responsibility normalizes, guards, and falls back") {
  ModelStats stats;
  stats.n_phi = RowMajorMatrixXd::Zero(2, 3);
  stats.n_z = Eigen::VectorXd::Zero(3);
  stats.n_theta = RowMajorMatrixXd::Zero(1, 3);
  // Symmetric inputs give the uniform vector.
  const Eigen::VectorXd uniform = topic_responsibility(
      stats.n_phi.row(0), stats.n_z, stats.n_theta.row(0), 0.5, 1.5, 0.25);
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(std::abs(uniform[k] - 1.0 / 3.0) < 1e-15);

  // All-zero unnormalized vector: throws unless the fallback is requested.
  CHECK_THROWS_AS(topic_responsibility(stats.n_phi.row(0), stats.n_z, stats.n_theta.row(0),
                                       0.0, 1.0, 0.0),
                  NumericError);
  const Eigen::VectorXd fallback = topic_responsibility(
      stats.n_phi.row(0), stats.n_z, stats.n_theta.row(0), 0.0, 1.0, 0.0, true);
  CHECK(is_simplex(fallback, 1e-12));
}

TEST_CASE("minibatch accumulator tracks rows, totals, and token count") {
  MinibatchAccumulator acc(5, 2);
  Eigen::VectorXd gamma(2);
  gamma << 1.0, 0.0;
  acc.add(3, 10.0 * gamma, 1);
  CHECK(acc.token_count() == 1);
  CHECK(acc.row(3)[0] == 10.0);
  CHECK(acc.row(3)[1] == 0.0);
  CHECK(acc.n_hat_z()[0] == 10.0);
  CHECK(acc.row(0).isZero());

  Eigen::VectorXd other(2);
  other << 0.0, 1.0;
  acc.add(3, 10.0 * other, 1);
  CHECK(acc.row(3)[0] == 10.0);
  CHECK(acc.row(3)[1] == 10.0);
  CHECK(acc.touched_words().size() == 1);

  acc.reset();
  CHECK(acc.token_count() == 0);
  CHECK(acc.n_hat_z().isZero());
  CHECK(acc.touched_words().empty());
  CHECK(!acc.touched(3));
}

TEST_CASE("accumulator column sums always match the topic totals") {
  std::mt19937_64 rng(21);
  MinibatchAccumulator acc(8, 3);
  std::uniform_int_distribution<Eigen::Index> word(0, 7);
  for (int i = 0; i < 300; ++i) {
    const Eigen::VectorXd gamma = test::random_simplex(3, rng);
    acc.add(word(rng), 50.0 * gamma, 1);
  }
  Eigen::VectorXd colsums = Eigen::VectorXd::Zero(3);
  for (Eigen::Index w : acc.touched_words()) colsums += acc.row(w);
  CHECK((colsums - acc.n_hat_z()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(acc.token_count() == 300);
}
