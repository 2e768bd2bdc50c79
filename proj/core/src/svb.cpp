#include "topics/svb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "topics/errors.hpp"

namespace topics {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kPhiNormFloor = 1e-100;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw ConfigError("digamma: requires x > 0");
  double result = 0.0;
  while (x < 8.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli series through x^-12; truncation below 2e-14 for x >= 8.
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
  return result + std::log(x) - 0.5 * inv - series;
}

Eigen::MatrixXd exp_dirichlet_expectation(const Eigen::MatrixXd& params) {
  Eigen::MatrixXd out(params.rows(), params.cols());
  for (Eigen::Index r = 0; r < params.rows(); ++r) {
    const double psi_total = digamma(params.row(r).sum());
    for (Eigen::Index c = 0; c < params.cols(); ++c) {
      out(r, c) = std::exp(digamma(params(r, c)) - psi_total);
    }
  }
  return out;
}

SvbLocalResult svb_local_step(const Document& doc, const Eigen::MatrixXd& exp_elog_beta,
                              double alpha, int max_iters, double tol) {
  if (max_iters < 1) throw ConfigError("svb_local_step: max_iters must be >= 1");
  const Eigen::Index n_topics = exp_elog_beta.rows();
  const auto n_entries = static_cast<Eigen::Index>(doc.entries.size());

  Eigen::MatrixXd beta_local(n_topics, n_entries);
  Eigen::VectorXd counts(n_entries);
  for (Eigen::Index t = 0; t < n_entries; ++t) {
    beta_local.col(t) = exp_elog_beta.col(doc.entries[static_cast<std::size_t>(t)].word);
    counts[t] = static_cast<double>(doc.entries[static_cast<std::size_t>(t)].count);
  }

  SvbLocalResult result;
  result.doc_gamma = Eigen::VectorXd::Constant(
      n_topics, alpha + static_cast<double>(doc.tokens) / static_cast<double>(n_topics));
  Eigen::VectorXd exp_elog_theta(n_topics);
  auto refresh_theta = [&] {
    const double psi_total = digamma(result.doc_gamma.sum());
    for (Eigen::Index k = 0; k < n_topics; ++k) {
      exp_elog_theta[k] = std::exp(digamma(result.doc_gamma[k]) - psi_total);
    }
  };
  refresh_theta();

  Eigen::VectorXd phinorm(n_entries);
  for (int iter = 1; iter <= max_iters; ++iter) {
    result.iterations = iter;
    phinorm = (beta_local.transpose() * exp_elog_theta).array() + kPhiNormFloor;
    const Eigen::VectorXd updated =
        Eigen::VectorXd::Constant(n_topics, alpha).array() +
        exp_elog_theta.array() *
            (beta_local * (counts.array() / phinorm.array()).matrix()).array();
    const double mean_change = (updated - result.doc_gamma).cwiseAbs().mean();
    result.doc_gamma = updated;
    refresh_theta();
    if (mean_change < tol) break;
  }

  phinorm = (beta_local.transpose() * exp_elog_theta).array() + kPhiNormFloor;
  result.responsibilities.resize(n_entries, n_topics);
  for (Eigen::Index t = 0; t < n_entries; ++t) {
    result.responsibilities.row(t) =
        (exp_elog_theta.array() * beta_local.col(t).array()).transpose() / phinorm[t];
  }
  return result;
}

SvbLocalResult svb_local_step(const Document& doc, const VariationalTopics& topics,
                              const HyperParams& hyper, int max_iters, double tol) {
  return svb_local_step(doc, exp_dirichlet_expectation(topics.lambda), hyper.alpha(), max_iters,
                        tol);
}

void svb_global_update(VariationalTopics& topics, const Eigen::MatrixXd& lambda_hat, double rho) {
  if (!(rho > 0.0) || rho > 1.0) throw ConfigError("svb_global_update: rho must be in (0, 1]");
  topics.lambda = (1.0 - rho) * topics.lambda + rho * lambda_hat;
}

void validate_config(const SvbConfig& config, Eigen::Index n_words) {
  if (config.n_topics < 1) throw ConfigError("svb: n_topics must be >= 1");
  if (config.hyper.n_words() != n_words) {
    throw ConfigError("svb: hyperparameter W does not match corpus W");
  }
  if (config.hyper_offset < 0) throw ConfigError("svb: hyper_offset must be >= 0");
  if (config.minibatch_docs < 1) throw ConfigError("svb: minibatch_docs must be >= 1");
  if (config.burn_in_passes < 1) throw ConfigError("svb: burn_in_passes must be >= 1");
  if (config.epochs < 0) throw ConfigError("svb: epochs must be >= 0");
  if (config.max_train_seconds < 0) throw ConfigError("svb: max_train_seconds must be >= 0");
  if (!(config.init_shape > 0.0) || !(config.init_scale > 0.0)) {
    throw ConfigError("svb: lambda init shape and scale must be positive");
  }
  require_valid_schedule(config.phi_schedule, "phi");
}

SvbTrainer::SvbTrainer(const Corpus& corpus, SvbConfig config)
    : corpus_(&corpus),
      config_(std::move(config)),
      effective_(config_.hyper.shifted(config_.hyper_offset)),
      rng_(config_.seed) {
  validate_config(config_, corpus.n_words());
  if (corpus.n_docs() < 1 || corpus.total_tokens < 1) {
    throw ConfigError("svb: corpus must contain at least one token");
  }
  std::gamma_distribution<double> init(config_.init_shape, config_.init_scale);
  topics_.lambda.resize(config_.n_topics, corpus.n_words());
  for (Eigen::Index k = 0; k < config_.n_topics; ++k) {
    for (Eigen::Index w = 0; w < corpus.n_words(); ++w) {
      topics_.lambda(k, w) = std::max(init(rng_), 1e-8);
    }
  }
  exp_elog_beta_ = exp_dirichlet_expectation(topics_.lambda);
  sstats_ = Eigen::MatrixXd::Zero(config_.n_topics, corpus.n_words());
}

void SvbTrainer::process_minibatch(std::span<const Eigen::Index> docs) {
  sstats_.setZero();
  for (Eigen::Index j : docs) {
    const Document& doc = corpus_->docs[static_cast<std::size_t>(j)];
    const SvbLocalResult local = svb_local_step(doc, exp_elog_beta_, effective_.alpha(),
                                                config_.burn_in_passes, config_.local_tol);
    for (std::size_t t = 0; t < doc.entries.size(); ++t) {
      const auto& entry = doc.entries[t];
      sstats_.col(entry.word) += static_cast<double>(entry.count) *
                                 local.responsibilities.row(static_cast<Eigen::Index>(t))
                                     .transpose();
    }
    ++progress_.docs_seen;
    progress_.tokens_seen += doc.tokens;
  }

  const double scale =
      static_cast<double>(corpus_->n_docs()) / static_cast<double>(docs.size());
  Eigen::MatrixXd lambda_hat = scale * sstats_;
  lambda_hat.array().rowwise() += effective_.eta().transpose().array();

  const double rho = config_.phi_schedule.rho(phi_step_);
  svb_global_update(topics_, lambda_hat, rho);
  exp_elog_beta_ = exp_dirichlet_expectation(topics_.lambda);

  ++phi_step_;
  ++progress_.minibatches;
  progress_.rho_phi = rho;
}

ModelStats SvbTrainer::snapshot() const {
  ModelStats stats;
  stats.n_phi.resize(corpus_->n_words(), config_.n_topics);
  for (Eigen::Index w = 0; w < corpus_->n_words(); ++w) {
    for (Eigen::Index k = 0; k < config_.n_topics; ++k) {
      stats.n_phi(w, k) = std::max(topics_.lambda(k, w) - effective_.eta(w), 0.0);
    }
  }
  stats.n_z = stats.n_phi.colwise().sum().transpose();
  stats.n_theta.resize(corpus_->n_docs(), config_.n_topics);
  for (Eigen::Index j = 0; j < corpus_->n_docs(); ++j) {
    stats.n_theta.row(j).setConstant(
        static_cast<double>(corpus_->docs[static_cast<std::size_t>(j)].tokens) /
        static_cast<double>(config_.n_topics));
  }
  return stats;
}

ModelStats SvbTrainer::train(const CheckpointCadence& cadence, const CheckpointFn& on_checkpoint) {
  double since_checkpoint_s = 0.0;
  std::int64_t since_checkpoint_mb = 0;
  auto fire_checkpoint = [&] {
    if (on_checkpoint) on_checkpoint(snapshot(), progress_);
    since_checkpoint_s = 0.0;
    since_checkpoint_mb = 0;
  };

  std::vector<Eigen::Index> doc_order(static_cast<std::size_t>(corpus_->n_docs()));
  std::iota(doc_order.begin(), doc_order.end(), Eigen::Index{0});

  bool budget_hit = false;
  for (int epoch = 0; epoch < config_.epochs && !budget_hit; ++epoch) {
    progress_.epoch = epoch + 1;
    std::shuffle(doc_order.begin(), doc_order.end(), rng_);
    auto segment_start = Clock::now();
    std::size_t cursor = 0;
    while (cursor < doc_order.size()) {
      const std::size_t batch = std::min<std::size_t>(
          static_cast<std::size_t>(config_.minibatch_docs), doc_order.size() - cursor);
      process_minibatch(std::span<const Eigen::Index>(doc_order.data() + cursor, batch));
      cursor += batch;

      const auto now = Clock::now();
      const double elapsed = seconds_between(segment_start, now);
      progress_.train_seconds += elapsed;
      since_checkpoint_s += elapsed;
      ++since_checkpoint_mb;
      const bool want_time = cadence.seconds > 0.0 && since_checkpoint_s >= cadence.seconds;
      const bool want_mb =
          cadence.minibatches > 0 && since_checkpoint_mb >= cadence.minibatches;
      if (want_time || want_mb) fire_checkpoint();
      if (config_.max_train_seconds > 0.0 &&
          progress_.train_seconds >= config_.max_train_seconds) {
        budget_hit = true;
        break;
      }
      segment_start = Clock::now();
    }
  }

  if (on_checkpoint) on_checkpoint(snapshot(), progress_);
  return snapshot();
}

}  // namespace topics
