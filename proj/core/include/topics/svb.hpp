#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "topics/corpus.hpp"
#include "topics/model.hpp"
#include "topics/schedule.hpp"
#include "topics/training.hpp"

namespace topics {

/// psi(x) for x > 0: upward recurrence into the asymptotic regime, then the
/// Bernoulli series. Absolute error below 1e-12.
double digamma(double x);

/// Variational Dirichlet parameters on the topics, one row per topic.
struct VariationalTopics {
  Eigen::MatrixXd lambda;  // K x W, strictly positive
};

/// exp(psi(row) - psi(row sum)) per row: the geometric-mean word weights the
/// local step consumes.
Eigen::MatrixXd exp_dirichlet_expectation(const Eigen::MatrixXd& params);

struct SvbLocalResult {
  Eigen::VectorXd doc_gamma;          // K, entries >= alpha, sums to K alpha + C_j
  Eigen::MatrixXd responsibilities;   // entries x K, each row a simplex
  int iterations = 0;
};

/// Document fixed-point iteration against fixed exp(E[log beta]) columns,
/// stopping when the mean absolute change of doc_gamma drops below tol or
/// after max_iters sweeps. Deterministic: doc_gamma starts at
/// alpha + C_j / K.
SvbLocalResult svb_local_step(const Document& doc, const Eigen::MatrixXd& exp_elog_beta,
                              double alpha, int max_iters, double tol);
/// Convenience overload computing the expectation of `topics` first.
SvbLocalResult svb_local_step(const Document& doc, const VariationalTopics& topics,
                              const HyperParams& hyper, int max_iters = 100, double tol = 1e-5);

/// Natural-gradient mix: lambda := (1 - rho) lambda + rho lambda_hat.
void svb_global_update(VariationalTopics& topics, const Eigen::MatrixXd& lambda_hat, double rho);

struct SvbConfig {
  Eigen::Index n_topics;
  HyperParams hyper;
  /// Added to both alpha and eta before training.
  double hyper_offset = 0.0;
  StepSchedule phi_schedule{10.0, 1000.0, 0.9};
  int minibatch_docs = 100;
  /// Local fixed-point sweeps per document while training.
  int burn_in_passes = 1;
  int epochs = 1;
  double max_train_seconds = 0.0;
  std::uint64_t seed = 0;
  double local_tol = 1e-5;
  /// Gamma(shape, scale) noise for the lambda initialization; defaults keep
  /// it tightly around 1.
  double init_shape = 100.0;
  double init_scale = 0.01;
};

void validate_config(const SvbConfig& config, Eigen::Index n_words);

/// Stochastic uncollapsed variational trainer (the document-level baseline).
/// Minibatch loop, checkpoint discipline and metrics schema mirror the
/// collapsed trainer; snapshots map lambda into the shared statistics
/// container so one evaluator serves every algorithm.
class SvbTrainer {
 public:
  SvbTrainer(const Corpus& corpus, SvbConfig config);

  ModelStats train(const CheckpointCadence& cadence = {}, const CheckpointFn& on_checkpoint = {});

  const VariationalTopics& topics() const { return topics_; }
  /// Effective priors (configured hyper plus offset).
  const HyperParams& effective_hyper() const { return effective_; }
  const TrainProgress& progress() const { return progress_; }

  /// lambda mapped into the statistics container: n_phi_wk = lambda_kw -
  /// eta_w (so variational-mean recovery returns the normalized lambda rows),
  /// n_z the matching column sums, n_theta uniform per document.
  ModelStats snapshot() const;

 private:
  void process_minibatch(std::span<const Eigen::Index> docs);

  const Corpus* corpus_;
  SvbConfig config_;
  HyperParams effective_;
  VariationalTopics topics_;
  Eigen::MatrixXd exp_elog_beta_;
  Eigen::MatrixXd sstats_;  // K x W scratch for minibatch sufficient statistics
  std::mt19937_64 rng_;
  std::int64_t phi_step_ = 1;
  TrainProgress progress_;
};

}  // namespace topics
