#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/model.hpp"
#include "topics/schedule.hpp"
#include "topics/training.hpp"

namespace topics {

struct Scvb0Config {
  Eigen::Index n_topics;
  HyperParams hyper;
  StepSchedule phi_schedule{10.0, 1000.0, 0.9};
  StepSchedule theta_schedule{1.0, 10.0, 0.9};
  int minibatch_docs = 100;
  int burn_in_passes = 1;
  int epochs = 1;
  /// 0 disables the budget; otherwise training stops at the first minibatch
  /// boundary where the training clock passes this many seconds.
  double max_train_seconds = 0.0;
  /// Run the document step counter globally over all token updates instead
  /// of restarting it at each document visit. The global counter starves
  /// late documents of step size (their statistics freeze near the
  /// initialization), so the per-visit counter is the default.
  bool theta_step_global = false;
  std::uint64_t seed = 0;
};

void validate_config(const Scvb0Config& config, Eigen::Index n_words);

/// One collapsed responsibility without count exclusion:
///   gamma_k proportional to (n_phi_wk + eta_w) / (n_z_k + eta_sum)
///                           * (n_theta_jk + alpha).
Eigen::VectorXd gamma_update(const ModelStats& stats, Eigen::Index doc, Eigen::Index word,
                             const HyperParams& hyper);

/// Online average of a document row toward its per-token estimate:
///   n_theta_j := (1 - rho) n_theta_j + rho * C_j * gamma.
/// Preserves the row's L1 norm at C_j.
void update_doc_stats(Eigen::Ref<Eigen::RowVectorXd> n_theta_row, double doc_tokens,
                      const Eigen::VectorXd& gamma, double rho_theta);

/// Geometric-series form of `multiplicity` consecutive applications of
/// update_doc_stats with gamma held fixed:
///   n_theta_j := (1 - rho)^m n_theta_j + C_j * gamma * (1 - (1 - rho)^m).
void clumped_doc_update(Eigen::Ref<Eigen::RowVectorXd> n_theta_row, double doc_tokens,
                        const Eigen::VectorXd& gamma, double rho_theta,
                        std::int64_t multiplicity);

/// Adds one token's corpus-scaled estimate to the minibatch accumulator. A
/// clumped entry contributes once with weight multiplicity * C * gamma and
/// advances the token count by its multiplicity, keeping the accumulator mean
/// equal to the mean of per-token estimates.
void accumulate_token(MinibatchAccumulator& acc, Eigen::Index word, const Eigen::VectorXd& gamma,
                      double corpus_tokens, std::int64_t multiplicity = 1);

/// Dense reference for closing a minibatch: divides the accumulator by its
/// token count and mixes n_phi and n_z toward the estimates with step rho.
/// Scales every untouched row by (1 - rho) explicitly; the trainer below
/// implements the same update lazily. Resets the accumulator.
void minibatch_update(ModelStats& stats, MinibatchAccumulator& acc, double rho_phi);

/// Stochastic collapsed trainer. Documents stream in seeded shuffled order;
/// each takes `burn_in_passes` document-statistics passes followed by one
/// accumulation pass; topic statistics mix at minibatch boundaries.
///
/// Word-topic rows decay by a global multiplier with per-row stamps so a
/// minibatch touches only its own rows; snapshots fold the multiplier back
/// in. Single-writer: all mutation happens on the calling thread.
class Scvb0Trainer {
 public:
  Scvb0Trainer(const Corpus& corpus, Scvb0Config config);

  /// Runs the configured epochs (or until the time budget), firing
  /// checkpoints per the cadence plus once at the end. Returns the final
  /// statistics.
  ModelStats train(const CheckpointCadence& cadence = {}, const CheckpointFn& on_checkpoint = {});

  /// Burn-in passes plus the accumulation pass for one document.
  void process_document(Eigen::Index doc);
  /// Closes the current minibatch; returns false when nothing accumulated.
  bool finish_minibatch();

  /// Materialized deep copy of the statistics.
  ModelStats snapshot() const;
  const TrainProgress& progress() const { return progress_; }
  const Scvb0Config& config() const { return config_; }
  const Corpus& corpus() const { return *corpus_; }

  /// Diagnostics hook fired after every minibatch update with a materialized
  /// copy; intended for tests, costs O(W K) per minibatch when set.
  CheckpointFn minibatch_observer;

 private:
  Eigen::VectorXd token_gamma(Eigen::Index doc, Eigen::Index word);
  void fold_row(Eigen::Index word);
  void materialize();

  const Corpus* corpus_;
  Scvb0Config config_;
  ModelStats stats_;
  MinibatchAccumulator acc_;

  // Lazy (1 - rho) decay of n_phi rows: actual row = stored row * scale_ /
  // row_stamp_[w].
  double scale_ = 1.0;
  Eigen::VectorXd row_stamp_;

  std::mt19937_64 rng_;
  std::int64_t theta_step_global_ = 1;
  std::int64_t phi_step_ = 1;
  TrainProgress progress_;

  Eigen::RowVectorXd scaled_row_;  // scratch for token_gamma
  std::vector<Eigen::Index> entry_order_;
};

}  // namespace topics
