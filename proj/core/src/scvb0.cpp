#include "topics/scvb0.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "topics/errors.hpp"

namespace topics {

namespace {

// Renormalize the lazy decay multiplier before it can underflow.
constexpr double kMinScale = 1e-140;

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace

void validate_config(const Scvb0Config& config, Eigen::Index n_words) {
  if (config.n_topics < 1) throw ConfigError("scvb0: n_topics must be >= 1");
  if (config.hyper.n_words() != n_words) {
    throw ConfigError("scvb0: hyperparameter W does not match corpus W");
  }
  if (config.minibatch_docs < 1) throw ConfigError("scvb0: minibatch_docs must be >= 1");
  if (config.burn_in_passes < 0) throw ConfigError("scvb0: burn_in_passes must be >= 0");
  if (config.epochs < 0) throw ConfigError("scvb0: epochs must be >= 0");
  if (config.max_train_seconds < 0) throw ConfigError("scvb0: max_train_seconds must be >= 0");
  require_valid_schedule(config.phi_schedule, "phi");
  require_valid_schedule(config.theta_schedule, "theta");
}

Eigen::VectorXd gamma_update(const ModelStats& stats, Eigen::Index doc, Eigen::Index word,
                             const HyperParams& hyper) {
  return topic_responsibility(stats.n_phi.row(word), stats.n_z, stats.n_theta.row(doc),
                              hyper.eta(word), hyper.eta_sum(), hyper.alpha());
}

void update_doc_stats(Eigen::Ref<Eigen::RowVectorXd> n_theta_row, double doc_tokens,
                      const Eigen::VectorXd& gamma, double rho_theta) {
  n_theta_row = (1.0 - rho_theta) * n_theta_row + (rho_theta * doc_tokens) * gamma.transpose();
}

void clumped_doc_update(Eigen::Ref<Eigen::RowVectorXd> n_theta_row, double doc_tokens,
                        const Eigen::VectorXd& gamma, double rho_theta,
                        std::int64_t multiplicity) {
  if (multiplicity < 1) throw ConfigError("clumped_doc_update: multiplicity must be >= 1");
  const double decay = std::pow(1.0 - rho_theta, static_cast<double>(multiplicity));
  n_theta_row = decay * n_theta_row + (doc_tokens * (1.0 - decay)) * gamma.transpose();
}

void accumulate_token(MinibatchAccumulator& acc, Eigen::Index word, const Eigen::VectorXd& gamma,
                      double corpus_tokens, std::int64_t multiplicity) {
  if (multiplicity < 1) throw ConfigError("accumulate_token: multiplicity must be >= 1");
  acc.add(word, (static_cast<double>(multiplicity) * corpus_tokens) * gamma, multiplicity);
}

void minibatch_update(ModelStats& stats, MinibatchAccumulator& acc, double rho_phi) {
  if (acc.token_count() < 1) throw ConfigError("minibatch_update: empty accumulator");
  const double inv_tokens = 1.0 / static_cast<double>(acc.token_count());
  stats.n_phi *= (1.0 - rho_phi);
  for (Eigen::Index w : acc.touched_words()) {
    stats.n_phi.row(w) += (rho_phi * inv_tokens) * acc.row_ref(w);
  }
  stats.n_z = (1.0 - rho_phi) * stats.n_z + (rho_phi * inv_tokens) * acc.n_hat_z();
  acc.reset();
}

Scvb0Trainer::Scvb0Trainer(const Corpus& corpus, Scvb0Config config)
    : corpus_(&corpus),
      config_(std::move(config)),
      acc_(corpus.n_words(), config_.n_topics),
      rng_(config_.seed) {
  validate_config(config_, corpus.n_words());
  if (corpus.n_docs() < 1 || corpus.total_tokens < 1) {
    throw ConfigError("scvb0: corpus must contain at least one token");
  }
  stats_ = init_stats(corpus, config_.n_topics, mix_seed(config_.seed, 0x1717));
  row_stamp_ = Eigen::VectorXd::Ones(corpus.n_words());
  scaled_row_.resize(config_.n_topics);
}

Eigen::VectorXd Scvb0Trainer::token_gamma(Eigen::Index doc, Eigen::Index word) {
  const double factor = scale_ / row_stamp_[word];
  scaled_row_ = stats_.n_phi.row(word) * factor;
  return topic_responsibility(scaled_row_, stats_.n_z, stats_.n_theta.row(doc),
                              config_.hyper.eta(word), config_.hyper.eta_sum(),
                              config_.hyper.alpha());
}

void Scvb0Trainer::fold_row(Eigen::Index word) {
  const double factor = scale_ / row_stamp_[word];
  if (factor != 1.0) stats_.n_phi.row(word) *= factor;
  row_stamp_[word] = scale_;
}

void Scvb0Trainer::materialize() {
  for (Eigen::Index w = 0; w < stats_.n_words(); ++w) fold_row(w);
  row_stamp_.setOnes();
  scale_ = 1.0;
}

void Scvb0Trainer::process_document(Eigen::Index doc) {
  const auto& entries = corpus_->docs[static_cast<std::size_t>(doc)].entries;
  const double doc_tokens =
      static_cast<double>(corpus_->docs[static_cast<std::size_t>(doc)].tokens);
  const double corpus_tokens = static_cast<double>(corpus_->total_tokens);

  std::int64_t theta_step = config_.theta_step_global ? theta_step_global_ : 1;
  entry_order_.resize(entries.size());
  std::iota(entry_order_.begin(), entry_order_.end(), Eigen::Index{0});

  for (int pass = 0; pass <= config_.burn_in_passes; ++pass) {
    const bool accumulate = pass == config_.burn_in_passes;
    std::shuffle(entry_order_.begin(), entry_order_.end(), rng_);
    for (Eigen::Index t : entry_order_) {
      const auto& entry = entries[static_cast<std::size_t>(t)];
      const Eigen::VectorXd gamma = token_gamma(doc, entry.word);
      const double rho = config_.theta_schedule.rho(theta_step);
      clumped_doc_update(stats_.n_theta.row(doc), doc_tokens, gamma, rho, entry.count);
      theta_step += entry.count;
      progress_.rho_theta = rho;
      if (accumulate) {
        accumulate_token(acc_, entry.word, gamma, corpus_tokens, entry.count);
        progress_.tokens_seen += entry.count;
      }
    }
  }

  if (config_.theta_step_global) theta_step_global_ = theta_step;
  ++progress_.docs_seen;
}

bool Scvb0Trainer::finish_minibatch() {
  if (acc_.token_count() < 1) return false;
  const double rho = config_.phi_schedule.rho(phi_step_);
  const double keep = 1.0 - rho;
  const double inv_tokens = 1.0 / static_cast<double>(acc_.token_count());

  if (keep <= 0.0) {
    // Full replacement: every untouched row becomes zero.
    stats_.n_phi.setZero();
    row_stamp_.setOnes();
    scale_ = 1.0;
    for (Eigen::Index w : acc_.touched_words()) {
      stats_.n_phi.row(w) = inv_tokens * acc_.row_ref(w);
    }
  } else {
    const double new_scale = scale_ * keep;
    for (Eigen::Index w : acc_.touched_words()) {
      fold_row(w);
      stats_.n_phi.row(w) = keep * stats_.n_phi.row(w) + (rho * inv_tokens) * acc_.row_ref(w);
      row_stamp_[w] = new_scale;
    }
    scale_ = new_scale;
    if (scale_ < kMinScale) materialize();
  }
  stats_.n_z = keep * stats_.n_z + (rho * inv_tokens) * acc_.n_hat_z();
  acc_.reset();

  ++phi_step_;
  ++progress_.minibatches;
  progress_.rho_phi = rho;
  return true;
}

ModelStats Scvb0Trainer::snapshot() const {
  ModelStats copy = stats_;
  for (Eigen::Index w = 0; w < copy.n_words(); ++w) {
    const double factor = scale_ / row_stamp_[w];
    if (factor != 1.0) copy.n_phi.row(w) *= factor;
  }
  return copy;
}

ModelStats Scvb0Trainer::train(const CheckpointCadence& cadence, const CheckpointFn& on_checkpoint) {
  double since_checkpoint_s = 0.0;
  std::int64_t since_checkpoint_mb = 0;

  auto pause_and = [&](const CheckpointFn& fn) {
    if (!fn) return;
    fn(snapshot(), progress_);
  };
  auto fire_checkpoint = [&] {
    pause_and(on_checkpoint);
    since_checkpoint_s = 0.0;
    since_checkpoint_mb = 0;
  };

  std::vector<Eigen::Index> doc_order(static_cast<std::size_t>(corpus_->n_docs()));
  std::iota(doc_order.begin(), doc_order.end(), Eigen::Index{0});

  bool budget_hit = false;
  for (int epoch = 0; epoch < config_.epochs && !budget_hit; ++epoch) {
    progress_.epoch = epoch + 1;
    std::shuffle(doc_order.begin(), doc_order.end(), rng_);
    int in_batch = 0;
    auto segment_start = Clock::now();

    auto close_batch = [&] {
      if (!finish_minibatch()) return;
      const auto now = Clock::now();
      const double elapsed = seconds_between(segment_start, now);
      progress_.train_seconds += elapsed;
      since_checkpoint_s += elapsed;
      ++since_checkpoint_mb;

      // Clock pauses here: observers and checkpoints are not training work.
      if (minibatch_observer) pause_and(minibatch_observer);
      const bool want_time = cadence.seconds > 0.0 && since_checkpoint_s >= cadence.seconds;
      const bool want_mb =
          cadence.minibatches > 0 && since_checkpoint_mb >= cadence.minibatches;
      if (want_time || want_mb) fire_checkpoint();
      if (config_.max_train_seconds > 0.0 && progress_.train_seconds >= config_.max_train_seconds) {
        budget_hit = true;
      }
      segment_start = Clock::now();
    };

    for (Eigen::Index j : doc_order) {
      process_document(j);
      if (++in_batch == config_.minibatch_docs) {
        in_batch = 0;
        close_batch();
        if (budget_hit) break;
      }
    }
    if (!budget_hit && in_batch > 0) close_batch();  // ragged final batch
  }

  pause_and(on_checkpoint);
  return snapshot();
}

}  // namespace topics
