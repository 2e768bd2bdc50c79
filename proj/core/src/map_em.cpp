#include "topics/map_em.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "topics/cvb0.hpp"
#include "topics/errors.hpp"

namespace topics {

namespace {

void require_map_hyper(const HyperParams& hyper) {
  if (hyper.alpha() < 1.0 || !hyper.eta_at_least(1.0)) {
    throw ConfigError("MAP estimation requires alpha >= 1 and eta_w >= 1");
  }
}

// coefficient * log(argument) with the 0 * log 0 = 0 convention. Arguments a
// rounding error below zero are clamped; anything materially negative is a
// broken invariant.
double bound_term(double coefficient, double argument) {
  if (argument < 0.0) {
    if (argument < -1e-9) throw NumericError("em_bound: negative log argument");
    argument = 0.0;
  }
  if (argument == 0.0) {
    if (coefficient <= 1e-12) return 0.0;
    return -std::numeric_limits<double>::infinity();
  }
  return coefficient * std::log(argument);
}

// Incremental re-syncs can round counts a hair below zero; clamp them,
// matching the batch collapsed update.
template <class Vec>
void clamp_counts(Vec&& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      if (v[i] < -1e-9) throw NumericError("map_em: negative count, statistics corrupted");
      v[i] = 0.0;
    }
  }
}

}  // namespace

Eigen::VectorXd map_responsibility(const ModelStats& stats, Eigen::Index doc, Eigen::Index word,
                                   const HyperParams& hyper) {
  require_map_hyper(hyper);
  const double word_prior = hyper.eta(word) - 1.0;
  const double prior_sum = hyper.eta_sum() - static_cast<double>(hyper.n_words());
  const double doc_prior = hyper.alpha() - 1.0;
  return topic_responsibility(stats.n_phi.row(word), stats.n_z, stats.n_theta.row(doc),
                              word_prior, prior_sum, doc_prior, /*uniform_on_zero=*/true);
}

EmState::EmState(const Corpus& corpus, Eigen::Index n_topics, HyperParams hyper,
                 std::uint64_t init_seed)
    : corpus_(&corpus), hyper_(std::move(hyper)) {
  if (n_topics < 1) throw ConfigError("map_em: n_topics must be >= 1");
  if (hyper_.n_words() != corpus.n_words()) {
    throw ConfigError("map_em: hyperparameter W does not match corpus W");
  }
  require_map_hyper(hyper_);
  gammas_.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    gammas_.emplace_back(
        RowMajorMatrixXd::Zero(static_cast<Eigen::Index>(doc.entries.size()), n_topics));
  }
  for_each_hard_assignment(corpus, n_topics, init_seed,
                           [&](Eigen::Index j, Eigen::Index t, Eigen::Index k) {
                             gammas_[static_cast<std::size_t>(j)](t, k) += 1.0;
                           });
  for (Eigen::Index j = 0; j < corpus.n_docs(); ++j) {
    auto& g = gammas_[static_cast<std::size_t>(j)];
    const auto& entries = corpus.docs[static_cast<std::size_t>(j)].entries;
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      g.row(t) /= static_cast<double>(entries[static_cast<std::size_t>(t)].count);
    }
  }
  stats_.n_phi = RowMajorMatrixXd::Zero(corpus.n_words(), n_topics);
  stats_.n_z = Eigen::VectorXd::Zero(n_topics);
  stats_.n_theta = RowMajorMatrixXd::Zero(corpus.n_docs(), n_topics);
  sync_stats();
}

double EmState::full_iteration() {
  double max_change = 0.0;
  // E-step: statistics stay frozen while every responsibility refreshes.
  for (Eigen::Index j = 0; j < corpus_->n_docs(); ++j) {
    const auto& entries = corpus_->docs[static_cast<std::size_t>(j)].entries;
    auto& g = gammas_[static_cast<std::size_t>(j)];
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      const Eigen::VectorXd gamma =
          map_responsibility(stats_, j, entries[static_cast<std::size_t>(t)].word, hyper_);
      max_change =
          std::max(max_change, (gamma.transpose() - g.row(t)).cwiseAbs().maxCoeff());
      g.row(t) = gamma.transpose();
    }
  }
  sync_stats();
  return max_change;
}

Eigen::VectorXd EmState::incremental_update(Eigen::Index doc, Eigen::Index entry) {
  const auto& e = corpus_->docs[static_cast<std::size_t>(doc)].entries[static_cast<std::size_t>(entry)];
  const Eigen::VectorXd gamma = map_responsibility(stats_, doc, e.word, hyper_);
  auto& g = gammas_[static_cast<std::size_t>(doc)];
  const double weight = static_cast<double>(e.count);
  const Eigen::RowVectorXd delta = weight * (gamma.transpose() - g.row(entry));
  stats_.n_phi.row(e.word) += delta;
  stats_.n_z += delta.transpose();
  stats_.n_theta.row(doc) += delta;
  clamp_counts(stats_.n_phi.row(e.word));
  clamp_counts(stats_.n_z);
  clamp_counts(stats_.n_theta.row(doc));
  g.row(entry) = gamma.transpose();
  return gamma;
}

void EmState::incremental_epoch(std::uint64_t order_seed) {
  for (const auto& [j, t] : shuffled_entry_order(*corpus_, order_seed)) {
    incremental_update(j, t);
  }
  sync_stats();
}

void EmState::sync_stats() {
  stats_.n_phi.setZero();
  stats_.n_z.setZero();
  stats_.n_theta.setZero();
  // n_z accumulates from its own definition; its agreement with the column
  // sums of n_phi is an emergent identity, not enforced.
  for (Eigen::Index j = 0; j < corpus_->n_docs(); ++j) {
    const auto& entries = corpus_->docs[static_cast<std::size_t>(j)].entries;
    const auto& g = gammas_[static_cast<std::size_t>(j)];
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      const double weight = static_cast<double>(entries[static_cast<std::size_t>(t)].count);
      stats_.n_phi.row(entries[static_cast<std::size_t>(t)].word) += weight * g.row(t);
      stats_.n_theta.row(j) += weight * g.row(t);
      stats_.n_z += weight * g.row(t).transpose();
    }
  }
}

double EmState::bound() const {
  const Eigen::Index n_topics = stats_.n_topics();
  const double doc_prior = hyper_.alpha() - 1.0;
  const double z_prior = hyper_.eta_sum() - static_cast<double>(hyper_.n_words());

  RowMajorMatrixXd phi_coef = RowMajorMatrixXd::Zero(stats_.n_words(), n_topics);
  Eigen::VectorXd z_coef = Eigen::VectorXd::Zero(n_topics);
  double total = 0.0;

  for (Eigen::Index j = 0; j < corpus_->n_docs(); ++j) {
    const auto& entries = corpus_->docs[static_cast<std::size_t>(j)].entries;
    const auto& g = gammas_[static_cast<std::size_t>(j)];
    Eigen::RowVectorXd theta_coef = Eigen::RowVectorXd::Zero(n_topics);
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      const double weight = static_cast<double>(entries[static_cast<std::size_t>(t)].count);
      phi_coef.row(entries[static_cast<std::size_t>(t)].word) += weight * g.row(t);
      theta_coef += weight * g.row(t);
      z_coef += weight * g.row(t).transpose();
      for (Eigen::Index k = 0; k < n_topics; ++k) {
        const double p = g(t, k);
        if (p > 0.0) total -= weight * p * std::log(p);  // entropy term
      }
    }
    for (Eigen::Index k = 0; k < n_topics; ++k) {
      total += bound_term(theta_coef[k] + doc_prior, stats_.n_theta(j, k) + doc_prior);
    }
  }
  for (Eigen::Index w = 0; w < stats_.n_words(); ++w) {
    const double word_prior = hyper_.eta(w) - 1.0;
    for (Eigen::Index k = 0; k < n_topics; ++k) {
      total += bound_term(phi_coef(w, k) + word_prior, stats_.n_phi(w, k) + word_prior);
    }
  }
  for (Eigen::Index k = 0; k < n_topics; ++k) {
    total -= bound_term(z_coef[k] + z_prior, stats_.n_z[k] + z_prior);
  }
  return total;
}

MapFitResult map_fit(const Corpus& corpus, Eigen::Index n_topics, const HyperParams& hyper,
                     int iterations, std::uint64_t seed) {
  if (iterations < 1) throw ConfigError("map_fit: iterations must be >= 1");
  MapFitResult result{EmState(corpus, n_topics, hyper, seed), {}};
  result.trace.reserve(static_cast<std::size_t>(iterations) + 1);
  result.trace.push_back({0, result.state.bound(), 0.0});
  for (int it = 1; it <= iterations; ++it) {
    const double change = result.state.full_iteration();
    result.trace.push_back({it, result.state.bound(), change});
  }
  return result;
}

void write_bound_trace_csv(const std::vector<BoundTracePoint>& trace, std::ostream& out) {
  out << "iteration,bound,max_abs_gamma_change\n";
  out.precision(17);
  for (const auto& p : trace) {
    out << p.iteration << ',' << p.bound << ',' << p.max_gamma_change << '\n';
  }
}

}  // namespace topics
