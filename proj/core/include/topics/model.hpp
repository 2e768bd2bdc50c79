#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topics/corpus.hpp"
#include "topics/errors.hpp"

namespace topics {

/// Word-major storage: each word's topic row is contiguous, so a token
/// update touches one cache line run.
using RowMajorMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dirichlet priors: a symmetric scalar alpha over document-topic weights and
/// a per-word vector eta over word-topic weights (symmetric broadcast via
/// `symmetric`). eta_sum is kept consistent with eta.
class HyperParams {
 public:
  HyperParams(double alpha, Eigen::VectorXd eta);
  static HyperParams symmetric(double alpha, double eta, Eigen::Index n_words);

  double alpha() const { return alpha_; }
  const Eigen::VectorXd& eta() const { return eta_; }
  double eta(Eigen::Index w) const { return eta_[w]; }
  double eta_sum() const { return eta_sum_; }
  Eigen::Index n_words() const { return eta_.size(); }

  /// alpha + delta, eta_w + delta for all w. Used for the MAP/variational
  /// hyperparameter shift and for the uncollapsed-VB offset.
  HyperParams shifted(double delta) const;

  bool eta_at_least(double bound) const { return eta_.minCoeff() >= bound; }

 private:
  double alpha_;
  Eigen::VectorXd eta_;
  double eta_sum_;
};

/// The expected-count statistics every algorithm in this library trains:
/// word-topic counts (W x K), topic totals (K), document-topic counts (D x K).
struct ModelStats {
  RowMajorMatrixXd n_phi;
  Eigen::VectorXd n_z;
  RowMajorMatrixXd n_theta;

  Eigen::Index n_words() const { return n_phi.rows(); }
  Eigen::Index n_topics() const { return n_phi.cols(); }
  Eigen::Index n_docs() const { return n_theta.rows(); }

  bool operator==(const ModelStats& other) const {
    return n_phi.rows() == other.n_phi.rows() && n_phi.cols() == other.n_phi.cols() &&
           n_theta.rows() == other.n_theta.rows() && n_z.size() == other.n_z.size() &&
           (n_phi.array() == other.n_phi.array()).all() &&
           (n_z.array() == other.n_z.array()).all() &&
           (n_theta.array() == other.n_theta.array()).all();
  }
};

/// Invariant audit: nonnegativity, n_z vs column sums of n_phi (1e-6
/// relative), per-document totals vs C_j (1e-6), and total topic mass bounded
/// by the corpus token count. Returns human-readable findings, empty if clean.
std::vector<std::string> check_stats(const ModelStats& stats,
                                     std::span<const std::int64_t> doc_tokens,
                                     double total_tokens);

/// Visits one uniformly drawn hard topic assignment per token, in a fixed
/// deterministic order under the seed. Shared by every initializer so that
/// algorithms seeded alike start from identical states.
template <class Fn>
void for_each_hard_assignment(const Corpus& corpus, Eigen::Index n_topics, std::uint64_t seed,
                              Fn&& fn) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n_topics - 1);
  for (Eigen::Index j = 0; j < corpus.n_docs(); ++j) {
    const auto& entries = corpus.docs[static_cast<std::size_t>(j)].entries;
    for (std::size_t t = 0; t < entries.size(); ++t) {
      for (std::int32_t c = 0; c < entries[t].count; ++c) {
        fn(j, static_cast<Eigen::Index>(t), pick(rng));
      }
    }
  }
}

/// Hard random assignment: integer counts satisfying every ModelStats
/// invariant exactly.
ModelStats init_stats(const Corpus& corpus, Eigen::Index n_topics, std::uint64_t seed);

enum class RecoveryMode { kVariationalMean, kMap };

/// Point estimates of the topics (K x W, rows normalized). Variational-mean
/// uses (n_phi + eta) / (n_z + eta_sum); MAP subtracts one from the priors and
/// requires eta >= 1.
Eigen::MatrixXd recover_topics(const ModelStats& stats, const HyperParams& hyper,
                               RecoveryMode mode);

/// Point estimates of the document-topic weights (D x K, rows normalized).
/// MAP mode requires alpha >= 1.
Eigen::MatrixXd recover_theta(const ModelStats& stats, const HyperParams& hyper,
                              std::span<const std::int64_t> doc_tokens, RecoveryMode mode);

bool is_simplex(const Eigen::VectorXd& v, double tol = 1e-12);

/// Shared responsibility kernel:
///   gamma_k proportional to (phi_w_k + word_prior) / (n_z_k + topic_prior_sum)
///                           * (theta_j_k + doc_prior).
/// The collapsed-variational and MAP updates are this one formula with
/// different prior offsets, so both call sites share the arithmetic
/// bit-for-bit. `uniform_on_zero` selects the degenerate-input fallback
/// instead of throwing when every unnormalized entry is zero.
template <class PhiRow, class ThetaRow>
Eigen::VectorXd topic_responsibility(const PhiRow& phi_row, const Eigen::VectorXd& n_z,
                                     const ThetaRow& theta_row, double word_prior,
                                     double topic_prior_sum, double doc_prior,
                                     bool uniform_on_zero = false) {
  Eigen::VectorXd gamma = ((phi_row.transpose().array() + word_prior) /
                           (n_z.array() + topic_prior_sum) *
                           (theta_row.transpose().array() + doc_prior))
                              .matrix();
  const double total = gamma.sum();
  if (total > 0.0 && std::isfinite(total)) {
    gamma /= total;
    return gamma;
  }
  if (uniform_on_zero) {
    // Zero-numerator degeneracy (possible at unit priors with empty counts);
    // the denominator may be zero there as well, so test the numerators.
    const auto numerators = (phi_row.transpose().array() + word_prior) *
                            (theta_row.transpose().array() + doc_prior);
    if ((numerators == 0.0).all()) {
      gamma.setConstant(1.0 / static_cast<double>(gamma.size()));
      return gamma;
    }
  }
  throw NumericError("topic_responsibility: degenerate unnormalized vector (sum = " +
                     std::to_string(total) + ")");
}

/// Per-minibatch sparse accumulator for the word-topic estimates: only rows
/// of words seen in the minibatch are stored; the topic total accumulates the
/// same mass densely.
class MinibatchAccumulator {
 public:
  MinibatchAccumulator(Eigen::Index n_words, Eigen::Index n_topics);

  /// row(word) += weighted_gamma; n_hat_z += weighted_gamma;
  /// token_count += tokens.
  void add(Eigen::Index word, const Eigen::VectorXd& weighted_gamma, std::int64_t tokens);

  std::int64_t token_count() const { return token_count_; }
  const Eigen::VectorXd& n_hat_z() const { return n_hat_z_; }
  std::span<const Eigen::Index> touched_words() const { return touched_; }
  bool touched(Eigen::Index word) const { return slot_of_word_[word] >= 0; }

  /// Accumulated row for `word` (sum of weighted gammas); zero if untouched.
  Eigen::VectorXd row(Eigen::Index word) const;
  /// Contiguous view for a touched word; undefined for untouched words.
  Eigen::Ref<const Eigen::RowVectorXd> row_ref(Eigen::Index word) const {
    return slots_.row(slot_of_word_[word]);
  }

  Eigen::Index n_words() const { return static_cast<Eigen::Index>(slot_of_word_.size()); }
  Eigen::Index n_topics() const { return n_topics_; }

  void reset();

 private:
  Eigen::Index n_topics_;
  std::vector<Eigen::Index> slot_of_word_;  // -1 when untouched
  std::vector<Eigen::Index> touched_;
  RowMajorMatrixXd slots_;
  Eigen::VectorXd n_hat_z_;
  std::int64_t token_count_ = 0;
};

}  // namespace topics
