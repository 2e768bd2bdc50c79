#include "topics/model.hpp"

#include <algorithm>
#include <sstream>

namespace topics {

HyperParams::HyperParams(double alpha, Eigen::VectorXd eta)
    : alpha_(alpha), eta_(std::move(eta)) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
    throw ConfigError("HyperParams: alpha must be a positive finite real");
  }
  if (eta_.size() == 0) throw ConfigError("HyperParams: eta must be nonempty");
  for (Eigen::Index w = 0; w < eta_.size(); ++w) {
    if (!(eta_[w] > 0.0) || !std::isfinite(eta_[w])) {
      std::ostringstream os;
      os << "HyperParams: eta[" << w << "] = " << eta_[w] << " must be a positive finite real";
      throw ConfigError(os.str());
    }
  }
  eta_sum_ = eta_.sum();
}

HyperParams HyperParams::symmetric(double alpha, double eta, Eigen::Index n_words) {
  return HyperParams(alpha, Eigen::VectorXd::Constant(n_words, eta));
}

HyperParams HyperParams::shifted(double delta) const {
  return HyperParams(alpha_ + delta, eta_.array() + delta);
}

std::vector<std::string> check_stats(const ModelStats& stats,
                                     std::span<const std::int64_t> doc_tokens,
                                     double total_tokens) {
  std::vector<std::string> issues;
  auto report = [&issues](const std::string& s) { issues.push_back(s); };

  if (stats.n_phi.minCoeff() < 0.0) report("n_phi has a negative entry");
  if (stats.n_z.minCoeff() < 0.0) report("n_z has a negative entry");
  if (stats.n_theta.size() > 0 && stats.n_theta.minCoeff() < 0.0) {
    report("n_theta has a negative entry");
  }

  const Eigen::RowVectorXd colsums = stats.n_phi.colwise().sum();
  for (Eigen::Index k = 0; k < stats.n_topics(); ++k) {
    const double tol = 1e-6 * std::max(1.0, stats.n_z[k]);
    if (std::abs(stats.n_z[k] - colsums[k]) > tol) {
      std::ostringstream os;
      os << "n_z[" << k << "] = " << stats.n_z[k] << " drifted from column sum " << colsums[k];
      report(os.str());
    }
  }

  if (static_cast<Eigen::Index>(doc_tokens.size()) == stats.n_docs()) {
    for (Eigen::Index j = 0; j < stats.n_docs(); ++j) {
      const double sum = stats.n_theta.row(j).sum();
      const double expect = static_cast<double>(doc_tokens[static_cast<std::size_t>(j)]);
      if (std::abs(sum - expect) > 1e-6) {
        std::ostringstream os;
        os << "n_theta row " << j << " sums to " << sum << ", expected " << expect;
        report(os.str());
      }
    }
  } else if (!doc_tokens.empty()) {
    report("doc_tokens length does not match n_theta rows");
  }

  if (stats.n_z.sum() > total_tokens + 1e-6) {
    std::ostringstream os;
    os << "total topic mass " << stats.n_z.sum() << " exceeds corpus token count "
       << total_tokens;
    report(os.str());
  }
  return issues;
}

ModelStats init_stats(const Corpus& corpus, Eigen::Index n_topics, std::uint64_t seed) {
  if (n_topics < 1) throw ConfigError("init_stats: n_topics must be >= 1");
  ModelStats stats;
  stats.n_phi = RowMajorMatrixXd::Zero(corpus.n_words(), n_topics);
  stats.n_z = Eigen::VectorXd::Zero(n_topics);
  stats.n_theta = RowMajorMatrixXd::Zero(corpus.n_docs(), n_topics);
  for_each_hard_assignment(corpus, n_topics, seed,
                           [&](Eigen::Index j, Eigen::Index t, Eigen::Index k) {
                             const auto& entry =
                                 corpus.docs[static_cast<std::size_t>(j)].entries[static_cast<std::size_t>(t)];
                             stats.n_phi(entry.word, k) += 1.0;
                             stats.n_theta(j, k) += 1.0;
                             stats.n_z[k] += 1.0;
                           });
  return stats;
}

namespace {

void require_same_words(const ModelStats& stats, const HyperParams& hyper) {
  if (stats.n_words() != hyper.n_words()) {
    std::ostringstream os;
    os << "stats have W = " << stats.n_words() << " but hyperparameters have W = "
       << hyper.n_words();
    throw ConfigError(os.str());
  }
}

}  // namespace

Eigen::MatrixXd recover_topics(const ModelStats& stats, const HyperParams& hyper,
                               RecoveryMode mode) {
  require_same_words(stats, hyper);
  const Eigen::Index k_topics = stats.n_topics();
  const Eigen::Index n_words = stats.n_words();
  Eigen::MatrixXd phi(k_topics, n_words);

  double prior_shift = 0.0;
  if (mode == RecoveryMode::kMap) {
    if (!hyper.eta_at_least(1.0)) {
      throw ConfigError("recover_topics: MAP mode requires eta_w >= 1 for all words");
    }
    prior_shift = -1.0;
  }
  const double denom_prior = hyper.eta_sum() + prior_shift * static_cast<double>(n_words);
  for (Eigen::Index k = 0; k < k_topics; ++k) {
    phi.row(k) = ((stats.n_phi.col(k).array() + (hyper.eta().array() + prior_shift)) /
                  (stats.n_z[k] + denom_prior))
                     .transpose();
    phi.row(k) /= phi.row(k).sum();
  }
  return phi;
}

Eigen::MatrixXd recover_theta(const ModelStats& stats, const HyperParams& hyper,
                              std::span<const std::int64_t> doc_tokens, RecoveryMode mode) {
  if (static_cast<Eigen::Index>(doc_tokens.size()) != stats.n_docs()) {
    throw ConfigError("recover_theta: doc_tokens length must equal D");
  }
  const Eigen::Index k_topics = stats.n_topics();
  Eigen::MatrixXd theta(stats.n_docs(), k_topics);
  if (mode == RecoveryMode::kMap && hyper.alpha() < 1.0) {
    throw ConfigError("recover_theta: MAP mode requires alpha >= 1");
  }
  const double shift = mode == RecoveryMode::kMap ? -1.0 : 0.0;
  for (Eigen::Index j = 0; j < stats.n_docs(); ++j) {
    theta.row(j) = stats.n_theta.row(j).array() + (hyper.alpha() + shift);
    theta.row(j) /= theta.row(j).sum();
  }
  return theta;
}

bool is_simplex(const Eigen::VectorXd& v, double tol) {
  if (v.size() == 0) return false;
  if (v.minCoeff() < 0.0) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

MinibatchAccumulator::MinibatchAccumulator(Eigen::Index n_words, Eigen::Index n_topics)
    : n_topics_(n_topics),
      slot_of_word_(static_cast<std::size_t>(n_words), Eigen::Index{-1}),
      n_hat_z_(Eigen::VectorXd::Zero(n_topics)) {}

void MinibatchAccumulator::add(Eigen::Index word, const Eigen::VectorXd& weighted_gamma,
                               std::int64_t tokens) {
  Eigen::Index slot = slot_of_word_[static_cast<std::size_t>(word)];
  if (slot < 0) {
    slot = static_cast<Eigen::Index>(touched_.size());
    if (slot >= slots_.rows()) {
      const Eigen::Index grown = std::max<Eigen::Index>(16, slots_.rows() * 2);
      slots_.conservativeResize(grown, n_topics_);
    }
    slots_.row(slot).setZero();
    slot_of_word_[static_cast<std::size_t>(word)] = slot;
    touched_.push_back(word);
  }
  slots_.row(slot) += weighted_gamma.transpose();
  n_hat_z_ += weighted_gamma;
  token_count_ += tokens;
}

Eigen::VectorXd MinibatchAccumulator::row(Eigen::Index word) const {
  const Eigen::Index slot = slot_of_word_[static_cast<std::size_t>(word)];
  if (slot < 0) return Eigen::VectorXd::Zero(n_topics_);
  return slots_.row(slot).transpose();
}

void MinibatchAccumulator::reset() {
  for (Eigen::Index w : touched_) slot_of_word_[static_cast<std::size_t>(w)] = -1;
  touched_.clear();
  n_hat_z_.setZero();
  token_count_ = 0;
}

}  // namespace topics
