#include "topics/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topics/errors.hpp"
#include "topics/scvb0.hpp"

namespace topics {

namespace {

// Completion inference on one half-document: collapsed-style responsibilities
// against fixed topics, document counts online-averaged under the schedule.
Eigen::VectorXd infer_theta(const Eigen::MatrixXd& phi, const Document& doc, double alpha,
                            const EvalConfig& config) {
  const Eigen::Index n_topics = phi.rows();
  const double doc_tokens = static_cast<double>(doc.tokens);
  Eigen::RowVectorXd n_theta =
      Eigen::RowVectorXd::Constant(n_topics, doc_tokens / static_cast<double>(n_topics));

  auto normalized = [&](const Eigen::RowVectorXd& counts) {
    Eigen::VectorXd theta = counts.transpose().array() + alpha;
    theta /= theta.sum();
    return theta;
  };

  Eigen::VectorXd theta = normalized(n_theta);
  std::int64_t step = 1;
  for (int pass = 0; pass < config.local_passes_max; ++pass) {
    for (const auto& entry : doc.entries) {
      Eigen::VectorXd gamma =
          phi.col(entry.word).array() * (n_theta.transpose().array() + alpha);
      const double total = gamma.sum();
      if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericError("heldout inference: degenerate responsibility");
      }
      gamma /= total;
      clumped_doc_update(n_theta, doc_tokens, gamma, config.theta_schedule.rho(step),
                         entry.count);
      step += entry.count;
    }
    const Eigen::VectorXd next = normalized(n_theta);
    const double mean_change = (next - theta).cwiseAbs().mean();
    theta = next;
    if (mean_change < config.local_tol) break;
  }
  return theta;
}

}  // namespace

double completion_ll(const Eigen::MatrixXd& phi, const Eigen::VectorXd& theta,
                     const Document& doc) {
  double total = 0.0;
  for (const auto& entry : doc.entries) {
    total += static_cast<double>(entry.count) * std::log(theta.dot(phi.col(entry.word)));
  }
  return total / static_cast<double>(doc.tokens);
}

HeldoutResult heldout_loglik(const Eigen::MatrixXd& phi, const std::vector<Document>& test_docs,
                             double alpha, const EvalConfig& config) {
  if (!(alpha > 0.0)) throw ConfigError("heldout_loglik: alpha must be positive");
  require_valid_schedule(config.theta_schedule, "eval theta");
  if (config.local_passes_max < 1 || !(config.local_tol > 0.0)) {
    throw ConfigError("heldout_loglik: invalid local inference settings");
  }

  HeldoutResult result;
  double total_ll = 0.0;
  for (std::size_t i = 0; i < test_docs.size(); ++i) {
    const Document& doc = test_docs[i];
    if (doc.tokens < 2) {
      ++result.skipped_documents;
      continue;
    }
    const auto [estimate_half, score_half] =
        document_half_split(doc, mix_seed(config.seed, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXd theta = infer_theta(phi, estimate_half, alpha, config);
    for (const auto& entry : score_half.entries) {
      total_ll +=
          static_cast<double>(entry.count) * std::log(theta.dot(phi.col(entry.word)));
    }
    result.scored_tokens += score_half.tokens;
  }
  result.ll_per_token =
      result.scored_tokens > 0 ? total_ll / static_cast<double>(result.scored_tokens) : 0.0;
  return result;
}

double topic_match_score(const Eigen::MatrixXd& phi_est, const Eigen::MatrixXd& phi_true) {
  if (phi_est.rows() != phi_true.rows() || phi_est.cols() != phi_true.cols()) {
    throw ConfigError("topic_match_score: dimension mismatch");
  }
  const Eigen::Index n_topics = phi_est.rows();
  Eigen::MatrixXd cosine(n_topics, n_topics);
  for (Eigen::Index a = 0; a < n_topics; ++a) {
    for (Eigen::Index b = 0; b < n_topics; ++b) {
      const double denom = phi_est.row(a).norm() * phi_true.row(b).norm();
      cosine(a, b) = denom > 0.0 ? phi_est.row(a).dot(phi_true.row(b)) / denom : 0.0;
    }
  }
  std::vector<bool> est_used(static_cast<std::size_t>(n_topics), false);
  std::vector<bool> true_used(static_cast<std::size_t>(n_topics), false);
  double total = 0.0;
  for (Eigen::Index round = 0; round < n_topics; ++round) {
    double best = -1.0;
    Eigen::Index best_a = 0, best_b = 0;
    for (Eigen::Index a = 0; a < n_topics; ++a) {
      if (est_used[static_cast<std::size_t>(a)]) continue;
      for (Eigen::Index b = 0; b < n_topics; ++b) {
        if (true_used[static_cast<std::size_t>(b)]) continue;
        if (cosine(a, b) > best) {
          best = cosine(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    est_used[static_cast<std::size_t>(best_a)] = true;
    true_used[static_cast<std::size_t>(best_b)] = true;
    total += best;
  }
  return total / static_cast<double>(n_topics);
}

std::vector<std::vector<std::string>> top_words(const Eigen::MatrixXd& phi, int n,
                                                const Vocabulary& vocab) {
  if (phi.cols() != vocab.size()) {
    throw ConfigError("top_words: phi has " + std::to_string(phi.cols()) +
                      " columns but vocabulary has " + std::to_string(vocab.size()) + " words");
  }
  if (n < 1 || n > phi.cols()) {
    throw ConfigError("top_words: n must be in [1, W]");
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(static_cast<std::size_t>(phi.rows()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(phi.cols()));
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (phi(k, a) != phi(k, b)) return phi(k, a) > phi(k, b);
      return a < b;
    });
    std::vector<std::string> words;
    words.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) words.push_back(vocab.word(order[static_cast<std::size_t>(i)]));
    out.push_back(std::move(words));
  }
  return out;
}

}  // namespace topics
