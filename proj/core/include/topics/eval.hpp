#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/schedule.hpp"

namespace topics {

struct EvalConfig {
  int local_passes_max = 100;
  double local_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Document step schedule for the completion inference.
  StepSchedule theta_schedule{1.0, 10.0, 0.9};
};

struct HeldoutResult {
  double ll_per_token = 0.0;
  std::int64_t scored_tokens = 0;
  std::int64_t skipped_documents = 0;  // test docs with fewer than 2 tokens
};

/// Document-completion held-out likelihood: each test document is halved at
/// token level under a per-document seed; document weights are estimated on
/// the first half against the fixed topics (collapsed-style responsibilities
/// plus online-averaged document counts, to convergence or the pass cap); the
/// second half is scored as the per-token log mixture likelihood. Token-
/// weighted mean over all scored halves. Never mutates its inputs.
HeldoutResult heldout_loglik(const Eigen::MatrixXd& phi, const std::vector<Document>& test_docs,
                             double alpha, const EvalConfig& config = {});

/// Mean log mixture likelihood per token of `doc` under fixed phi and theta.
double completion_ll(const Eigen::MatrixXd& phi, const Eigen::VectorXd& theta,
                     const Document& doc);

/// Greedy maximum-cosine bipartite matching between estimated and true
/// topics (highest remaining pair first, no reuse); mean cosine over the K
/// matched pairs. A lower bound on the optimal-assignment score.
double topic_match_score(const Eigen::MatrixXd& phi_est, const Eigen::MatrixXd& phi_true);

/// Per topic, the n most probable words; ties broken by ascending word id.
std::vector<std::vector<std::string>> top_words(const Eigen::MatrixXd& phi, int n,
                                                const Vocabulary& vocab);

}  // namespace topics
