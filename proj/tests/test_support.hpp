#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/model.hpp"

namespace topics::test {

inline Vocabulary make_vocab(Eigen::Index n_words) {
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(n_words));
  for (Eigen::Index w = 0; w < n_words; ++w) words.push_back("w" + std::to_string(w));
  return Vocabulary(std::move(words));
}

/// Corpus from explicit (word, count) entry lists, one per document.
inline Corpus make_corpus(Eigen::Index n_words,
                          const std::vector<std::vector<std::pair<int, int>>>& docs) {
  Corpus corpus;
  corpus.vocab = make_vocab(n_words);
  for (const auto& entries : docs) {
    Document doc;
    for (const auto& [w, m] : entries) {
      doc.entries.push_back({static_cast<std::int32_t>(w), static_cast<std::int32_t>(m)});
      doc.tokens += m;
    }
    corpus.total_tokens += doc.tokens;
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

inline Eigen::VectorXd random_simplex(Eigen::Index k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(1e-3, 1.0);
  Eigen::VectorXd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v[i] = unit(rng);
  v /= v.sum();
  return v;
}

inline Corpus random_corpus(std::mt19937_64& rng, Eigen::Index n_docs, Eigen::Index n_words,
                            int max_len) {
  std::uniform_int_distribution<int> len_dist(1, max_len);
  std::uniform_int_distribution<std::int32_t> word_dist(0,
                                                        static_cast<std::int32_t>(n_words - 1));
  Corpus corpus;
  corpus.vocab = make_vocab(n_words);
  for (Eigen::Index j = 0; j < n_docs; ++j) {
    const int len = len_dist(rng);
    std::vector<std::int32_t> tokens;
    tokens.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) tokens.push_back(word_dist(rng));
    Document doc = clump(tokens);
    corpus.total_tokens += doc.tokens;
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

/// Random nonnegative statistics with consistent column sums and document
/// totals; suitable wherever ModelStats invariants are assumed.
inline ModelStats random_stats(std::mt19937_64& rng, Eigen::Index n_words,
                               Eigen::Index n_topics, Eigen::Index n_docs) {
  std::uniform_real_distribution<double> mass(0.0, 5.0);
  ModelStats stats;
  stats.n_phi.resize(n_words, n_topics);
  for (Eigen::Index w = 0; w < n_words; ++w) {
    for (Eigen::Index k = 0; k < n_topics; ++k) stats.n_phi(w, k) = mass(rng);
  }
  stats.n_z = stats.n_phi.colwise().sum().transpose();
  stats.n_theta.resize(n_docs, n_topics);
  for (Eigen::Index j = 0; j < n_docs; ++j) {
    for (Eigen::Index k = 0; k < n_topics; ++k) stats.n_theta(j, k) = mass(rng);
  }
  return stats;
}

/// Uniformly random dyadic value in (0, 2]: a multiple of 2^-10, so adding or
/// subtracting 1 is exact in double precision.
inline double random_dyadic(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> grid(1, 2048);
  return static_cast<double>(grid(rng)) / 1024.0;
}

}  // namespace topics::test
