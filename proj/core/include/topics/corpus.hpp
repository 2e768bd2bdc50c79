#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace topics {

/// Dense word <-> id mapping. Ids are 0..W-1 in insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws ParseError(kDuplicateWord) if the same word appears twice.
  explicit Vocabulary(std::vector<std::string> words);

  Eigen::Index size() const { return static_cast<Eigen::Index>(words_.size()); }
  const std::string& word(Eigen::Index id) const { return words_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& words() const { return words_; }
  /// Returns -1 when the word is not present.
  Eigen::Index id_of(std::string_view word) const;

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

struct DocEntry {
  std::int32_t word = 0;   // 0-based word id
  std::int32_t count = 0;  // multiplicity m >= 1
  bool operator==(const DocEntry&) const = default;
};

/// Clumped bag-of-words document: one entry per distinct word, ascending by
/// word id, with `tokens` equal to the sum of multiplicities.
struct Document {
  std::vector<DocEntry> entries;
  std::int64_t tokens = 0;
  bool operator==(const Document&) const = default;
};

/// Clumps a nonempty token list into a Document. Throws ConfigError on an
/// empty input or a negative id.
Document clump(std::span<const std::int32_t> tokens);

/// Expands a Document back into a sorted token list (inverse of clump up to
/// ordering).
std::vector<std::int32_t> expand(const Document& doc);

struct Corpus {
  std::vector<Document> docs;
  Vocabulary vocab;
  std::int64_t total_tokens = 0;

  Eigen::Index n_docs() const { return static_cast<Eigen::Index>(docs.size()); }
  Eigen::Index n_words() const { return vocab.size(); }
  bool operator==(const Corpus&) const = default;
};

/// Per-document token counts C_j, in document order.
std::vector<std::int64_t> doc_token_counts(const Corpus& corpus);

struct UciParseResult {
  Corpus corpus;
  std::int64_t dropped_documents = 0;  // zero-token doc ids dropped at ingest
};

/// Parses the UCI bag-of-words format: three integer header lines D, W, NNZ
/// followed by NNZ lines "docID wordID count" (all 1-based), plus a vocab
/// stream of exactly W lines. Repeated (doc, word) pairs are merged. Throws
/// ParseError with the offending line number on malformed input.
UciParseResult parse_uci_bow(std::istream& docword, std::istream& vocab);
UciParseResult load_uci_bow(const std::string& docword_path, const std::string& vocab_path);

void write_uci_bow(const Corpus& corpus, std::ostream& docword, std::ostream& vocab);
void save_uci_bow(const Corpus& corpus, const std::string& docword_path,
                  const std::string& vocab_path);

struct HoldoutSplit {
  Corpus train;
  Corpus test;
  std::vector<Eigen::Index> train_docs;  // original indices, ascending
  std::vector<Eigen::Index> test_docs;
};

/// Seeded disjoint partition into D - n_test training and n_test test
/// documents sharing the vocabulary. Requires 0 < n_test < D.
HoldoutSplit holdout_split(const Corpus& corpus, Eigen::Index n_test, std::uint64_t seed);

/// Token-level halving: the document is expanded, shuffled under the seed,
/// and the first ceil(C_j / 2) tokens become the first half. Requires
/// C_j >= 2.
std::pair<Document, Document> document_half_split(const Document& doc, std::uint64_t seed);

struct SyntheticCorpus {
  Corpus corpus;
  Eigen::MatrixXd true_phi;  // K x W, rows on the simplex
};

/// Samples a corpus from the LDA generative process: topics from a symmetric
/// Dirichlet(eta) over words, per-document topic weights from Dirichlet(alpha),
/// document lengths Poisson(mean_len) clamped to >= 1.
SyntheticCorpus synth_corpus(Eigen::Index n_topics, Eigen::Index n_words, Eigen::Index n_docs,
                             std::int64_t mean_len, double alpha, double eta, std::uint64_t seed);

/// Truth-file helpers: one row per topic, W space-separated decimals.
void write_topic_rows(const Eigen::MatrixXd& phi, std::ostream& out);
Eigen::MatrixXd read_topic_rows(std::istream& in);

/// splitmix64-style mixer for deriving per-item seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace topics
