#include "topics/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "topics/errors.hpp"
#include "topics/log.hpp"

namespace topics {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::int64_t parse_header_line(std::istream& in, long line_no, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    std::ostringstream os;
    os << "missing " << what << " header at line " << line_no;
    throw ParseError(ParseError::Kind::kBadHeader, line_no, os.str());
  }
  std::istringstream ls(line);
  std::int64_t value = 0;
  std::string extra;
  if (!(ls >> value) || (ls >> extra) || value < 0) {
    std::ostringstream os;
    os << "malformed " << what << " header at line " << line_no << ": \"" << line << "\"";
    throw ParseError(ParseError::Kind::kBadHeader, line_no, os.str());
  }
  return value;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto [it, inserted] = index_.emplace(words_[i], static_cast<Eigen::Index>(i));
    if (!inserted) {
      std::ostringstream os;
      os << "duplicate vocabulary word \"" << words_[i] << "\" at line " << (i + 1);
      throw ParseError(ParseError::Kind::kDuplicateWord, static_cast<long>(i + 1), os.str());
    }
  }
}

Eigen::Index Vocabulary::id_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? Eigen::Index{-1} : it->second;
}

Document clump(std::span<const std::int32_t> tokens) {
  if (tokens.empty()) throw ConfigError("clump: empty token list");
  std::map<std::int32_t, std::int32_t> counts;
  for (std::int32_t w : tokens) {
    if (w < 0) throw ConfigError("clump: negative word id");
    ++counts[w];
  }
  Document doc;
  doc.entries.reserve(counts.size());
  for (const auto& [w, m] : counts) doc.entries.push_back({w, m});
  doc.tokens = static_cast<std::int64_t>(tokens.size());
  return doc;
}

std::vector<std::int32_t> expand(const Document& doc) {
  std::vector<std::int32_t> tokens;
  tokens.reserve(static_cast<std::size_t>(doc.tokens));
  for (const auto& e : doc.entries) {
    for (std::int32_t i = 0; i < e.count; ++i) tokens.push_back(e.word);
  }
  return tokens;
}

std::vector<std::int64_t> doc_token_counts(const Corpus& corpus) {
  std::vector<std::int64_t> out;
  out.reserve(corpus.docs.size());
  for (const auto& d : corpus.docs) out.push_back(d.tokens);
  return out;
}

UciParseResult parse_uci_bow(std::istream& docword, std::istream& vocab) {
  const std::int64_t header_d = parse_header_line(docword, 1, "D");
  const std::int64_t header_w = parse_header_line(docword, 2, "W");
  const std::int64_t header_nnz = parse_header_line(docword, 3, "NNZ");

  // doc id -> (word id -> count); std::map keeps entries word-sorted.
  std::vector<std::map<std::int32_t, std::int64_t>> cells(static_cast<std::size_t>(header_d));

  long line_no = 3;
  std::string line;
  std::int64_t triples = 0;
  while (std::getline(docword, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // blank tail lines
    if (triples == header_nnz) {
      std::ostringstream os;
      os << "expected " << header_nnz << " triples but found more at line " << line_no;
      throw ParseError(ParseError::Kind::kNnzMismatch, line_no, os.str());
    }
    std::istringstream ls(line);
    std::int64_t doc_id = 0, word_id = 0, count = 0;
    std::string extra;
    if (!(ls >> doc_id >> word_id >> count) || (ls >> extra)) {
      std::ostringstream os;
      os << "malformed triple at line " << line_no << ": \"" << line << "\"";
      throw ParseError(ParseError::Kind::kBadTriple, line_no, os.str());
    }
    if (doc_id < 1 || doc_id > header_d) {
      std::ostringstream os;
      os << "docID out of range at line " << line_no;
      throw ParseError(ParseError::Kind::kDocIdRange, line_no, os.str());
    }
    if (word_id < 1 || word_id > header_w) {
      std::ostringstream os;
      os << "wordID out of range at line " << line_no;
      throw ParseError(ParseError::Kind::kWordIdRange, line_no, os.str());
    }
    if (count < 1) {
      std::ostringstream os;
      os << "count < 1 at line " << line_no;
      throw ParseError(ParseError::Kind::kBadCount, line_no, os.str());
    }
    cells[static_cast<std::size_t>(doc_id - 1)][static_cast<std::int32_t>(word_id - 1)] += count;
    ++triples;
  }
  if (triples != header_nnz) {
    std::ostringstream os;
    os << "expected " << header_nnz << " triples but stream ended after " << triples
       << " (line " << line_no << ")";
    throw ParseError(ParseError::Kind::kNnzMismatch, line_no, os.str());
  }

  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(header_w));
  long vocab_line = 0;
  while (std::getline(vocab, line)) {
    ++vocab_line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && vocab.peek() == EOF) break;  // tolerate one trailing newline
    words.push_back(line);
  }
  if (static_cast<std::int64_t>(words.size()) != header_w) {
    std::ostringstream os;
    os << "vocab line count mismatch: expected " << header_w << " words, got " << words.size()
       << " (line " << vocab_line << ")";
    throw ParseError(ParseError::Kind::kVocabMismatch, vocab_line, os.str());
  }

  UciParseResult result;
  result.corpus.vocab = Vocabulary(std::move(words));
  result.corpus.docs.reserve(cells.size());
  for (auto& cell : cells) {
    if (cell.empty()) {
      ++result.dropped_documents;
      continue;
    }
    Document doc;
    doc.entries.reserve(cell.size());
    for (const auto& [w, m] : cell) {
      doc.entries.push_back({w, static_cast<std::int32_t>(m)});
      doc.tokens += m;
    }
    result.corpus.total_tokens += doc.tokens;
    result.corpus.docs.push_back(std::move(doc));
  }
  if (result.dropped_documents > 0) {
    logging::warn("dropped " + std::to_string(result.dropped_documents) +
                  " zero-token document(s) at ingest");
  }
  return result;
}

UciParseResult load_uci_bow(const std::string& docword_path, const std::string& vocab_path) {
  auto docword = open_input(docword_path);
  auto vocab = open_input(vocab_path);
  return parse_uci_bow(docword, vocab);
}

void write_uci_bow(const Corpus& corpus, std::ostream& docword, std::ostream& vocab) {
  std::int64_t nnz = 0;
  for (const auto& d : corpus.docs) nnz += static_cast<std::int64_t>(d.entries.size());
  docword << corpus.n_docs() << "\n" << corpus.n_words() << "\n" << nnz << "\n";
  for (Eigen::Index j = 0; j < corpus.n_docs(); ++j) {
    for (const auto& e : corpus.docs[static_cast<std::size_t>(j)].entries) {
      docword << (j + 1) << " " << (e.word + 1) << " " << e.count << "\n";
    }
  }
  for (const auto& w : corpus.vocab.words()) vocab << w << "\n";
}

void save_uci_bow(const Corpus& corpus, const std::string& docword_path,
                  const std::string& vocab_path) {
  auto docword = open_output(docword_path);
  auto vocab = open_output(vocab_path);
  write_uci_bow(corpus, docword, vocab);
  if (!docword || !vocab) throw IoError("failed writing corpus files");
}

HoldoutSplit holdout_split(const Corpus& corpus, Eigen::Index n_test, std::uint64_t seed) {
  const Eigen::Index d = corpus.n_docs();
  if (n_test <= 0 || n_test >= d) {
    std::ostringstream os;
    os << "holdout_split: n_test = " << n_test << " must satisfy 0 < n_test < D = " << d;
    throw ConfigError(os.str());
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> is_test(static_cast<std::size_t>(d), false);
  for (Eigen::Index i = 0; i < n_test; ++i) is_test[static_cast<std::size_t>(order[i])] = true;

  HoldoutSplit split;
  split.train.vocab = corpus.vocab;
  split.test.vocab = corpus.vocab;
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto& doc = corpus.docs[static_cast<std::size_t>(j)];
    if (is_test[static_cast<std::size_t>(j)]) {
      split.test.docs.push_back(doc);
      split.test.total_tokens += doc.tokens;
      split.test_docs.push_back(j);
    } else {
      split.train.docs.push_back(doc);
      split.train.total_tokens += doc.tokens;
      split.train_docs.push_back(j);
    }
  }
  return split;
}

std::pair<Document, Document> document_half_split(const Document& doc, std::uint64_t seed) {
  if (doc.tokens < 2) throw ConfigError("document_half_split: document has fewer than 2 tokens");
  std::vector<std::int32_t> tokens = expand(doc);
  std::mt19937_64 rng(seed);
  std::shuffle(tokens.begin(), tokens.end(), rng);
  const std::size_t half = (tokens.size() + 1) / 2;
  const std::span<const std::int32_t> all(tokens);
  return {clump(all.subspan(0, half)), clump(all.subspan(half))};
}

SyntheticCorpus synth_corpus(Eigen::Index n_topics, Eigen::Index n_words, Eigen::Index n_docs,
                             std::int64_t mean_len, double alpha, double eta,
                             std::uint64_t seed) {
  if (n_topics < 1 || n_words < 1 || n_docs < 1 || mean_len < 1) {
    throw ConfigError("synth_corpus: all dimensions must be >= 1");
  }
  if (!(alpha > 0.0) || !(eta > 0.0)) {
    throw ConfigError("synth_corpus: alpha and eta must be positive");
  }

  std::mt19937_64 rng(seed);
  auto dirichlet = [&rng](Eigen::Index n, double concentration) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    Eigen::VectorXd v(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double g = gamma(rng);
      // Guard against underflow at very small concentrations.
      if (g <= 0.0) g = std::numeric_limits<double>::min();
      v[i] = g;
      total += g;
    }
    v /= total;
    return v;
  };

  SyntheticCorpus out;
  out.true_phi.resize(n_topics, n_words);
  std::vector<std::discrete_distribution<std::int32_t>> word_dists;
  word_dists.reserve(static_cast<std::size_t>(n_topics));
  for (Eigen::Index k = 0; k < n_topics; ++k) {
    Eigen::VectorXd phi_k = dirichlet(n_words, eta);
    out.true_phi.row(k) = phi_k.transpose();
    word_dists.emplace_back(phi_k.data(), phi_k.data() + phi_k.size());
  }

  std::poisson_distribution<std::int64_t> length_dist(static_cast<double>(mean_len));
  std::vector<std::string> words(static_cast<std::size_t>(n_words));
  {
    int width = 1;
    for (Eigen::Index w = n_words - 1; w >= 10; w /= 10) ++width;
    for (Eigen::Index w = 0; w < n_words; ++w) {
      std::ostringstream os;
      os << "w" << std::setw(width) << std::setfill('0') << w;
      words[static_cast<std::size_t>(w)] = os.str();
    }
  }
  out.corpus.vocab = Vocabulary(std::move(words));

  std::vector<std::int32_t> tokens;
  for (Eigen::Index j = 0; j < n_docs; ++j) {
    Eigen::VectorXd theta = dirichlet(n_topics, alpha);
    std::discrete_distribution<Eigen::Index> topic_dist(theta.data(), theta.data() + theta.size());
    const std::int64_t len = std::max<std::int64_t>(1, length_dist(rng));
    tokens.clear();
    tokens.reserve(static_cast<std::size_t>(len));
    for (std::int64_t i = 0; i < len; ++i) {
      const Eigen::Index z = topic_dist(rng);
      tokens.push_back(word_dists[static_cast<std::size_t>(z)](rng));
    }
    Document doc = clump(tokens);
    out.corpus.total_tokens += doc.tokens;
    out.corpus.docs.push_back(std::move(doc));
  }
  return out;
}

void write_topic_rows(const Eigen::MatrixXd& phi, std::ostream& out) {
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    for (Eigen::Index w = 0; w < phi.cols(); ++w) {
      if (w > 0) out << ' ';
      out << phi(k, w);
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_topic_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(ParseError::Kind::kBadTriple, static_cast<long>(rows.size() + 1),
                       "ragged topic row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    for (Eigen::Index w = 0; w < phi.cols(); ++w) {
      phi(k, w) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)];
    }
  }
  return phi;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace topics
