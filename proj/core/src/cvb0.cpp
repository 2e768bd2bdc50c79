#include "topics/cvb0.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <random>

#include "topics/errors.hpp"

namespace topics {

namespace {

constexpr double kNegativeCountTolerance = -1e-9;

// Excluded counts may round a hair below zero; clamp that, but treat anything
// materially negative as corruption.
template <class Vec>
void clamp_excluded(Vec&& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      if (v[i] < kNegativeCountTolerance) {
        throw NumericError("negative excluded count: statistics corrupted");
      }
      v[i] = 0.0;
    }
  }
}

}  // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> shuffled_entry_order(const Corpus& corpus,
                                                                        std::uint64_t seed) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> order;
  for (Eigen::Index j = 0; j < corpus.n_docs(); ++j) {
    const auto n = static_cast<Eigen::Index>(corpus.docs[static_cast<std::size_t>(j)].entries.size());
    for (Eigen::Index t = 0; t < n; ++t) order.emplace_back(j, t);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Cvb0State::Cvb0State(const Corpus& corpus, Eigen::Index n_topics, HyperParams hyper,
                     std::uint64_t init_seed)
    : corpus_(&corpus), hyper_(std::move(hyper)) {
  if (n_topics < 1) throw ConfigError("cvb0: n_topics must be >= 1");
  if (hyper_.n_words() != corpus.n_words()) {
    throw ConfigError("cvb0: hyperparameter W does not match corpus W");
  }
  gammas_.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    gammas_.emplace_back(
        RowMajorMatrixXd::Zero(static_cast<Eigen::Index>(doc.entries.size()), n_topics));
  }
  // Hard assignment: each entry's gamma is its per-topic token count over m.
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
  resync();
}

Cvb0State::Cvb0State(const Corpus& corpus, HyperParams hyper, ModelStats stats,
                     std::vector<RowMajorMatrixXd> gammas)
    : corpus_(&corpus),
      hyper_(std::move(hyper)),
      stats_(std::move(stats)),
      gammas_(std::move(gammas)) {}

Eigen::VectorXd excluded_responsibility(const ModelStats& stats, Eigen::Index doc,
                                        Eigen::Index word, const Eigen::VectorXd& gamma_old,
                                        double exclusion_weight, const HyperParams& hyper) {
  Eigen::RowVectorXd phi_row = stats.n_phi.row(word) - exclusion_weight * gamma_old.transpose();
  Eigen::VectorXd n_z = stats.n_z - exclusion_weight * gamma_old;
  Eigen::RowVectorXd theta_row =
      stats.n_theta.row(doc) - exclusion_weight * gamma_old.transpose();
  clamp_excluded(phi_row);
  clamp_excluded(n_z);
  clamp_excluded(theta_row);
  return topic_responsibility(phi_row, n_z, theta_row, hyper.eta(word), hyper.eta_sum(),
                              hyper.alpha());
}

void Cvb0State::replace_entry(Eigen::Index doc, Eigen::Index entry,
                              const Eigen::VectorXd& gamma) {
  const auto& e = corpus_->docs[static_cast<std::size_t>(doc)].entries[static_cast<std::size_t>(entry)];
  const double weight = static_cast<double>(e.count);
  auto& stored = gammas_[static_cast<std::size_t>(doc)];

  const Eigen::RowVectorXd delta = weight * (gamma.transpose() - stored.row(entry));
  stats_.n_phi.row(e.word) += delta;
  stats_.n_z += delta.transpose();
  stats_.n_theta.row(doc) += delta;
  clamp_excluded(stats_.n_phi.row(e.word));
  clamp_excluded(stats_.n_z);
  clamp_excluded(stats_.n_theta.row(doc));
  stored.row(entry) = gamma.transpose();
}

Eigen::VectorXd Cvb0State::update_entry(Eigen::Index doc, Eigen::Index entry) {
  const auto& e = corpus_->docs[static_cast<std::size_t>(doc)].entries[static_cast<std::size_t>(entry)];
  const Eigen::VectorXd gamma_old = gammas_[static_cast<std::size_t>(doc)].row(entry).transpose();
  const Eigen::VectorXd gamma = excluded_responsibility(stats_, doc, e.word, gamma_old,
                                                        static_cast<double>(e.count), hyper_);
  replace_entry(doc, entry, gamma);
  return gamma;
}

Eigen::VectorXd Cvb0State::update_entry_no_exclusion(Eigen::Index doc, Eigen::Index entry) {
  const auto& e = corpus_->docs[static_cast<std::size_t>(doc)].entries[static_cast<std::size_t>(entry)];
  const Eigen::VectorXd gamma =
      topic_responsibility(stats_.n_phi.row(e.word), stats_.n_z, stats_.n_theta.row(doc),
                           hyper_.eta(e.word), hyper_.eta_sum(), hyper_.alpha());
  replace_entry(doc, entry, gamma);
  return gamma;
}

void Cvb0State::epoch(std::uint64_t order_seed, bool exclude_current) {
  for (const auto& [j, t] : shuffled_entry_order(*corpus_, order_seed)) {
    if (exclude_current) {
      update_entry(j, t);
    } else {
      update_entry_no_exclusion(j, t);
    }
  }
  resync();
}

void Cvb0State::resync() {
  stats_.n_phi.setZero();
  stats_.n_z.setZero();
  stats_.n_theta.setZero();
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

namespace {

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t get_u64_le(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  if (!in) throw IoError("gamma export truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_doc_gammas(const Cvb0State& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const Eigen::Index n_docs = state.corpus().n_docs();
  const Eigen::Index n_topics = state.stats().n_topics();
  put_u64_le(out, static_cast<std::uint64_t>(n_docs));
  put_u64_le(out, static_cast<std::uint64_t>(n_topics));
  for (Eigen::Index j = 0; j < n_docs; ++j) {
    const auto& g = state.doc_gammas(j);
    put_u64_le(out, static_cast<std::uint64_t>(g.rows()));
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      for (Eigen::Index k = 0; k < n_topics; ++k) {
        put_u64_le(out, std::bit_cast<std::uint64_t>(g(t, k)));
      }
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<RowMajorMatrixXd> read_doc_gammas(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  const auto n_docs = static_cast<Eigen::Index>(get_u64_le(in));
  const auto n_topics = static_cast<Eigen::Index>(get_u64_le(in));
  std::vector<RowMajorMatrixXd> gammas;
  gammas.reserve(static_cast<std::size_t>(n_docs));
  for (Eigen::Index j = 0; j < n_docs; ++j) {
    const auto n_entries = static_cast<Eigen::Index>(get_u64_le(in));
    RowMajorMatrixXd g(n_entries, n_topics);
    for (Eigen::Index t = 0; t < n_entries; ++t) {
      for (Eigen::Index k = 0; k < n_topics; ++k) {
        g(t, k) = std::bit_cast<double>(get_u64_le(in));
      }
    }
    gammas.push_back(std::move(g));
  }
  return gammas;
}

double Cvb0State::stats_drift() const {
  ModelStats exact;
  exact.n_phi = RowMajorMatrixXd::Zero(stats_.n_words(), stats_.n_topics());
  exact.n_z = Eigen::VectorXd::Zero(stats_.n_topics());
  exact.n_theta = RowMajorMatrixXd::Zero(stats_.n_docs(), stats_.n_topics());
  for (Eigen::Index j = 0; j < corpus_->n_docs(); ++j) {
    const auto& entries = corpus_->docs[static_cast<std::size_t>(j)].entries;
    const auto& g = gammas_[static_cast<std::size_t>(j)];
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      const double weight = static_cast<double>(entries[static_cast<std::size_t>(t)].count);
      exact.n_phi.row(entries[static_cast<std::size_t>(t)].word) += weight * g.row(t);
      exact.n_theta.row(j) += weight * g.row(t);
      exact.n_z += weight * g.row(t).transpose();
    }
  }
  double drift = (exact.n_phi - stats_.n_phi).cwiseAbs().maxCoeff();
  drift = std::max(drift, (exact.n_z - stats_.n_z).cwiseAbs().maxCoeff());
  drift = std::max(drift, (exact.n_theta - stats_.n_theta).cwiseAbs().maxCoeff());
  return drift;
}

}  // namespace topics
