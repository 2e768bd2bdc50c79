#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/model.hpp"

namespace topics {

/// All (document, entry) pairs of the corpus in seeded shuffled order; the
/// batch algorithms share this so equal seeds give equal update sequences.
std::vector<std::pair<Eigen::Index, Eigen::Index>> shuffled_entry_order(const Corpus& corpus,
                                                                        std::uint64_t seed);

/// Batch collapsed variational state: the count statistics plus one stored
/// responsibility per clumped entry, each weighted by its multiplicity inside
/// the statistics.
///
/// Entry updates exclude the full clump (multiplicity times the stored
/// responsibility) before re-estimating, the standard clumped convention;
/// this is exact only for uncollapsed models and is treated here as the
/// batch reference approximation. Single-threaded by construction: the
/// sequential exclusion update is order-dependent.
class Cvb0State {
 public:
  Cvb0State(const Corpus& corpus, Eigen::Index n_topics, HyperParams hyper,
            std::uint64_t init_seed);
  /// Direct state injection, unvalidated. For diagnostics and tests.
  Cvb0State(const Corpus& corpus, HyperParams hyper, ModelStats stats,
            std::vector<RowMajorMatrixXd> gammas);

  const ModelStats& stats() const { return stats_; }
  const HyperParams& hyper() const { return hyper_; }
  const Corpus& corpus() const { return *corpus_; }
  const RowMajorMatrixXd& doc_gammas(Eigen::Index doc) const {
    return gammas_[static_cast<std::size_t>(doc)];
  }

  /// Re-estimates one entry's responsibility with clumped count exclusion and
  /// folds the change back into the statistics. Returns the new gamma.
  Eigen::VectorXd update_entry(Eigen::Index doc, Eigen::Index entry);

  /// Same, but the responsibility is computed from the statistics as they
  /// stand, without excluding the entry's own contribution.
  Eigen::VectorXd update_entry_no_exclusion(Eigen::Index doc, Eigen::Index entry);

  /// One full pass over all entries in seeded shuffled order, then an exact
  /// re-synchronization of the statistics from the stored gammas.
  void epoch(std::uint64_t order_seed, bool exclude_current = true);

  /// Rebuilds all statistics from the stored responsibilities.
  void resync();

  /// Largest absolute gap between the statistics and the gamma sums.
  double stats_drift() const;

 private:
  void replace_entry(Eigen::Index doc, Eigen::Index entry, const Eigen::VectorXd& gamma);

  const Corpus* corpus_;
  HyperParams hyper_;
  ModelStats stats_;
  std::vector<RowMajorMatrixXd> gammas_;  // per doc: entries x K
};

/// Responsibility with an explicit exclusion weight, evaluated against the
/// given statistics. `update_entry` uses the full clump weight; weight 1
/// recovers the single-token exclusion of the batch update rule.
Eigen::VectorXd excluded_responsibility(const ModelStats& stats, Eigen::Index doc,
                                        Eigen::Index word, const Eigen::VectorXd& gamma_old,
                                        double exclusion_weight, const HyperParams& hyper);

/// Debug export of the stored responsibilities: little-endian u64 header
/// (D, K), then per document a u64 entry count followed by its entries x K
/// matrix as row-major 64-bit floats.
void write_doc_gammas(const Cvb0State& state, const std::string& path);
std::vector<RowMajorMatrixXd> read_doc_gammas(const std::string& path);

}  // namespace topics
