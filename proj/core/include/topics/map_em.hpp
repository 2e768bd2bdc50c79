#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/model.hpp"

namespace topics {

/// One EM responsibility in the unnormalized parameterization:
///   gamma_k proportional to (n_phi_wk + eta_w - 1) / (n_z_k + sum_w(eta_w - 1))
///                           * (n_theta_jk + alpha - 1).
/// Requires alpha >= 1 and eta_w >= 1; falls back to uniform when every
/// unnormalized entry is exactly zero (possible only at alpha = eta = 1 with
/// empty counts). Identical arithmetic to the collapsed update with the
/// priors shifted down by one.
Eigen::VectorXd map_responsibility(const ModelStats& stats, Eigen::Index doc, Eigen::Index word,
                                   const HyperParams& hyper);

/// Batch EM state for MAP estimation of the count statistics: statistics plus
/// stored responsibilities, multiplicity-weighted like the collapsed batch
/// state. Hyperparameters must satisfy alpha >= 1, eta >= 1.
class EmState {
 public:
  EmState(const Corpus& corpus, Eigen::Index n_topics, HyperParams hyper,
          std::uint64_t init_seed);

  const ModelStats& stats() const { return stats_; }
  const HyperParams& hyper() const { return hyper_; }
  const Corpus& corpus() const { return *corpus_; }
  const RowMajorMatrixXd& doc_gammas(Eigen::Index doc) const {
    return gammas_[static_cast<std::size_t>(doc)];
  }

  /// Full E-step (all responsibilities from the current statistics) followed
  /// by a full M-step. Returns the largest absolute responsibility change.
  double full_iteration();

  /// Coordinate-ascent ordering of the same algorithm: per entry, recompute
  /// the responsibility and immediately fold the change into the statistics.
  void incremental_epoch(std::uint64_t order_seed);

  /// One incremental coordinate-ascent step; exposed so callers can trace
  /// per-update trajectories.
  Eigen::VectorXd incremental_update(Eigen::Index doc, Eigen::Index entry);

  /// M-step: replaces the statistics with the responsibility sums.
  void sync_stats();

  /// The reparameterized EM lower bound, up to its additive constant.
  /// Coefficients come from the stored responsibilities, log arguments from
  /// the current statistics; the two coincide after an M-step.
  double bound() const;

 private:
  const Corpus* corpus_;
  HyperParams hyper_;
  ModelStats stats_;
  std::vector<RowMajorMatrixXd> gammas_;
};

struct BoundTracePoint {
  int iteration = 0;
  double bound = 0.0;
  double max_gamma_change = 0.0;
};

struct MapFitResult {
  EmState state;
  std::vector<BoundTracePoint> trace;  // entry 0 is the initial state
};

/// Hard-assignment initialization followed by `iterations` full EM sweeps.
MapFitResult map_fit(const Corpus& corpus, Eigen::Index n_topics, const HyperParams& hyper,
                     int iterations, std::uint64_t seed);

/// CSV: iteration,bound,max_abs_gamma_change
void write_bound_trace_csv(const std::vector<BoundTracePoint>& trace, std::ostream& out);

}  // namespace topics
