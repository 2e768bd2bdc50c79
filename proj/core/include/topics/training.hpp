#pragma once

#include <cstdint>
#include <functional>

#include "topics/model.hpp"

namespace topics {

/// Counters stamped onto every checkpoint. `train_seconds` accumulates time
/// spent inside update arithmetic only; snapshot capture and checkpoint
/// callbacks run with the clock paused so evaluation cost never pollutes
/// wall-clock curves.
struct TrainProgress {
  double train_seconds = 0.0;
  std::int64_t epoch = 0;
  std::int64_t docs_seen = 0;
  std::int64_t tokens_seen = 0;
  std::int64_t minibatches = 0;
  double rho_phi = 0.0;
  double rho_theta = 0.0;
};

/// When to fire checkpoints. Zero disables a trigger; the end-of-training
/// checkpoint always fires.
struct CheckpointCadence {
  double seconds = 0.0;
  std::int64_t minibatches = 0;
};

/// Receives an immutable deep copy of the statistics; safe to hand to another
/// thread.
using CheckpointFn = std::function<void(const ModelStats&, const TrainProgress&)>;

}  // namespace topics
