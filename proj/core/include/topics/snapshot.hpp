#pragma once

#include <string>

#include "topics/model.hpp"

namespace topics {

/// Model snapshot container.
///
/// Binary layout (all little-endian): 8-byte magic "TOPICMDL", u32 version,
/// u64 K, u64 W, u64 D, f64 alpha, W * f64 eta, then the statistics as 64-bit
/// floats: n_phi row-major (W x K), n_z (K), n_theta row-major (D x K).
/// A JSON sidecar with the run configuration lives next to the file at
/// `path + ".json"`.
struct Snapshot {
  ModelStats stats;
  HyperParams hyper;
};

void save_snapshot(const std::string& path, const ModelStats& stats, const HyperParams& hyper);
Snapshot load_snapshot(const std::string& path);

void write_snapshot_sidecar(const std::string& snapshot_path, const std::string& json_text);

}  // namespace topics
