#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>

namespace topics {

/// One newline-delimited JSON object per checkpoint.
struct CheckpointRecord {
  double wall_clock_s = 0.0;
  std::int64_t docs_seen = 0;
  std::int64_t tokens_seen = 0;
  std::int64_t minibatches = 0;
  std::optional<double> heldout_ll_per_token;
  double rho_phi = 0.0;
  double rho_theta = 0.0;
};

std::string to_json_line(const CheckpointRecord& record);

/// Serialized single-writer sink for the metrics stream; safe to share across
/// the trainer thread and an evaluation worker.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void write(const CheckpointRecord& record);
  void flush();

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace topics
