#include "topics/metrics.hpp"

#include <nlohmann/json.hpp>

#include "topics/errors.hpp"

namespace topics {

std::string to_json_line(const CheckpointRecord& record) {
  nlohmann::json j;
  j["wall_clock_s"] = record.wall_clock_s;
  j["docs_seen"] = record.docs_seen;
  j["tokens_seen"] = record.tokens_seen;
  j["minibatches"] = record.minibatches;
  if (record.heldout_ll_per_token.has_value()) {
    j["heldout_ll_per_token"] = *record.heldout_ll_per_token;
  }
  j["rho_phi"] = record.rho_phi;
  j["rho_theta"] = record.rho_theta;
  return j.dump();
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
}

void MetricsWriter::write(const CheckpointRecord& record) {
  const std::string line = to_json_line(record);
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << line << '\n';
}

void MetricsWriter::flush() {
  std::lock_guard<std::mutex> lock(mutex_);
  out_.flush();
}

}  // namespace topics
