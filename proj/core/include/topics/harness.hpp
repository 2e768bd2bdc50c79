#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topics/eval.hpp"
#include "topics/metrics.hpp"
#include "topics/schedule.hpp"

namespace topics {

enum class Algorithm { kScvb0, kSvb, kCvb0, kMapEm };

std::optional<Algorithm> parse_algorithm(std::string_view name);
std::string algorithm_name(Algorithm algorithm);

/// Everything one training run needs. Validation is algorithm-aware: the
/// schedules only matter for the stochastic trainers, the offset only for the
/// uncollapsed baseline, and MAP estimation requires alpha, eta >= 1.
struct RunSpec {
  Algorithm algorithm = Algorithm::kScvb0;
  std::string docword_path;
  std::string vocab_path;
  Eigen::Index n_topics = 20;
  double alpha = 0.1;
  double eta = 0.01;
  StepSchedule phi_schedule{10.0, 1000.0, 0.9};
  StepSchedule theta_schedule{1.0, 10.0, 0.9};
  int minibatch_docs = 100;
  int burn_in_passes = 1;
  double svb_offset = 0.0;
  int epochs = 1;
  double max_train_seconds = 0.0;  // 0 = epochs only
  Eigen::Index n_test = 0;         // 0 = no holdout evaluation
  double checkpoint_seconds = 0.0;
  std::int64_t checkpoint_minibatches = 0;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  int eval_local_passes = 100;
  double eval_local_tol = 1e-6;
};

void validate_run_spec(const RunSpec& spec);

/// In-memory result of one run: checkpoint records in firing order plus the
/// paths written.
struct RunResult {
  std::vector<CheckpointRecord> checkpoints;
  std::string snapshot_path;
  std::string metrics_path;
  HeldoutResult final_eval;
  bool evaluated = false;
};

/// Loads the corpus, splits off the holdout when requested, trains the
/// configured algorithm with checkpoint evaluation on a worker thread, and
/// writes the snapshot (plus JSON sidecar), metrics stream, and evaluation
/// report under spec.out_dir.
RunResult run_training(const RunSpec& spec);

/// CLI front: run_training with errors mapped onto exit codes
/// (0 ok, 1 runtime/IO, 2 invalid configuration).
int cmd_train(const RunSpec& spec);

struct BenchRow {
  std::string algorithm;  // run label, e.g. "svb-b1-o0.5"
  std::uint64_t seed = 0;
  CheckpointRecord record;
};

/// Trains every (run, repeat) pair against one shared corpus and holdout
/// split; repeat r uses seed spec.seed + r. Rows arrive in checkpoint order
/// per run. When out_dir is nonempty, writes per-run metrics streams and the
/// comparison CSV "bench.csv" (algorithm,checkpoint_time,heldout_ll,...).
std::vector<BenchRow> run_bench(std::vector<RunSpec> runs, int repeats,
                                const std::string& out_dir);

int cmd_bench(const std::vector<RunSpec>& runs, int repeats, const std::string& out_dir);

/// Top-n word lists recovered from a snapshot (variational-mean recovery with
/// the stored hyperparameters). Errors when the vocabulary size disagrees
/// with the snapshot.
std::vector<std::vector<std::string>> snapshot_top_words(const std::string& snapshot_path,
                                                         const std::string& vocab_path, int n);

int cmd_topics(const std::string& snapshot_path, const std::string& vocab_path, int n);

struct SynthSpec {
  Eigen::Index n_topics = 5;
  Eigen::Index n_words = 100;
  Eigen::Index n_docs = 2000;
  std::int64_t mean_len = 50;
  double alpha = 0.1;
  double eta = 0.05;
  std::uint64_t seed = 1;
};

/// Writes a generated corpus as docword/vocab files plus the true-topic rows.
int cmd_synth(const SynthSpec& spec, const std::string& docword_path,
              const std::string& vocab_path, const std::string& truth_path);

}  // namespace topics
