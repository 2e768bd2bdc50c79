#include "topics/harness.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "topics/cvb0.hpp"
#include "topics/errors.hpp"
#include "topics/log.hpp"
#include "topics/map_em.hpp"
#include "topics/scvb0.hpp"
#include "topics/snapshot.hpp"
#include "topics/svb.hpp"

namespace topics {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kInitSalt = 0x1717;
constexpr std::uint64_t kHoldoutSalt = 0x5bd1;
constexpr std::uint64_t kEvalSalt = 0xe7a1;
constexpr std::uint64_t kEpochSalt = 0x0e90;

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

/// Evaluates checkpoint snapshots off the training thread, in submission
/// order, and forwards finished records to the metrics writer.
class CheckpointEvalWorker {
 public:
  CheckpointEvalWorker(HyperParams recovery_hyper, double eval_alpha, EvalConfig eval_config,
                       const std::vector<Document>* test_docs, MetricsWriter* writer,
                       std::vector<CheckpointRecord>* collected)
      : recovery_hyper_(std::move(recovery_hyper)),
        eval_alpha_(eval_alpha),
        eval_config_(eval_config),
        test_docs_(test_docs),
        writer_(writer),
        collected_(collected),
        worker_([this] { run(); }) {}

  ~CheckpointEvalWorker() {
    try {
      finish();
    } catch (...) {  // finish() already ran, or the queue is being torn down
    }
  }

  void submit(const ModelStats& stats, const TrainProgress& progress) {
    std::unique_lock<std::mutex> lock(mutex_);
    not_full_.wait(lock, [this] { return jobs_.size() < kMaxQueued || done_; });
    if (done_) return;
    jobs_.push_back(Job{stats, progress});
    lock.unlock();
    not_empty_.notify_one();
  }

  /// Drains the queue, joins the worker, rethrows any evaluation error.
  void finish() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      done_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
    if (worker_.joinable()) worker_.join();
    if (failure_) std::rethrow_exception(failure_);
  }

  /// Valid after finish().
  HeldoutResult last_eval() const { return last_eval_; }

 private:
  struct Job {
    ModelStats stats;
    TrainProgress progress;
  };
  static constexpr std::size_t kMaxQueued = 4;

  void run() {
    for (;;) {
      Job job;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        not_empty_.wait(lock, [this] { return !jobs_.empty() || done_; });
        if (jobs_.empty()) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      not_full_.notify_one();
      try {
        process(job);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!failure_) failure_ = std::current_exception();
        done_ = true;
        not_full_.notify_all();
        return;
      }
    }
  }

  void process(const Job& job) {
    CheckpointRecord record;
    record.wall_clock_s = job.progress.train_seconds;
    record.docs_seen = job.progress.docs_seen;
    record.tokens_seen = job.progress.tokens_seen;
    record.minibatches = job.progress.minibatches;
    record.rho_phi = job.progress.rho_phi;
    record.rho_theta = job.progress.rho_theta;
    if (test_docs_ != nullptr && !test_docs_->empty()) {
      const Eigen::MatrixXd phi =
          recover_topics(job.stats, recovery_hyper_, RecoveryMode::kVariationalMean);
      const HeldoutResult eval = heldout_loglik(phi, *test_docs_, eval_alpha_, eval_config_);
      record.heldout_ll_per_token = eval.ll_per_token;
      last_eval_ = eval;
    }
    if (writer_ != nullptr) writer_->write(record);
    if (collected_ != nullptr) collected_->push_back(record);
  }

  HyperParams recovery_hyper_;
  double eval_alpha_;
  EvalConfig eval_config_;
  const std::vector<Document>* test_docs_;
  MetricsWriter* writer_;
  std::vector<CheckpointRecord>* collected_;

  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<Job> jobs_;
  bool done_ = false;
  std::exception_ptr failure_;
  HeldoutResult last_eval_;
  std::thread worker_;
};

struct TrainOutcome {
  ModelStats stats;
  HyperParams stored_hyper;  // what the snapshot header carries
  std::vector<CheckpointRecord> checkpoints;
  HeldoutResult final_eval;
  bool evaluated = false;
};

/// Epoch-level checkpointing for the batch algorithms; `cadence.minibatches`
/// counts epochs there and the metrics field reports epochs.
template <class EpochFn, class SnapshotFn>
void drive_batch_epochs(const RunSpec& spec, std::int64_t corpus_docs,
                        std::int64_t corpus_tokens, EpochFn&& run_epoch,
                        SnapshotFn&& take_snapshot, CheckpointEvalWorker& worker) {
  TrainProgress progress;
  double since_checkpoint_s = 0.0;
  std::int64_t since_checkpoint_epochs = 0;
  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    const auto start = Clock::now();
    run_epoch(epoch);
    const double elapsed = seconds_between(start, Clock::now());
    progress.train_seconds += elapsed;
    progress.epoch = epoch;
    progress.docs_seen += corpus_docs;
    progress.tokens_seen += corpus_tokens;
    progress.minibatches = epoch;
    since_checkpoint_s += elapsed;
    ++since_checkpoint_epochs;

    const bool want_time = spec.checkpoint_seconds > 0.0 && since_checkpoint_s >= spec.checkpoint_seconds;
    const bool want_epoch = spec.checkpoint_minibatches > 0 &&
                            since_checkpoint_epochs >= spec.checkpoint_minibatches;
    if (want_time || want_epoch) {
      worker.submit(take_snapshot(), progress);
      since_checkpoint_s = 0.0;
      since_checkpoint_epochs = 0;
    }
    if (spec.max_train_seconds > 0.0 && progress.train_seconds >= spec.max_train_seconds) break;
  }
  worker.submit(take_snapshot(), progress);
}

TrainOutcome train_one(const RunSpec& spec, const Corpus& train_corpus,
                       const std::vector<Document>* test_docs, MetricsWriter* writer,
                       const std::string& bound_trace_path = {}) {
  const HyperParams hyper =
      HyperParams::symmetric(spec.alpha, spec.eta, train_corpus.n_words());

  EvalConfig eval_config;
  eval_config.local_passes_max = spec.eval_local_passes;
  eval_config.local_tol = spec.eval_local_tol;
  eval_config.seed = mix_seed(spec.seed, kEvalSalt);
  eval_config.theta_schedule = spec.theta_schedule;

  TrainOutcome outcome{ModelStats{}, hyper, {}, {}, false};
  double eval_alpha = spec.alpha;
  HyperParams recovery_hyper = hyper;
  if (spec.algorithm == Algorithm::kSvb) {
    recovery_hyper = hyper.shifted(spec.svb_offset);
    eval_alpha = recovery_hyper.alpha();
    outcome.stored_hyper = recovery_hyper;
  }

  CheckpointEvalWorker worker(recovery_hyper, eval_alpha, eval_config, test_docs, writer,
                              &outcome.checkpoints);
  const CheckpointFn on_checkpoint = [&worker](const ModelStats& stats,
                                               const TrainProgress& progress) {
    worker.submit(stats, progress);
  };
  const CheckpointCadence cadence{spec.checkpoint_seconds, spec.checkpoint_minibatches};

  switch (spec.algorithm) {
    case Algorithm::kScvb0: {
      Scvb0Config config{spec.n_topics, hyper};
      config.phi_schedule = spec.phi_schedule;
      config.theta_schedule = spec.theta_schedule;
      config.minibatch_docs = spec.minibatch_docs;
      config.burn_in_passes = spec.burn_in_passes;
      config.epochs = spec.epochs;
      config.max_train_seconds = spec.max_train_seconds;
      config.seed = spec.seed;
      Scvb0Trainer trainer(train_corpus, config);
      outcome.stats = trainer.train(cadence, on_checkpoint);
      break;
    }
    case Algorithm::kSvb: {
      SvbConfig config{spec.n_topics, hyper};
      config.hyper_offset = spec.svb_offset;
      config.phi_schedule = spec.phi_schedule;
      config.minibatch_docs = spec.minibatch_docs;
      config.burn_in_passes = std::max(1, spec.burn_in_passes);
      config.epochs = spec.epochs;
      config.max_train_seconds = spec.max_train_seconds;
      config.seed = spec.seed;
      SvbTrainer trainer(train_corpus, config);
      outcome.stats = trainer.train(cadence, on_checkpoint);
      break;
    }
    case Algorithm::kCvb0: {
      Cvb0State state(train_corpus, spec.n_topics, hyper, mix_seed(spec.seed, kInitSalt));
      drive_batch_epochs(
          spec, train_corpus.n_docs(), train_corpus.total_tokens,
          [&](int epoch) {
            state.epoch(mix_seed(spec.seed, kEpochSalt + static_cast<std::uint64_t>(epoch)));
          },
          [&] { return state.stats(); }, worker);
      outcome.stats = state.stats();
      break;
    }
    case Algorithm::kMapEm: {
      EmState state(train_corpus, spec.n_topics, hyper, mix_seed(spec.seed, kInitSalt));
      std::vector<BoundTracePoint> trace;
      trace.push_back({0, state.bound(), 0.0});
      drive_batch_epochs(
          spec, train_corpus.n_docs(), train_corpus.total_tokens,
          [&](int epoch) {
            const double change = state.full_iteration();
            trace.push_back({epoch, state.bound(), change});
          },
          [&] { return state.stats(); }, worker);
      outcome.stats = state.stats();
      if (!bound_trace_path.empty()) {
        std::ofstream out(bound_trace_path);
        if (!out) throw IoError("cannot open " + bound_trace_path + " for writing");
        write_bound_trace_csv(trace, out);
      }
      break;
    }
  }

  worker.finish();
  if (test_docs != nullptr && !test_docs->empty()) {
    outcome.evaluated = true;
    outcome.final_eval = worker.last_eval();
  }
  return outcome;
}

nlohmann::json spec_to_json(const RunSpec& spec) {
  nlohmann::json j;
  j["algorithm"] = algorithm_name(spec.algorithm);
  j["docword"] = spec.docword_path;
  j["vocab"] = spec.vocab_path;
  j["k"] = spec.n_topics;
  j["alpha"] = spec.alpha;
  j["eta"] = spec.eta;
  j["phi_schedule"] = {{"s", spec.phi_schedule.s},
                       {"tau", spec.phi_schedule.tau},
                       {"kappa", spec.phi_schedule.kappa}};
  j["theta_schedule"] = {{"s", spec.theta_schedule.s},
                         {"tau", spec.theta_schedule.tau},
                         {"kappa", spec.theta_schedule.kappa}};
  j["minibatch_docs"] = spec.minibatch_docs;
  j["burn_in_passes"] = spec.burn_in_passes;
  if (spec.algorithm == Algorithm::kSvb) j["svb_offset"] = spec.svb_offset;
  j["epochs"] = spec.epochs;
  j["max_train_seconds"] = spec.max_train_seconds;
  j["n_test"] = spec.n_test;
  j["checkpoint_seconds"] = spec.checkpoint_seconds;
  j["checkpoint_minibatches"] = spec.checkpoint_minibatches;
  j["seed"] = spec.seed;
  return j;
}

std::string run_label(const RunSpec& spec) {
  std::ostringstream os;
  os << algorithm_name(spec.algorithm);
  if (spec.algorithm == Algorithm::kSvb) {
    os << "-b" << spec.burn_in_passes << "-o" << spec.svb_offset;
  }
  return os.str();
}

int guard_cli(const char* what, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "scvb0") return Algorithm::kScvb0;
  if (name == "svb") return Algorithm::kSvb;
  if (name == "cvb0") return Algorithm::kCvb0;
  if (name == "map") return Algorithm::kMapEm;
  return std::nullopt;
}

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kScvb0: return "scvb0";
    case Algorithm::kSvb: return "svb";
    case Algorithm::kCvb0: return "cvb0";
    case Algorithm::kMapEm: return "map";
  }
  return "?";
}

void validate_run_spec(const RunSpec& spec) {
  if (spec.docword_path.empty() || spec.vocab_path.empty()) {
    throw ConfigError("run spec: docword and vocab paths are required");
  }
  if (spec.n_topics < 1) throw ConfigError("run spec: k must be >= 1");
  if (!(spec.alpha > 0.0)) throw ConfigError("run spec: alpha must be positive");
  if (!(spec.eta > 0.0)) throw ConfigError("run spec: eta must be positive");
  if (spec.minibatch_docs < 1) throw ConfigError("run spec: minibatch must be >= 1");
  if (spec.burn_in_passes < 0) throw ConfigError("run spec: burn-in must be >= 0");
  if (spec.epochs < 0) throw ConfigError("run spec: epochs must be >= 0");
  if (spec.max_train_seconds < 0) throw ConfigError("run spec: train-seconds must be >= 0");
  if (spec.n_test < 0) throw ConfigError("run spec: n-test must be >= 0");
  if (spec.checkpoint_seconds < 0 || spec.checkpoint_minibatches < 0) {
    throw ConfigError("run spec: checkpoint cadence must be >= 0");
  }
  if (spec.eval_local_passes < 1 || !(spec.eval_local_tol > 0.0)) {
    throw ConfigError("run spec: invalid eval settings");
  }
  switch (spec.algorithm) {
    case Algorithm::kScvb0:
      require_valid_schedule(spec.phi_schedule, "phi");
      require_valid_schedule(spec.theta_schedule, "theta");
      break;
    case Algorithm::kSvb:
      require_valid_schedule(spec.phi_schedule, "phi");
      if (spec.svb_offset < 0) throw ConfigError("run spec: svb offset must be >= 0");
      if (spec.burn_in_passes < 1) {
        throw ConfigError("run spec: svb needs at least one local pass");
      }
      break;
    case Algorithm::kCvb0:
      break;
    case Algorithm::kMapEm:
      if (spec.alpha < 1.0 || spec.eta < 1.0) {
        throw ConfigError("run spec: map estimation requires alpha >= 1 and eta >= 1");
      }
      break;
  }
}

RunResult run_training(const RunSpec& spec) {
  validate_run_spec(spec);
  fs::create_directories(spec.out_dir);

  UciParseResult parsed = load_uci_bow(spec.docword_path, spec.vocab_path);
  Corpus corpus = std::move(parsed.corpus);
  logging::info("loaded corpus: D=" + std::to_string(corpus.n_docs()) +
                " W=" + std::to_string(corpus.n_words()) +
                " C=" + std::to_string(corpus.total_tokens));

  std::optional<HoldoutSplit> split;
  const Corpus* train_corpus = &corpus;
  const std::vector<Document>* test_docs = nullptr;
  if (spec.n_test > 0) {
    split = holdout_split(corpus, spec.n_test, mix_seed(spec.seed, kHoldoutSalt));
    train_corpus = &split->train;
    test_docs = &split->test.docs;
  }

  const std::string label = algorithm_name(spec.algorithm);
  RunResult result;
  result.metrics_path = (fs::path(spec.out_dir) / (label + ".metrics.jsonl")).string();
  result.snapshot_path = (fs::path(spec.out_dir) / (label + ".snapshot.bin")).string();
  const std::string bound_path =
      spec.algorithm == Algorithm::kMapEm
          ? (fs::path(spec.out_dir) / (label + ".bound.csv")).string()
          : std::string{};

  MetricsWriter writer(result.metrics_path);
  TrainOutcome outcome = train_one(spec, *train_corpus, test_docs, &writer, bound_path);
  writer.flush();

  save_snapshot(result.snapshot_path, outcome.stats, outcome.stored_hyper);
  write_snapshot_sidecar(result.snapshot_path, spec_to_json(spec).dump(2));

  result.checkpoints = std::move(outcome.checkpoints);
  result.evaluated = outcome.evaluated;
  result.final_eval = outcome.final_eval;

  if (outcome.evaluated) {
    nlohmann::json report;
    report["algorithm"] = label;
    report["wall_clock_s"] =
        result.checkpoints.empty() ? 0.0 : result.checkpoints.back().wall_clock_s;
    report["docs_trained"] =
        result.checkpoints.empty() ? 0 : result.checkpoints.back().docs_seen;
    report["heldout_ll_per_token"] = result.final_eval.ll_per_token;
    report["skipped_docs"] = result.final_eval.skipped_documents;
    std::ofstream out(fs::path(spec.out_dir) / (label + ".eval.json"));
    out << report.dump(2) << '\n';
  }
  return result;
}

int cmd_train(const RunSpec& spec) {
  return guard_cli("topics-train", [&] {
    const RunResult result = run_training(spec);
    std::cout << "snapshot: " << result.snapshot_path << "\n"
              << "metrics:  " << result.metrics_path << "\n";
    if (result.evaluated) {
      std::cout << "heldout log-likelihood per token: " << result.final_eval.ll_per_token
                << " (skipped " << result.final_eval.skipped_documents << " short docs)\n";
    }
    return 0;
  });
}

std::vector<BenchRow> run_bench(std::vector<RunSpec> runs, int repeats,
                                const std::string& out_dir) {
  if (runs.size() < 2) throw ConfigError("bench needs at least two runs to compare");
  if (repeats < 1) throw ConfigError("bench repeats must be >= 1");
  for (const auto& spec : runs) validate_run_spec(spec);
  for (const auto& spec : runs) {
    if (spec.docword_path != runs.front().docword_path ||
        spec.vocab_path != runs.front().vocab_path || spec.n_test != runs.front().n_test ||
        spec.seed != runs.front().seed) {
      throw ConfigError("bench runs must share corpus paths, n-test, and seed");
    }
  }
  if (!out_dir.empty()) fs::create_directories(out_dir);

  UciParseResult parsed = load_uci_bow(runs.front().docword_path, runs.front().vocab_path);
  Corpus corpus = std::move(parsed.corpus);
  std::optional<HoldoutSplit> split;
  const Corpus* train_corpus = &corpus;
  const std::vector<Document>* test_docs = nullptr;
  if (runs.front().n_test > 0) {
    split = holdout_split(corpus, runs.front().n_test,
                          mix_seed(runs.front().seed, kHoldoutSalt));
    train_corpus = &split->train;
    test_docs = &split->test.docs;
  }

  std::vector<BenchRow> rows;
  for (const auto& base_spec : runs) {
    const std::string label = run_label(base_spec);
    for (int rep = 0; rep < repeats; ++rep) {
      RunSpec spec = base_spec;
      // Repetition r shifts the training seed; the holdout split stays tied
      // to the shared base seed, and within a repetition every algorithm
      // derives the same evaluation halving from the same spec seed.
      spec.seed = base_spec.seed + static_cast<std::uint64_t>(rep);

      std::unique_ptr<MetricsWriter> writer;
      if (!out_dir.empty()) {
        std::ostringstream name;
        name << label << "-seed" << spec.seed << ".metrics.jsonl";
        writer = std::make_unique<MetricsWriter>((fs::path(out_dir) / name.str()).string());
      }
      TrainOutcome outcome = train_one(spec, *train_corpus, test_docs, writer.get());
      for (const auto& record : outcome.checkpoints) {
        rows.push_back(BenchRow{label, spec.seed, record});
      }
    }
  }

  if (!out_dir.empty()) {
    std::ofstream csv(fs::path(out_dir) / "bench.csv");
    if (!csv) throw IoError("cannot open bench.csv for writing");
    csv << "algorithm,checkpoint_time,heldout_ll,seed,minibatches,docs_seen,tokens_seen\n";
    csv.precision(17);
    for (const auto& row : rows) {
      csv << row.algorithm << ',' << row.record.wall_clock_s << ',';
      if (row.record.heldout_ll_per_token.has_value()) csv << *row.record.heldout_ll_per_token;
      csv << ',' << row.seed << ',' << row.record.minibatches << ',' << row.record.docs_seen
          << ',' << row.record.tokens_seen << '\n';
    }
  }
  return rows;
}

int cmd_bench(const std::vector<RunSpec>& runs, int repeats, const std::string& out_dir) {
  return guard_cli("topics-bench", [&] {
    const std::vector<BenchRow> rows = run_bench(runs, repeats, out_dir);
    // Final checkpoint per (algorithm, seed).
    std::cout << "algorithm        seed        train_s   heldout_ll_per_token\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool last_of_run = i + 1 == rows.size() || rows[i + 1].algorithm != rows[i].algorithm ||
                               rows[i + 1].seed != rows[i].seed;
      if (!last_of_run) continue;
      const auto& row = rows[i];
      std::cout << row.algorithm << "\t" << row.seed << "\t" << row.record.wall_clock_s << "\t";
      if (row.record.heldout_ll_per_token.has_value()) {
        std::cout << *row.record.heldout_ll_per_token;
      } else {
        std::cout << "-";
      }
      std::cout << "\n";
    }
    if (!out_dir.empty()) std::cout << "csv: " << (fs::path(out_dir) / "bench.csv").string() << "\n";
    return 0;
  });
}

std::vector<std::vector<std::string>> snapshot_top_words(const std::string& snapshot_path,
                                                         const std::string& vocab_path, int n) {
  const Snapshot snapshot = load_snapshot(snapshot_path);
  std::ifstream in(vocab_path);
  if (!in) throw IoError("cannot open " + vocab_path + " for reading");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    words.push_back(line);
  }
  if (static_cast<Eigen::Index>(words.size()) != snapshot.stats.n_words()) {
    throw ConfigError("vocabulary has " + std::to_string(words.size()) +
                      " words but snapshot has W = " + std::to_string(snapshot.stats.n_words()));
  }
  const Vocabulary vocab(std::move(words));
  const Eigen::MatrixXd phi =
      recover_topics(snapshot.stats, snapshot.hyper, RecoveryMode::kVariationalMean);
  return top_words(phi, n, vocab);
}

int cmd_topics(const std::string& snapshot_path, const std::string& vocab_path, int n) {
  return guard_cli("topics-topwords", [&] {
    const auto lists = snapshot_top_words(snapshot_path, vocab_path, n);
    for (std::size_t k = 0; k < lists.size(); ++k) {
      std::cout << "topic " << k << ":";
      for (const auto& word : lists[k]) std::cout << ' ' << word;
      std::cout << "\n";
    }
    return 0;
  });
}

int cmd_synth(const SynthSpec& spec, const std::string& docword_path,
              const std::string& vocab_path, const std::string& truth_path) {
  return guard_cli("topics-synth", [&] {
    const SyntheticCorpus synth = synth_corpus(spec.n_topics, spec.n_words, spec.n_docs,
                                               spec.mean_len, spec.alpha, spec.eta, spec.seed);
    save_uci_bow(synth.corpus, docword_path, vocab_path);
    std::ofstream truth(truth_path);
    if (!truth) throw IoError("cannot open " + truth_path + " for writing");
    write_topic_rows(synth.true_phi, truth);
    if (!truth) throw IoError("failed writing " + truth_path);
    std::cout << "wrote " << docword_path << " (D=" << synth.corpus.n_docs()
              << ", W=" << synth.corpus.n_words() << ", C=" << synth.corpus.total_tokens
              << "), " << vocab_path << ", " << truth_path << "\n";
    return 0;
  });
}

}  // namespace topics
