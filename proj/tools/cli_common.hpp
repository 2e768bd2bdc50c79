#pragma once

#include <CLI11.hpp>

#include "topics/harness.hpp"

namespace topics::cli {

/// Shared training/evaluation flags. Flags that only matter for some
/// algorithms are accepted everywhere and validated by the run spec.
inline void add_run_options(CLI::App& app, RunSpec& spec) {
  app.add_option("--docword", spec.docword_path, "UCI bag-of-words docword file")->required();
  app.add_option("--vocab", spec.vocab_path, "vocabulary file, one word per line")->required();
  app.add_option("--k", spec.n_topics, "number of topics")->check(CLI::PositiveNumber);
  app.add_option("--alpha", spec.alpha, "document-topic prior");
  app.add_option("--eta", spec.eta, "word-topic prior (symmetric)");
  app.add_option("--minibatch", spec.minibatch_docs, "documents per minibatch");
  app.add_option("--burn-in", spec.burn_in_passes,
                 "document passes before accumulation (local sweeps for svb)");
  app.add_option("--offset", spec.svb_offset, "hyperparameter offset (svb only)");
  app.add_option("--s-phi", spec.phi_schedule.s, "topic schedule scale");
  app.add_option("--tau-phi", spec.phi_schedule.tau, "topic schedule offset");
  app.add_option("--kappa-phi", spec.phi_schedule.kappa, "topic schedule decay");
  app.add_option("--s-theta", spec.theta_schedule.s, "document schedule scale");
  app.add_option("--tau-theta", spec.theta_schedule.tau, "document schedule offset");
  app.add_option("--kappa-theta", spec.theta_schedule.kappa, "document schedule decay");
  app.add_option("--epochs", spec.epochs, "full passes over the training documents");
  app.add_option("--train-seconds", spec.max_train_seconds,
                 "stop after this much training time (0 = epochs only)");
  app.add_option("--n-test", spec.n_test, "documents held out for evaluation");
  app.add_option("--checkpoint-seconds", spec.checkpoint_seconds,
                 "evaluate every N training seconds");
  app.add_option("--checkpoint-minibatches", spec.checkpoint_minibatches,
                 "evaluate every N minibatches (epochs for batch algorithms)");
  app.add_option("--seed", spec.seed, "master seed");
  app.add_option("--out", spec.out_dir, "output directory");
  app.add_option("--eval-passes", spec.eval_local_passes, "evaluation inference pass cap");
  app.add_option("--eval-tol", spec.eval_local_tol, "evaluation inference tolerance");
}

/// 0 on success/help, 2 on usage errors, matching the library's convention.
inline int parse_or_exit(CLI::App& app, int argc, char** argv) {
  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return -1;  // caller returns 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
}

}  // namespace topics::cli
