#include <string>
#include <vector>

#include "cli_common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Train several algorithms against one shared corpus and holdout split"};
  topics::RunSpec base;
  std::vector<std::string> algos;
  int repeats = 1;
  app.add_option("--algo", algos,
                 "algorithm to include (repeatable): scvb0 | svb | cvb0 | map")
      ->required()
      ->check(CLI::IsMember({"scvb0", "svb", "cvb0", "map"}));
  app.add_option("--repeats", repeats, "seeded repetitions per run (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);
  topics::cli::add_run_options(app, base);

  const int rc = topics::cli::parse_or_exit(app, argc, argv);
  if (rc != 0) return rc < 0 ? 0 : rc;

  std::vector<topics::RunSpec> runs;
  runs.reserve(algos.size());
  for (const auto& name : algos) {
    topics::RunSpec spec = base;
    spec.algorithm = *topics::parse_algorithm(name);
    runs.push_back(spec);
  }
  return topics::cmd_bench(runs, repeats, base.out_dir);
}
