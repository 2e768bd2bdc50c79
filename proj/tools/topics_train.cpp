#include <string>

#include "cli_common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Train a topic model and evaluate it against a held-out split"};
  topics::RunSpec spec;
  std::string algo = "scvb0";
  app.add_option("--algo", algo, "algorithm: scvb0 | svb | cvb0 | map")
      ->check(CLI::IsMember({"scvb0", "svb", "cvb0", "map"}));
  topics::cli::add_run_options(app, spec);

  const int rc = topics::cli::parse_or_exit(app, argc, argv);
  if (rc != 0) return rc < 0 ? 0 : rc;

  spec.algorithm = *topics::parse_algorithm(algo);
  return topics::cmd_train(spec);
}
