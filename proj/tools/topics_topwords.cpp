#include <string>

#include "cli_common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Print the most probable words of each topic in a snapshot"};
  std::string snapshot;
  std::string vocab;
  int n = 10;
  app.add_option("--snapshot", snapshot, "model snapshot path")->required();
  app.add_option("--vocab", vocab, "vocabulary file")->required();
  app.add_option("--n", n, "words per topic")->check(CLI::PositiveNumber);

  const int rc = topics::cli::parse_or_exit(app, argc, argv);
  if (rc != 0) return rc < 0 ? 0 : rc;

  return topics::cmd_topics(snapshot, vocab, n);
}
