#include <string>

#include "cli_common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic bag-of-words corpus with known topics"};
  topics::SynthSpec spec;
  std::string docword = "docword.synth.txt";
  std::string vocab = "vocab.synth.txt";
  std::string truth = "truth.synth.txt";
  app.add_option("--k", spec.n_topics, "number of topics")->check(CLI::PositiveNumber);
  app.add_option("--w", spec.n_words, "vocabulary size")->check(CLI::PositiveNumber);
  app.add_option("--d", spec.n_docs, "number of documents")->check(CLI::PositiveNumber);
  app.add_option("--mean-len", spec.mean_len, "mean document length")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha", spec.alpha, "document-topic concentration");
  app.add_option("--eta", spec.eta, "word-topic concentration");
  app.add_option("--seed", spec.seed, "generator seed");
  app.add_option("--docword", docword, "output docword path");
  app.add_option("--vocab", vocab, "output vocab path");
  app.add_option("--truth", truth, "output true-topic rows path");

  const int rc = topics::cli::parse_or_exit(app, argc, argv);
  if (rc != 0) return rc < 0 ? 0 : rc;

  return topics::cmd_synth(spec, docword, vocab, truth);
}
