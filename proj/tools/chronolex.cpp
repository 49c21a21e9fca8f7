// chronolex: staged lexical-chronology pipeline.
//
//   chronolex ingest --config project.conf
//   chronolex all --corpus abstracts.jsonl --out results --replications 999

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chronolex/error.hpp"
#include "chronolex/pipeline.hpp"

using namespace chronolex;

int main(int argc, char** argv) {
  const ProjectConfig defaults;
  CLI::App app{"Lexical chronology of a dated text corpus: CA, MFACT, permutation test, periods, "
               "characteristic words, pioneer documents and SVG figures."};
  app.footer("Subcommands run in this order: ingest ca mfact permtest periods characterize pioneers report.\n"
             "'all' runs the whole chain. Command-line flags override the config file.\n"
             "Exit codes: 0 success, 2 configuration error, 3 data error, 4 analysis error.\n\n" +
             config_reference());

  std::string subcommand;
  std::optional<std::string> config_path, corpus, stopwords, out, format;
  std::optional<int> axes, periods, replications, threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;

  app.add_option("subcommand", subcommand,
                 "ingest | ca | mfact | permtest | periods | characterize | pioneers | report | all")
      ->required();
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--corpus", corpus, "corpus file (JSON lines or delimited text)");
  app.add_option("--format", format, "jsonl | delimited | csv | tsv")->default_str("jsonl");
  app.add_option("--stopwords", stopwords, "stopword file, one word per line")->default_str("builtin");
  app.add_option("--axes", axes, "retained factor axes")->default_str(std::to_string(defaults.axes));
  app.add_option("--periods", periods, "number of periods")->default_str(std::to_string(defaults.periods));
  app.add_option("--replications", replications, "permutation test replications")
      ->default_str(std::to_string(defaults.replications));
  app.add_option("--seed", seed, "permutation seed")->default_str(std::to_string(defaults.seed));
  app.add_option("--alpha", alpha, "significance level of the characterization tests")
      ->default_str(fmt::format("{}", defaults.alpha));
  app.add_option("--threads", threads, "permutation test worker threads")
      ->default_str(std::to_string(defaults.threads));
  app.add_option("--out", out, "output directory")->default_str(defaults.out.string());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Stage stage = parse_stage(subcommand);
    ProjectConfig config = config_path ? load_config(*config_path) : ProjectConfig{};
    auto set = [&](const char* key, const std::string& value) { apply_setting(config, key, value); };
    if (corpus) set("corpus", *corpus);
    if (format) set("format", *format);
    if (stopwords) set("stopwords", *stopwords);
    if (axes) set("axes", std::to_string(*axes));
    if (periods) set("periods", std::to_string(*periods));
    if (replications) set("replications", std::to_string(*replications));
    if (seed) set("seed", std::to_string(*seed));
    if (alpha) set("alpha", fmt::format("{}", *alpha));
    if (threads) set("threads", std::to_string(*threads));
    if (out) set("out", *out);
    return run_command(stage, config, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
