#include <doctest.h>

#include <fstream>
#include <sstream>

#include "chronolex/error.hpp"
#include "chronolex/pipeline.hpp"
#include "chronolex/synthetic.hpp"
#include "oracles.hpp"

using namespace chronolex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ProjectConfig small_project(const std::string& name) {
  const auto dir = oracle::scratch_dir(name);
  DriftCorpusOptions opt;
  opt.documents = 120;
  opt.years = 6;
  opt.drift_words = 30;
  opt.background_words = 10;
  std::ofstream out(dir / "corpus.jsonl", std::ios::binary);
  write_json_lines(make_drift_corpus(opt), out);
  out.close();
  ProjectConfig c;
  c.corpus = dir / "corpus.jsonl";
  c.out = dir / "out";
  c.replications = 99;
  c.axes = 3;
  return c;
}

int run(Stage s, const ProjectConfig& c, std::string* err = nullptr) {
  std::ostringstream log, e;
  const int code = run_command(s, c, log, e);
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST_CASE("stages chain and report missing upstream artifacts") {
  const auto c = small_project("chain");
  std::string err;
  CHECK(run(Stage::characterize, c, &err) == 3);
  CHECK(err.find("periods") != std::string::npos);
  CHECK(run(Stage::ca, c, &err) == 3);
  CHECK(err.find("ingest") != std::string::npos);

  REQUIRE(run(Stage::ingest, c) == 0);
  REQUIRE(run(Stage::mfact, c) == 0);
  CHECK(run(Stage::characterize, c, &err) == 3);
  CHECK(err.find("periods") != std::string::npos);
  CHECK(err.find("characterize") != std::string::npos);

  REQUIRE(run(Stage::periods, c) == 0);
  CHECK(run(Stage::characterize, c) == 0);
  CHECK(fs::exists(c.out / "char_words.csv"));
  CHECK(fs::exists(c.out / "char_increments.csv"));
  CHECK(fs::exists(c.out / "char_chrono.csv"));
}

TEST_CASE("stale upstream artifacts are refused") {
  const auto c = small_project("stale");
  REQUIRE(run(Stage::ingest, c) == 0);
  REQUIRE(run(Stage::mfact, c) == 0);
  {
    std::ofstream tamper(c.out / "mfact_trajectory.csv", std::ios::app);
    tamper << "\n";
  }
  std::string err;
  CHECK(run(Stage::periods, c, &err) == 3);
  CHECK(err.find("mfact") != std::string::npos);
}

TEST_CASE("permtest reruns are identical") {
  const auto c = small_project("permtest");
  REQUIRE(run(Stage::ingest, c) == 0);
  REQUIRE(run(Stage::permtest, c) == 0);
  const auto summary = slurp(c.out / "permtest.csv");
  const auto null = slurp(c.out / "permtest_null.csv");
  REQUIRE(run(Stage::permtest, c) == 0);
  CHECK(slurp(c.out / "permtest.csv") == summary);
  CHECK(slurp(c.out / "permtest_null.csv") == null);
  CHECK(summary.find(std::to_string(c.seed)) != std::string::npos);
}

TEST_CASE("all writes the full output set") {
  const auto c = small_project("all");
  REQUIRE(run(Stage::all, c) == 0);
  for (const char* f :
       {"summary.csv", "summary_years.csv", "summary_journals.csv", "documents.csv", "vocabulary.csv", "lextable.csv",
        "ca_eigenvalues.csv", "ca_rows.csv", "ca_cols.csv", "ca_meta.csv", "mfact_eigenvalues.csv", "mfact_rows.csv",
        "mfact_cols.csv", "mfact_groups.csv", "mfact_trajectory.csv", "mfact_categories.csv", "permtest.csv",
        "permtest_null.csv", "periods.csv", "char_words.csv", "char_increments.csv", "char_chrono.csv",
        "pioneers.csv", "pioneers_recent.csv", "years.svg", "journals.svg", "ca_words.svg", "ca_documents.svg",
        "mfact_words.svg", "trajectory.svg", "pioneers.svg", "report.manifest"}) {
    CHECK_MESSAGE(fs::exists(c.out / f), f);
  }
  const auto manifest = slurp(c.out / "permtest.manifest");
  CHECK(manifest.find("param.seed = 20240601") != std::string::npos);
  CHECK(manifest.find("input lextable.csv ") != std::string::npos);
}

TEST_CASE("config validation maps to exit code 2") {
  auto c = small_project("config");
  c.replications = 50;
  std::string err;
  CHECK(run(Stage::permtest, c, &err) == 2);
  CHECK(err.find("replications") != std::string::npos);
  c.replications = 99;
  c.periods = 1;
  CHECK(run(Stage::periods, c) == 2);
  c.periods = 3;
  c.corpus = "/nonexistent/corpus.jsonl";
  CHECK(run(Stage::ingest, c) == 2);
}

TEST_CASE("config file parsing") {
  const auto dir = oracle::scratch_dir("conf");
  {
    std::ofstream f(dir / "project.conf");
    f << "# example\ncorpus = data/abstracts.tsv\nformat = tsv\nperiods = 4  # comment\nalpha=0.01\n"
         "filter_rule = either\nseed = 42\nout = results\n";
  }
  const auto c = load_config(dir / "project.conf");
  CHECK(c.corpus == dir / "data/abstracts.tsv");
  CHECK(c.format == CorpusFormat::delimited);
  CHECK(c.delimiter == '\t');
  CHECK(c.periods == 4);
  CHECK(c.alpha == 0.01);
  CHECK(c.filter_rule == FilterRule::require_either);
  CHECK(c.seed == 42);
  CHECK(c.out == dir / "results");
  CHECK(c.axes == 5);

  ProjectConfig d;
  CHECK_THROWS_AS(apply_setting(d, "bogus", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(d, "axes", "three"), ConfigError);
  CHECK_THROWS_AS(apply_setting(d, "lowercase", "maybe"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.conf"), ConfigError);
  CHECK(parse_stage("characterize") == Stage::characterize);
  CHECK_THROWS_AS(parse_stage("nope"), ConfigError);
}

TEST_CASE("command-line driver") {
  const auto c = small_project("cli");
  const std::string cli = CHRONOLEX_CLI;
  const auto help = c.out.parent_path() / "help.txt";
  REQUIRE(std::system((cli + " --help > " + help.string()).c_str()) == 0);
  const auto text = slurp(help);
  for (const char* flag : {"--config", "--corpus", "--stopwords", "--axes", "--periods", "--replications", "--seed",
                           "--alpha", "--out"})
    CHECK_MESSAGE(text.find(flag) != std::string::npos, flag);
  CHECK(text.find("999") != std::string::npos);
  CHECK(text.find("20240601") != std::string::npos);

  const std::string base = cli + " --corpus " + c.corpus.string() + " --out " + c.out.string();
  CHECK(WEXITSTATUS(std::system((base + " characterize 2>/dev/null").c_str())) == 3);
  CHECK(WEXITSTATUS(std::system((base + " permtest --replications 10 2>/dev/null").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((base + " frobnicate 2>/dev/null").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((base + " ingest > /dev/null").c_str())) == 0);
}
