// Writes a seeded synthetic corpus with drifting vocabulary as JSON lines.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "chronolex/synthetic.hpp"

int main(int argc, char** argv) {
  chronolex::DriftCorpusOptions opt;
  std::string out_path = "-";
  bool no_plant = false;

  CLI::App app{"Generate a synthetic corpus whose vocabulary drifts through time."};
  app.add_option("-o,--out", out_path, "output file ('-' for stdout)")->capture_default_str();
  app.add_option("--documents", opt.documents)->capture_default_str();
  app.add_option("--first-year", opt.first_year)->capture_default_str();
  app.add_option("--years", opt.years)->capture_default_str();
  app.add_option("--drift-words", opt.drift_words)->capture_default_str();
  app.add_option("--background-words", opt.background_words)->capture_default_str();
  app.add_option("--drift-width", opt.drift_width, "Gaussian usage width in years")->capture_default_str();
  app.add_option("--seed", opt.seed)->capture_default_str();
  app.add_flag("--no-early-adopter", no_plant, "do not plant the early-adopter document");
  CLI11_PARSE(app, argc, argv);
  opt.plant_early_adopter = !no_plant;

  const auto docs = chronolex::make_drift_corpus(opt);
  if (out_path == "-") {
    chronolex::write_json_lines(docs, std::cout);
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << out_path << '\n';
    return 1;
  }
  chronolex::write_json_lines(docs, out);
  return 0;
}
