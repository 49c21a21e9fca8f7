#pragma once

// Seeded synthetic corpora with a known chronological structure.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "chronolex/corpus.hpp"

namespace chronolex {

inline constexpr const char* kEarlyAdopterId = "EARLY-ADOPTER";

/// Word usage drifts through time: drift word w peaks at year position
/// w * (years - 1) / (drift_words - 1), with Gaussian usage of width
/// drift_width (in years). Background words and stopwords are uniform.
struct DriftCorpusOptions {
  int documents = 300;
  int first_year = 2001;
  int years = 10;
  int drift_words = 60;
  int background_words = 20;
  int min_tokens = 60;
  int max_tokens = 100;
  double drift_width = 1.5;
  double background_share = 0.3;
  double stopword_share = 0.1;
  std::uint64_t seed = 20240601;
  /// One document dated at year index early_year written with the
  /// vocabulary of year index early_vocabulary.
  bool plant_early_adopter = true;
  int early_year = 1;
  int early_vocabulary = 8;
};

std::vector<Document> make_drift_corpus(const DriftCorpusOptions& options = {});

void write_json_lines(const std::vector<Document>& documents, std::ostream& out);

}  // namespace chronolex
