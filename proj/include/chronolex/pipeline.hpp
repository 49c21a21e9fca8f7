#pragma once

// Staged command-line pipeline. Every stage reads its inputs from the output
// directory, writes CSV/SVG artifacts plus a `<stage>.manifest` recording
// parameters and FNV-1a hashes of inputs and outputs, and refuses to run when
// an upstream artifact is missing or no longer matches its manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "chronolex/corpus.hpp"

namespace chronolex {

enum class Stage { ingest, ca, mfact, permtest, periods, characterize, pioneers, report, all };

Stage parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

struct ProjectConfig {
  std::filesystem::path corpus;
  CorpusFormat format = CorpusFormat::json_lines;
  char delimiter = ',';
  std::optional<std::filesystem::path> stopwords;  // built-in list when unset
  int min_doc_count = 5;
  int min_total_count = 10;
  FilterRule filter_rule = FilterRule::require_both;
  bool lowercase = true;
  bool drop_numeric = false;
  int min_year = 1900;
  int max_year = 2100;
  int axes = 5;
  int periods = 3;
  int replications = 999;
  std::uint64_t seed = 20240601;
  double alpha = 0.05;
  bool benjamini_hochberg = false;
  double pioneer_sd = 1.0;
  int threads = 1;
  std::size_t label_top_n = 40;
  std::filesystem::path out = "chronolex_out";

  /// Throws ConfigError when a setting needed by `stage` is invalid.
  void validate(Stage stage) const;
};

/// Applies one `key = value` setting; throws ConfigError for unknown keys or bad values.
void apply_setting(ProjectConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

/// Reads a key = value file ('#' comments). Relative paths resolve against the file's directory.
ProjectConfig load_config(const std::filesystem::path& path);

/// Help text listing every setting with its default.
std::string config_reference();

/// Runs one stage (or the whole chain for Stage::all). Throws ConfigError,
/// DataError or AnalysisError; messages name the failing stage.
void run_stage(Stage stage, const ProjectConfig& config, std::ostream& log);

/// run_stage with errors mapped to exit codes: 0 ok, 2 config, 3 data, 4 analysis.
int run_command(Stage stage, const ProjectConfig& config, std::ostream& log, std::ostream& err);

std::uint64_t fnv1a_file(const std::filesystem::path& path);

}  // namespace chronolex
