#pragma once

// Corpus summaries and static SVG factor maps.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "chronolex/corpus.hpp"

namespace chronolex {

struct CorpusSummary {
  std::size_t documents = 0;
  std::map<int, std::size_t> documents_per_year;
  std::vector<std::pair<std::string, std::size_t>> documents_per_journal;  // count desc, then name
  std::int64_t token_total = 0;
  double mean_tokens = 0.0;
  std::size_t distinct_words = 0;   // after stopword removal, before frequency filtering
  std::size_t vocabulary_size = 0;  // after frequency filtering
  std::vector<std::string> empty_documents;  // no token left after stopword removal
};

CorpusSummary summarize(const Corpus& corpus, const Vocabulary& vocab);

/// summary.csv (key,value), summary_years.csv and summary_journals.csv in `dir`.
void write_summary_csv(const CorpusSummary& summary, const std::filesystem::path& dir);

enum class PlotKind { scatter, trajectory, bar };
enum class LabelPolicy { all, top_n, none };

struct PlotPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  std::string tag;      // class tag, mapped to a colour
  double weight = 0.0;  // ranking key for LabelPolicy::top_n (e.g. contribution)
};

struct PlotSpec {
  PlotKind kind = PlotKind::scatter;
  std::string title;
  std::vector<PlotPoint> points;  // trajectory: drawn in the given order
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 600;
  LabelPolicy label_policy = LabelPolicy::all;
  std::size_t top_n = 40;
};

/// "Axis 1 (12.34%)"
std::string axis_label(int axis, double percent_inertia);

/// Standalone SVG 1.1 document. Deterministic for a given spec. Throws
/// DataError on an empty point set or a non-finite coordinate.
std::string render_svg(const PlotSpec& spec);
void render_svg(const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace chronolex
