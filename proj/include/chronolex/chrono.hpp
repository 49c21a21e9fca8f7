#pragma once

// Lexical characterization of corpus parts with the exact hypergeometric
// test, period segmentation of the year trajectory, and pioneer documents.
//
// Count notation follows the lexical table: for a word and a part,
//   grand_total = n..   all occurrences in the (sub)corpus
//   part_total  = n_.j  occurrences in the part
//   word_total  = n_i.  occurrences of the word in the (sub)corpus
//   observed    = n_ij  occurrences of the word in the part

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chronolex/lextable.hpp"
#include "chronolex/mfact.hpp"

namespace chronolex {

enum class Tail { over, under };

struct HypergeomQuery {
  std::int64_t grand_total = 0;
  std::int64_t part_total = 0;
  std::int64_t word_total = 0;
  std::int64_t observed = 0;
  Tail direction = Tail::over;
};

/// Hypergeometric mass h(x) = C(K, x) C(N - K, n - x) / C(N, n).
double hypergeometric_pmf(std::int64_t grand_total, std::int64_t part_total, std::int64_t word_total, std::int64_t x);

/// Exact tail probability: over = P(X >= observed), under = P(X <= observed).
/// Throws AnalysisError when the counts are inconsistent.
double hypergeometric_p(const HypergeomQuery& query);

struct CharacterizationOptions {
  double alpha = 0.05;
  bool benjamini_hochberg = false;  // filter on BH-adjusted p-values instead of raw ones
};

struct CharacteristicWordRecord {
  std::string word;
  std::string part;
  std::int64_t observed = 0;
  double expected = 0.0;  // n_i. n_.j / n..
  double p_value = 1.0;
  double adjusted_p = 1.0;  // equals p_value unless BH is enabled
  Tail direction = Tail::over;
};

/// Every (word, part) is tested in the direction given by comparing the
/// word's share of the part with its share of the corpus. Records with
/// p <= alpha, grouped by part in table order, p ascending within a part.
std::vector<CharacteristicWordRecord> characteristic_words(const AggregatedTable& agg,
                                                           const CharacterizationOptions& options = {});

struct IncrementRecord {
  std::string word;
  std::string period;
  std::size_t period_index = 0;
  std::int64_t observed = 0;        // count in the period
  std::int64_t period_total = 0;    // n_.j of the period
  std::int64_t baseline_count = 0;  // count in periods 1..t
  std::int64_t baseline_total = 0;  // n.. of periods 1..t
  double expected = 0.0;
  double p_value = 1.0;
  double adjusted_p = 1.0;
};

/// Period t tested for over-representation against the corpus truncated at
/// the end of t (periods 1..t). Requires agg.ordered.
std::vector<IncrementRecord> characteristic_increments(const AggregatedTable& agg,
                                                       const CharacterizationOptions& options = {});

struct ChronoAssignment {
  std::string word;
  std::size_t first_period = 0;  // 0-based, inclusive
  std::size_t last_period = 0;
  std::string span_label;
  std::size_t level = 1;  // number of periods in the span
  std::int64_t observed = 0;
  double expected = 0.0;
  double p_value = 1.0;  // minimum over all spans
};

/// Each word is tested for over-representation in every contiguous span of
/// 1..P-1 periods against the whole corpus and assigned to the span with
/// the smallest p-value when it is below alpha (ties: shorter, then earlier).
std::vector<ChronoAssignment> chronological_characteristic_words(const AggregatedTable& agg, double alpha = 0.05);

/// Cuts the trajectory at the K-1 largest axis-1 gaps between consecutive
/// years (ties go to the earlier gap). Groups are labelled "first-last"
/// with the first year as sort key; member lists hold the years.
struct YearPeriods {
  std::vector<std::vector<int>> years;  // per period, ascending
  std::vector<std::string> labels;
};

YearPeriods segment_periods(const YearTrajectory& trajectory, int periods);

/// Document partition from a year segmentation.
Partition period_partition(const YearPeriods& periods, const std::vector<std::string>& row_ids,
                           const std::vector<int>& row_years);

struct PioneerOptions {
  /// Flag when gap > multiplier * weighted SD of gaps in the document's year cohort.
  double cohort_sd_multiplier = 1.0;
  /// Companion list: documents from the last `recent_years` years, ranked by
  /// vocabulary coordinate.
  int recent_years = 2;
  std::size_t recent_count = 10;
};

struct PioneerScore {
  std::string id;
  int year = 0;
  double vocabulary = 0.0;  // axis-1 partial coordinate
  double chronology = 0.0;
  double gap = 0.0;         // vocabulary - chronology
  double threshold = 0.0;
  bool pioneer = false;
};

struct PioneerReport {
  std::vector<PioneerScore> scores;  // gap descending
  std::vector<PioneerScore> recent;  // vocabulary coordinate descending
};

/// Axis 1 is oriented so its correlation with year is positive.
PioneerReport pioneer_scores(const MfactResult& result, const std::vector<int>& years,
                             const PioneerOptions& options = {});

/// Benjamini-Hochberg adjusted p-values (same order as the input).
std::vector<double> benjamini_hochberg(const std::vector<double>& p);

void write_characteristic_words_csv(const std::vector<CharacteristicWordRecord>& records,
                                    const std::filesystem::path& path);
void write_increments_csv(const std::vector<IncrementRecord>& records, const std::filesystem::path& path);
void write_chronological_csv(const std::vector<ChronoAssignment>& records, const std::filesystem::path& path);
void write_periods_csv(const YearPeriods& periods, const std::filesystem::path& path);
void write_pioneers_csv(const std::vector<PioneerScore>& scores, const std::filesystem::path& path);

}  // namespace chronolex
