#include "chronolex/chrono.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// share in part > share in corpus, compared without division
bool over_represented(std::int64_t observed, std::int64_t part_total, std::int64_t word_total,
                      std::int64_t grand_total) {
  return static_cast<__int128>(observed) * grand_total > static_cast<__int128>(word_total) * part_total;
}

double expected_count(std::int64_t part_total, std::int64_t word_total, std::int64_t grand_total) {
  return grand_total > 0 ? double(word_total) * double(part_total) / double(grand_total) : 0.0;
}

const char* tail_name(Tail t) { return t == Tail::over ? "over" : "under"; }

}  // namespace

std::vector<double> benjamini_hochberg(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t rank = m; rank > 0; --rank) {
    const std::size_t idx = order[rank - 1];
    running = std::min(running, p[idx] * double(m) / double(rank));
    adjusted[idx] = running;
  }
  return adjusted;
}

std::vector<CharacteristicWordRecord> characteristic_words(const AggregatedTable& agg,
                                                           const CharacterizationOptions& options) {
  const LexicalTable& t = agg.table;
  const std::int64_t N = t.grand_total();
  std::vector<CharacteristicWordRecord> all;
  all.reserve(t.rows() * t.cols());
  for (std::size_t part = 0; part < t.rows(); ++part) {
    const std::int64_t n = t.row_margins()[part];
    for (std::size_t w = 0; w < t.cols(); ++w) {
      const std::int64_t K = t.col_margins()[w];
      const std::int64_t x = t.at(part, w);
      CharacteristicWordRecord rec;
      rec.word = t.col_words()[w];
      rec.part = t.row_ids()[part];
      rec.observed = x;
      rec.expected = expected_count(n, K, N);
      rec.direction = over_represented(x, n, K, N) ? Tail::over : Tail::under;
      rec.p_value = hypergeometric_p({N, n, K, x, rec.direction});
      rec.adjusted_p = rec.p_value;
      all.push_back(std::move(rec));
    }
  }
  if (options.benjamini_hochberg) {
    std::vector<double> p;
    for (const auto& r : all) p.push_back(r.p_value);
    const auto adj = benjamini_hochberg(p);
    for (std::size_t k = 0; k < all.size(); ++k) all[k].adjusted_p = adj[k];
  }

  std::vector<CharacteristicWordRecord> kept;
  for (auto& r : all) {
    if (r.adjusted_p <= options.alpha) kept.push_back(std::move(r));
  }
  // Records are already grouped by part in table order.
  auto part_begin = kept.begin();
  while (part_begin != kept.end()) {
    auto part_end = std::find_if(part_begin, kept.end(), [&](const auto& r) { return r.part != part_begin->part; });
    std::stable_sort(part_begin, part_end, [](const auto& a, const auto& b) { return a.p_value < b.p_value; });
    part_begin = part_end;
  }
  return kept;
}

std::vector<IncrementRecord> characteristic_increments(const AggregatedTable& agg,
                                                       const CharacterizationOptions& options) {
  if (!agg.ordered) throw AnalysisError("characteristic increments need an ordered (chronological) partition");
  const LexicalTable& t = agg.table;
  std::vector<IncrementRecord> all;
  std::vector<std::int64_t> cumulative_word(t.cols(), 0);
  std::int64_t cumulative_total = 0;
  for (std::size_t period = 0; period < t.rows(); ++period) {
    const std::int64_t n = t.row_margins()[period];
    cumulative_total += n;
    for (std::size_t w = 0; w < t.cols(); ++w) {
      const std::int64_t x = t.at(period, w);
      cumulative_word[w] += x;
      if (!over_represented(x, n, cumulative_word[w], cumulative_total)) continue;
      IncrementRecord rec;
      rec.word = t.col_words()[w];
      rec.period = t.row_ids()[period];
      rec.period_index = period;
      rec.observed = x;
      rec.period_total = n;
      rec.baseline_count = cumulative_word[w];
      rec.baseline_total = cumulative_total;
      rec.expected = expected_count(n, cumulative_word[w], cumulative_total);
      rec.p_value = hypergeometric_p({cumulative_total, n, cumulative_word[w], x, Tail::over});
      rec.adjusted_p = rec.p_value;
      all.push_back(std::move(rec));
    }
  }
  if (options.benjamini_hochberg) {
    // Under-represented pairs were skipped above; they enter the family with p = 1.
    std::vector<double> p;
    for (const auto& r : all) p.push_back(r.p_value);
    p.resize(t.rows() * t.cols(), 1.0);
    const auto adj = benjamini_hochberg(p);
    for (std::size_t k = 0; k < all.size(); ++k) all[k].adjusted_p = adj[k];
  }
  std::vector<IncrementRecord> kept;
  for (auto& r : all) {
    if (r.adjusted_p <= options.alpha) kept.push_back(std::move(r));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.period_index != b.period_index ? a.period_index < b.period_index : a.p_value < b.p_value;
  });
  return kept;
}

std::vector<ChronoAssignment> chronological_characteristic_words(const AggregatedTable& agg, double alpha) {
  if (!agg.ordered) throw AnalysisError("chronological characteristic words need an ordered partition");
  const LexicalTable& t = agg.table;
  const std::size_t P = t.rows();
  if (P < 2) throw AnalysisError("chronological characteristic words need at least 2 periods");
  const std::int64_t N = t.grand_total();

  std::vector<std::int64_t> margin_prefix(P + 1, 0);
  for (std::size_t p = 0; p < P; ++p) margin_prefix[p + 1] = margin_prefix[p] + t.row_margins()[p];

  std::vector<ChronoAssignment> out;
  std::vector<std::int64_t> word_prefix(P + 1, 0);
  for (std::size_t w = 0; w < t.cols(); ++w) {
    for (std::size_t p = 0; p < P; ++p) word_prefix[p + 1] = word_prefix[p] + t.at(p, w);
    const std::int64_t K = t.col_margins()[w];

    ChronoAssignment best;
    best.p_value = 2.0;
    // The full span equals the corpus and is never tested.
    for (std::size_t len = 1; len < P; ++len) {
      for (std::size_t first = 0; first + len <= P; ++first) {
        const std::size_t last = first + len - 1;
        const std::int64_t x = word_prefix[last + 1] - word_prefix[first];
        const std::int64_t n = margin_prefix[last + 1] - margin_prefix[first];
        const double p = hypergeometric_p({N, n, K, x, Tail::over});
        if (p < best.p_value) {
          best.first_period = first;
          best.last_period = last;
          best.level = len;
          best.observed = x;
          best.expected = expected_count(n, K, N);
          best.p_value = p;
        }
      }
    }
    if (best.p_value < alpha) {
      best.word = t.col_words()[w];
      best.span_label = best.level == 1 ? t.row_ids()[best.first_period]
                                        : t.row_ids()[best.first_period] + ".." + t.row_ids()[best.last_period];
      out.push_back(std::move(best));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first_period != b.first_period) return a.first_period < b.first_period;
    if (a.last_period != b.last_period) return a.last_period < b.last_period;
    return a.p_value < b.p_value;
  });
  return out;
}

YearPeriods segment_periods(const YearTrajectory& trajectory, int periods) {
  if (periods < 2) throw ConfigError("number of periods must be >= 2");
  const std::size_t n = trajectory.points.size();
  if (static_cast<std::size_t>(periods) > n) {
    throw AnalysisError(fmt::format("cannot cut {} years into {} periods", n, periods));
  }
  std::vector<std::size_t> gap_index(trajectory.gaps.size());
  std::iota(gap_index.begin(), gap_index.end(), 0);
  std::stable_sort(gap_index.begin(), gap_index.end(),
                   [&](std::size_t a, std::size_t b) { return trajectory.gaps[a] > trajectory.gaps[b]; });
  std::vector<std::size_t> cuts(gap_index.begin(), gap_index.begin() + (periods - 1));
  std::sort(cuts.begin(), cuts.end());

  YearPeriods out;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {  // points [start, end]
    std::vector<int> years;
    for (std::size_t i = start; i <= end; ++i) years.push_back(trajectory.points[i].year);
    out.labels.push_back(years.size() == 1 ? std::to_string(years.front())
                                           : fmt::format("{}-{}", years.front(), years.back()));
    out.years.push_back(std::move(years));
    start = end + 1;
  };
  for (std::size_t cut : cuts) close(cut);  // gap `cut` lies between points cut and cut+1
  close(n - 1);
  return out;
}

Partition period_partition(const YearPeriods& periods, const std::vector<std::string>& row_ids,
                           const std::vector<int>& row_years) {
  if (row_ids.size() != row_years.size()) throw DataError("one year per row id is required");
  std::map<int, std::size_t> period_of;
  for (std::size_t p = 0; p < periods.years.size(); ++p) {
    for (int y : periods.years[p]) period_of[y] = p;
  }
  Partition part;
  part.name = "periods";
  part.ordered = true;
  for (std::size_t p = 0; p < periods.years.size(); ++p) {
    part.groups.push_back({periods.labels[p], {}, periods.years[p].front()});
  }
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    auto it = period_of.find(row_years[i]);
    if (it == period_of.end()) {
      throw DataError(fmt::format("row '{}' has year {} outside every period", row_ids[i], row_years[i]));
    }
    part.groups[it->second].members.push_back(row_ids[i]);
  }
  return part;
}

PioneerReport pioneer_scores(const MfactResult& result, const std::vector<int>& years, const PioneerOptions& options) {
  if (!result.vocabulary_group || !result.chronology_group) {
    throw AnalysisError("pioneer scores need both vocabulary and chronology partial coordinates");
  }
  if (result.axes() < 1) throw AnalysisError("pioneer scores need at least one axis");
  const Eigen::MatrixXd& voc = result.partial_row_coords[*result.vocabulary_group];
  const Eigen::MatrixXd& chr = result.partial_row_coords[*result.chronology_group];
  if (years.size() != static_cast<std::size_t>(voc.rows())) {
    throw AnalysisError(fmt::format("{} years given for {} analysed rows", years.size(), voc.rows()));
  }
  const double orient =
      (result.axis_year_correlation.size() > 0 && result.axis_year_correlation(0) < 0.0) ? -1.0 : 1.0;

  std::vector<PioneerScore> scores(years.size());
  std::map<int, std::vector<std::size_t>> cohort;
  for (std::size_t i = 0; i < years.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    auto& s = scores[i];
    s.id = result.row_ids[i];
    s.year = years[i];
    s.vocabulary = orient * voc(row, 0);
    s.chronology = orient * chr(row, 0);
    s.gap = s.vocabulary - s.chronology;
    cohort[years[i]].push_back(i);
  }
  for (const auto& [year, members] : cohort) {
    double wsum = 0.0, mean = 0.0;
    for (std::size_t i : members) {
      const double w = result.row_weights(static_cast<Eigen::Index>(i));
      wsum += w;
      mean += w * scores[i].gap;
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i : members) {
      const double d = scores[i].gap - mean;
      var += result.row_weights(static_cast<Eigen::Index>(i)) * d * d;
    }
    const double sd = std::sqrt(var / wsum);
    for (std::size_t i : members) {
      scores[i].threshold = options.cohort_sd_multiplier * sd;
      scores[i].pioneer = scores[i].gap > scores[i].threshold;
    }
  }

  PioneerReport report;
  report.scores = scores;
  std::stable_sort(report.scores.begin(), report.scores.end(), [](const auto& a, const auto& b) {
    return a.gap != b.gap ? a.gap > b.gap : a.id < b.id;
  });

  if (!years.empty() && options.recent_years > 0) {
    const int latest = *std::max_element(years.begin(), years.end());
    for (const auto& s : scores) {
      if (s.year > latest - options.recent_years) report.recent.push_back(s);
    }
    std::stable_sort(report.recent.begin(), report.recent.end(), [](const auto& a, const auto& b) {
      return a.vocabulary != b.vocabulary ? a.vocabulary > b.vocabulary : a.id < b.id;
    });
    if (report.recent.size() > options.recent_count) report.recent.resize(options.recent_count);
  }
  return report;
}

void write_characteristic_words_csv(const std::vector<CharacteristicWordRecord>& records,
                                    const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.row({"word", "part", "observed", "expected", "p_value", "adjusted_p", "direction"});
  for (const auto& r : records) {
    w.field(std::string_view(r.word)).field(std::string_view(r.part)).field(static_cast<long long>(r.observed));
    w.field(r.expected).field(r.p_value).field(r.adjusted_p).field(tail_name(r.direction));
    w.end_row();
  }
}

void write_increments_csv(const std::vector<IncrementRecord>& records, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.row({"word", "period", "observed", "period_total", "baseline_count", "baseline_total", "expected", "p_value",
         "adjusted_p"});
  for (const auto& r : records) {
    w.field(std::string_view(r.word)).field(std::string_view(r.period)).field(static_cast<long long>(r.observed));
    w.field(static_cast<long long>(r.period_total)).field(static_cast<long long>(r.baseline_count));
    w.field(static_cast<long long>(r.baseline_total)).field(r.expected).field(r.p_value).field(r.adjusted_p);
    w.end_row();
  }
}

void write_chronological_csv(const std::vector<ChronoAssignment>& records, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.row({"word", "span", "observed", "expected", "p_value", "level"});
  for (const auto& r : records) {
    w.field(std::string_view(r.word)).field(std::string_view(r.span_label)).field(static_cast<long long>(r.observed));
    w.field(r.expected).field(r.p_value).field(r.level);
    w.end_row();
  }
}

void write_periods_csv(const YearPeriods& periods, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.row({"period", "label", "first_year", "last_year", "years"});
  for (std::size_t p = 0; p < periods.years.size(); ++p) {
    std::string years;
    for (int y : periods.years[p]) years += (years.empty() ? "" : " ") + std::to_string(y);
    w.field(p + 1).field(std::string_view(periods.labels[p])).field(periods.years[p].front());
    w.field(periods.years[p].back()).field(std::string_view(years));
    w.end_row();
  }
}

void write_pioneers_csv(const std::vector<PioneerScore>& scores, const std::filesystem::path& path) {
  auto out = open_output(path);
  CsvWriter w(out);
  w.row({"id", "year", "vocabulary", "chronology", "gap", "threshold", "pioneer"});
  for (const auto& s : scores) {
    w.field(std::string_view(s.id)).field(s.year).field(s.vocabulary).field(s.chronology).field(s.gap);
    w.field(s.threshold).field(s.pioneer ? "1" : "0");
    w.end_row();
  }
}

}  // namespace chronolex
