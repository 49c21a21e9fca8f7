#include <doctest.h>

#include <boost/math/distributions/hypergeometric.hpp>

#include "chronolex/chrono.hpp"
#include "chronolex/error.hpp"
#include "chronolex/mfact.hpp"
#include "oracles.hpp"

using namespace chronolex;

namespace {

double boost_tail(std::int64_t N, std::int64_t n, std::int64_t K, std::int64_t x, Tail t) {
  boost::math::hypergeometric_distribution<double> d{unsigned(K), unsigned(n), unsigned(N)};
  if (t == Tail::under) return boost::math::cdf(d, unsigned(x));
  if (x <= std::max<std::int64_t>(0, n - (N - K))) return 1.0;
  return boost::math::cdf(boost::math::complement(d, unsigned(x - 1)));
}

AggregatedTable periods_table(const std::vector<std::vector<std::int64_t>>& counts_by_word,
                              const std::vector<std::string>& words) {
  const std::size_t P = counts_by_word.front().size();
  Eigen::MatrixXd dense(Eigen::Index(P), Eigen::Index(words.size()));
  for (std::size_t w = 0; w < words.size(); ++w)
    for (std::size_t p = 0; p < P; ++p) dense(Eigen::Index(p), Eigen::Index(w)) = double(counts_by_word[w][p]);
  std::vector<std::string> labels;
  for (std::size_t p = 0; p < P; ++p) labels.push_back("P" + std::to_string(p + 1));
  AggregatedTable agg;
  agg.table = LexicalTable::from_dense(labels, words, dense);
  agg.ordered = true;
  for (std::size_t p = 0; p < P; ++p) agg.sort_keys.push_back(int(p));
  return agg;
}

}  // namespace

TEST_CASE("worked hypergeometric case") {
  const double p = hypergeometric_p({20, 8, 5, 4, Tail::over});
  CHECK(p == doctest::Approx(7280.0 / 125970.0).epsilon(1e-14));
  const auto exact = oracle::hypergeometric_tail(20, 8, 5, 4, true);
  CHECK(exact.num == 7280);
  CHECK(exact.den == 125970);
}

TEST_CASE("degenerate and boundary tails") {
  CHECK(hypergeometric_p({50, 50, 7, 7, Tail::over}) == 1.0);
  CHECK(hypergeometric_p({30, 10, 6, 0, Tail::over}) == 1.0);
  const double h0 = hypergeometric_pmf(30, 10, 6, 0);
  CHECK(h0 > 0.0);
  CHECK(hypergeometric_p({30, 10, 6, 0, Tail::under}) == doctest::Approx(h0).epsilon(1e-14));
  CHECK_THROWS_AS(hypergeometric_p({10, 5, 3, 4, Tail::over}), AnalysisError);
  CHECK_THROWS_AS(hypergeometric_p({10, 11, 3, 1, Tail::over}), AnalysisError);
  CHECK_THROWS_AS(hypergeometric_p({10, 8, 9, 2, Tail::over}), AnalysisError);  // x below n - (N - K)
}

TEST_CASE("small counts against exact rationals") {
  double worst = 0.0;
  for (int N = 1; N <= 30; ++N)
    for (int K = 0; K <= std::min(N, 10); ++K)
      for (int n = 0; n <= N; ++n)
        for (int x = std::max(0, n - (N - K)); x <= std::min(n, K); ++x) {
          const double over = hypergeometric_p({N, n, K, x, Tail::over});
          const double under = hypergeometric_p({N, n, K, x, Tail::under});
          worst = std::max(worst, std::abs(over - oracle::hypergeometric_tail(N, n, K, x, true).value()));
          worst = std::max(worst, std::abs(under - oracle::hypergeometric_tail(N, n, K, x, false).value()));
          // Tails overlap at the observed value.
          CHECK(over + under == doctest::Approx(1.0 + hypergeometric_pmf(N, n, K, x)).epsilon(1e-12));
        }
  CHECK(worst < 1e-12);
}

TEST_CASE("large counts against Boost.Math") {
  const std::int64_t cases[][4] = {{118094, 6000, 55, 12}, {118094, 6000, 55, 0}, {20000, 7000, 300, 140},
                                   {20000, 7000, 300, 60},  {5000, 2500, 40, 39},  {100000, 30000, 1000, 200}};
  for (const auto& c : cases) {
    for (Tail t : {Tail::over, Tail::under}) {
      const double ours = hypergeometric_p({c[0], c[1], c[2], c[3], t});
      const double ref = boost_tail(c[0], c[1], c[2], c[3], t);
      CHECK(ours == doctest::Approx(ref).epsilon(1e-9));
    }
  }
  // Far tail stays positive.
  const double tiny = hypergeometric_p({118094, 3000, 500, 400, Tail::over});
  CHECK(tiny > 0.0);
  CHECK(tiny < 1e-200);
}

TEST_CASE("swapping the part with the rest flips direction") {
  // Word share in part A exceeds the corpus share; in the complement it falls short.
  const std::int64_t N = 400, nA = 100, K = 40, xA = 20;
  const double over_A = hypergeometric_p({N, nA, K, xA, Tail::over});
  const double under_rest = hypergeometric_p({N, N - nA, K, K - xA, Tail::under});
  CHECK(over_A == doctest::Approx(under_rest).epsilon(1e-12));
}

TEST_CASE("identity partition of a single row gives p = 1") {
  AggregatedTable agg;
  agg.table = LexicalTable::from_dense({"all"}, {"a", "b", "c"}, (Eigen::MatrixXd(1, 3) << 4, 1, 9).finished());
  const auto recs = characteristic_words(agg, {1.0, false});
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) CHECK(r.p_value == 1.0);
}

TEST_CASE("characteristic words") {
  // Three equal periods; w planted 30x in period 2 and 2x elsewhere; one
  // word only in period 1; one word exactly proportional.
  const auto agg = periods_table({{2, 30, 2}, {12, 0, 0}, {10, 10, 10}, {476, 460, 488}},
                                 {"w", "only1", "flat", "filler"});
  const auto recs = characteristic_words(agg);
  auto find = [&](const std::string& word, const std::string& part) {
    return std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.word == word && r.part == part; });
  };
  REQUIRE(find("w", "P2") != recs.end());
  CHECK(find("w", "P2")->direction == Tail::over);
  CHECK(find("w", "P2")->p_value == doctest::Approx(boost_tail(1500, 500, 34, 30, Tail::over)).epsilon(1e-9));
  CHECK(find("only1", "P1") != recs.end());
  for (const auto& r : recs) CHECK(r.word != "flat");
  // p ascending within a part.
  for (std::size_t i = 1; i < recs.size(); ++i)
    if (recs[i].part == recs[i - 1].part) CHECK(recs[i - 1].p_value <= recs[i].p_value);
}

TEST_CASE("direction follows the profile comparison") {
  const auto agg = periods_table({{5, 1}, {1, 5}, {6, 6}}, {"a", "b", "c"});
  const auto recs = characteristic_words(agg, {1.0, false});
  for (const auto& r : recs) {
    const auto part = r.part == "P1" ? 0u : 1u;
    const double share_part = double(r.observed) / double(agg.table.row_margins()[part]);
    const auto col = std::find(agg.table.col_words().begin(), agg.table.col_words().end(), r.word) -
                     agg.table.col_words().begin();
    const double share_all = double(agg.table.col_margins()[std::size_t(col)]) / double(agg.table.grand_total());
    CHECK((r.direction == Tail::over) == (share_part > share_all));
  }
}

TEST_CASE("Benjamini-Hochberg") {
  const auto adj = benjamini_hochberg({0.01, 0.04, 0.03, 0.20});
  CHECK(adj[0] == doctest::Approx(0.04));
  CHECK(adj[1] == doctest::Approx(0.0533333).epsilon(1e-4));
  CHECK(adj[2] == doctest::Approx(0.0533333).epsilon(1e-4));
  CHECK(adj[3] == doctest::Approx(0.20));
}

TEST_CASE("increments") {
  const auto agg = periods_table({{0, 2, 55}, {0, 0, 30}, {10, 10, 10}, {990, 988, 905}},
                                 {"belimumab", "fresh", "steady", "filler"});
  const auto recs = characteristic_increments(agg);
  auto flagged = [&](const std::string& w, std::size_t t) {
    return std::any_of(recs.begin(), recs.end(), [&](const auto& r) { return r.word == w && r.period_index == t; });
  };
  CHECK(flagged("belimumab", 2));
  CHECK(flagged("fresh", 2));
  for (const auto& r : recs) CHECK(r.word != "steady");
  for (const auto& r : recs) {
    CHECK(r.baseline_total == std::accumulate(agg.table.row_margins().begin(),
                                              agg.table.row_margins().begin() + long(r.period_index) + 1,
                                              std::int64_t{0}));
    CHECK(r.p_value == doctest::Approx(boost_tail(r.baseline_total, r.period_total, r.baseline_count, r.observed,
                                                  Tail::over))
                           .epsilon(1e-9));
  }
  AggregatedTable unordered = agg;
  unordered.ordered = false;
  CHECK_THROWS_AS(characteristic_increments(unordered), AnalysisError);
}

TEST_CASE("chronological characteristic words") {
  // Four equal periods.
  const auto agg = periods_table({{0, 40, 0, 0}, {2, 25, 25, 2}, {10, 10, 10, 10}, {988, 925, 965, 988}},
                                 {"single", "middle", "flat", "filler"});
  const auto recs = chronological_characteristic_words(agg);
  auto find = [&](const std::string& w) {
    return std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.word == w; });
  };
  REQUIRE(find("single") != recs.end());
  CHECK(find("single")->first_period == 1);
  CHECK(find("single")->level == 1);
  REQUIRE(find("middle") != recs.end());
  CHECK(find("middle")->first_period == 1);
  CHECK(find("middle")->last_period == 2);
  CHECK(find("middle")->span_label == "P2..P3");
  CHECK(find("flat") == recs.end());

  // The span p-value never exceeds the best singleton.
  for (const auto& r : recs) {
    const auto col = std::size_t(std::find(agg.table.col_words().begin(), agg.table.col_words().end(), r.word) -
                                 agg.table.col_words().begin());
    double best_single = 1.0;
    for (std::size_t p = 0; p < 4; ++p) {
      best_single = std::min(best_single, hypergeometric_p({agg.table.grand_total(), agg.table.row_margins()[p],
                                                            agg.table.col_margins()[col],
                                                            agg.table.at(p, col), Tail::over}));
    }
    CHECK(r.p_value <= best_single);
    if (r.level > 1) CHECK(r.p_value < best_single);
    CHECK(r.p_value < 0.05);
  }
}

TEST_CASE("segmentation") {
  auto trajectory = [](std::vector<double> coords) {
    YearTrajectory t;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      t.points.push_back({2001 + int(i), (Eigen::VectorXd(1) << coords[i]).finished(), 1});
      if (i) t.gaps.push_back(std::abs(coords[i] - coords[i - 1]));
    }
    return t;
  };
  SUBCASE("dominant gap") {
    const auto p = segment_periods(trajectory({0, 1, 2, 10, 11, 12}), 2);
    REQUIRE(p.years.size() == 2);
    CHECK(p.years[0] == std::vector<int>{2001, 2002, 2003});
    CHECK(p.labels[1] == "2004-2006");
  }
  SUBCASE("ties go to the earliest gap") {
    const auto p = segment_periods(trajectory({0, 1, 2, 3, 4}), 2);
    CHECK(p.years[0] == std::vector<int>{2001});
    CHECK(p.labels[0] == "2001");
  }
  SUBCASE("too many periods") { CHECK_THROWS(segment_periods(trajectory({0, 1, 2}), 4)); }
  SUBCASE("partition of documents") {
    const auto p = segment_periods(trajectory({0, 1, 2, 10, 11, 12}), 2);
    const auto part = period_partition(p, {"a", "b", "c"}, {2001, 2005, 2003});
    REQUIRE(part.groups.size() == 2);
    CHECK(part.ordered);
    CHECK(part.groups[0].members == std::vector<std::string>{"a", "c"});
    CHECK(part.groups[1].members == std::vector<std::string>{"b"});
  }
}

TEST_CASE("pioneer scores") {
  MfactResult res;
  res.row_ids = {"a", "b", "c", "d", "e"};
  res.row_weights = Eigen::VectorXd::Constant(5, 0.2);
  res.global_eigenvalues = Eigen::VectorXd::Ones(1);
  res.vocabulary_group = 0;
  res.chronology_group = 1;
  res.partial_row_coords = {(Eigen::MatrixXd(5, 1) << -1.0, -1.0, 2.0, 0.5, 0.0).finished(),
                            (Eigen::MatrixXd(5, 1) << -1.0, -0.9, -1.0, 0.6, 0.0).finished()};
  res.axis_year_correlation = Eigen::VectorXd::Ones(1);
  const std::vector<int> years{2001, 2001, 2001, 2002, 2002};
  const auto rep = pioneer_scores(res, years);
  REQUIRE(rep.scores.size() == 5);
  CHECK(rep.scores[0].id == "c");
  CHECK(rep.scores[0].gap == doctest::Approx(3.0));
  CHECK(rep.scores[0].pioneer);
  const auto a = std::find_if(rep.scores.begin(), rep.scores.end(), [](const auto& s) { return s.id == "a"; });
  CHECK(a->gap == 0.0);
  CHECK_FALSE(a->pioneer);
  for (std::size_t i = 1; i < rep.scores.size(); ++i) CHECK(rep.scores[i - 1].gap >= rep.scores[i].gap);
  PioneerOptions recent_only;
  recent_only.recent_years = 1;
  const auto last = pioneer_scores(res, years, recent_only);
  REQUIRE(last.recent.size() == 2);
  CHECK(last.recent.front().id == "d");

  // A negatively oriented axis is flipped first.
  res.axis_year_correlation(0) = -0.5;
  const auto flipped = pioneer_scores(res, years);
  CHECK(flipped.scores.front().id != "c");
  CHECK(std::find_if(flipped.scores.begin(), flipped.scores.end(), [](const auto& s) { return s.id == "c"; })->gap ==
        doctest::Approx(-3.0));
}
