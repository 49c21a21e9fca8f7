#include <doctest.h>

#include <random>

#include "chronolex/corpus.hpp"
#include "chronolex/error.hpp"
#include "chronolex/lextable.hpp"
#include "oracles.hpp"

using namespace chronolex;

namespace {

LexicalTable small_table() {
  return LexicalTable::from_dense({"d1", "d2", "d3", "d4"}, {"a", "b", "c"},
                                  (Eigen::MatrixXd(4, 3) << 1, 0, 2, 3, 1, 0, 0, 4, 1, 2, 2, 2).finished());
}

}  // namespace

TEST_CASE("table from two documents") {
  Corpus c;
  c.documents = {{"d1", "", "a a b", "J", 2000}, {"d2", "", "b", "J", 2001}};
  TokenizationRules rules;
  rules.stopwords = {};
  c = tokenize(std::move(c), rules);
  Vocabulary v;
  v.entries = {{"a", 1, 2}, {"b", 2, 2}};
  const auto build = build_lexical_table(c, v);
  const auto& t = build.table;
  CHECK(t.at(0, 0) == 2);
  CHECK(t.at(0, 1) == 1);
  CHECK(t.at(1, 0) == 0);
  CHECK(t.at(1, 1) == 1);
  CHECK(t.row_margins() == std::vector<std::int64_t>{3, 1});
  CHECK(t.col_margins() == std::vector<std::int64_t>{2, 2});
  CHECK(t.grand_total() == 4);
  CHECK(build.excluded.empty());
}

TEST_CASE("zero rows are excluded and reported") {
  Corpus c;
  c.documents = {{"d1", "", "a a", "J", 2000}, {"d2", "", "zzz", "J", 2001}};
  TokenizationRules rules;
  rules.stopwords = {};
  c = tokenize(std::move(c), rules);
  Vocabulary v;
  v.entries = {{"a", 1, 2}};
  const auto build = build_lexical_table(c, v);
  CHECK(build.table.rows() == 1);
  REQUIRE(build.excluded.size() == 1);
  CHECK(build.excluded[0].id == "d2");

  Vocabulary disjoint;
  disjoint.entries = {{"q", 1, 1}};
  CHECK_THROWS_AS(build_lexical_table(c, disjoint), DataError);
}

TEST_CASE("aggregate: identity and additivity") {
  const auto t = small_table();
  const auto id = aggregate(t, identity_partition(t));
  CHECK(id.table.dense() == t.dense());
  CHECK(id.table.row_ids() == t.row_ids());

  Partition halves{"halves", {{"first", {"d1", "d2"}, 1}, {"second", {"d3", "d4"}, 2}}, true};
  const auto agg = aggregate(t, halves);
  const Eigen::MatrixXd d = t.dense();
  CHECK(agg.table.dense().row(0) == d.row(0) + d.row(1));
  CHECK(agg.table.dense().row(1) == d.row(2) + d.row(3));
  CHECK(agg.table.grand_total() == t.grand_total());
  CHECK(agg.table.col_margins() == t.col_margins());
  CHECK(agg.ordered);
}

TEST_CASE("aggregate rejects bad partitions") {
  const auto t = small_table();
  CHECK_THROWS_AS(aggregate(t, Partition{"p", {{"g", {"d1", "d2", "d3", "zz"}, {}}}, false}), DataError);
  CHECK_THROWS_AS(aggregate(t, Partition{"p", {{"g", {"d1", "d2", "d3"}, {}}}, false}), DataError);
  CHECK_THROWS_AS(aggregate(t, Partition{"p", {{"g", {"d1", "d2", "d3", "d4"}, {}}, {"h", {"d1"}, {}}}, false}),
                  DataError);
}

TEST_CASE("aggregating by year then period equals aggregating by period") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd dense = oracle::random_table(rng, 15, 12);
  std::vector<std::string> ids;
  std::vector<int> years;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    ids.push_back("doc" + std::to_string(i));
    years.push_back(2000 + int(rng() % 5));
  }
  std::vector<std::string> words;
  for (Eigen::Index j = 0; j < dense.cols(); ++j) words.push_back("w" + std::to_string(j));
  const auto t = LexicalTable::from_dense(ids, words, dense);

  const auto by_year = aggregate(t, partition_by_key(t, years, "year"));
  // Per-year totals against a direct recount.
  for (std::size_t g = 0; g < by_year.table.rows(); ++g) {
    const int y = std::stoi(by_year.table.row_ids()[g]);
    Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(dense.cols());
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
      if (years[std::size_t(i)] == y) expected += dense.row(i);
    CHECK(by_year.table.dense().row(Eigen::Index(g)) == expected);
  }

  auto period_of = [](int y) { return y < 2002 ? std::string("early") : std::string("late"); };
  std::vector<std::string> doc_periods, year_periods;
  for (int y : years) doc_periods.push_back(period_of(y));
  for (const auto& label : by_year.table.row_ids()) year_periods.push_back(period_of(std::stoi(label)));
  const auto direct = aggregate(t, partition_by_label(t, doc_periods, "period"));
  const auto composed = aggregate(by_year.table, partition_by_label(by_year.table, year_periods, "period"));
  CHECK(direct.table.dense() == composed.table.dense());
  CHECK(direct.table.row_ids() == composed.table.row_ids());
}

TEST_CASE("table csv round trip") {
  const auto dir = oracle::scratch_dir("lextable");
  const auto t = small_table();
  write_table_csv(t, dir / "t.csv");
  const auto back = read_table_csv(dir / "t.csv");
  CHECK(back.dense() == t.dense());
  CHECK(back.row_ids() == t.row_ids());
  CHECK(back.col_words() == t.col_words());
}

TEST_CASE("sparse rows merge duplicates and reject negatives") {
  LexicalTable t({"r"}, {"a", "b"}, {{{1, 2}, {0, 1}, {1, 3}}});
  CHECK(t.at(0, 1) == 5);
  CHECK(t.at(0, 0) == 1);
  CHECK(t.row(0).front().col == 0);
  CHECK_THROWS_AS(LexicalTable({"r"}, {"a"}, {{{0, -1}}}), DataError);
  CHECK_THROWS_AS(LexicalTable({"r"}, {"a"}, {{{4, 1}}}), DataError);
}
