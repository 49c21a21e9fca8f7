#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "chronolex/corpus.hpp"
#include "chronolex/error.hpp"

using namespace chronolex;

namespace {

Corpus corpus_from_json(const std::string& text, LoadOptions opt = {}) {
  std::istringstream in(text);
  return read_corpus(in, opt);
}

std::string json_record(const std::string& id, int year, const std::string& body) {
  return "{\"id\":\"" + id + "\",\"title\":\"t\",\"abstract\":\"" + body + "\",\"journal\":\"J\",\"year\":" +
         std::to_string(year) + "}\n";
}

Corpus tokenized(const std::vector<std::string>& bodies, const TokenizationRules& rules) {
  Corpus c;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    c.documents.push_back({"d" + std::to_string(i), "", bodies[i], "J", 2000});
  }
  return tokenize(std::move(c), rules);
}

}  // namespace

TEST_CASE("json lines keep file order") {
  const auto c = corpus_from_json(json_record("B", 2001, "x") + json_record("A", 1999, "y") + json_record("C", 2000, "z"));
  REQUIRE(c.documents.size() == 3);
  CHECK(c.documents[0].id == "B");
  CHECK(c.documents[1].id == "A");
  CHECK(c.documents[2].year == 2000);
  CHECK_FALSE(c.tokenized);
}

TEST_CASE("ingestion errors name the record") {
  SUBCASE("duplicate id") {
    try {
      corpus_from_json(json_record("A1", 2000, "x") + json_record("A1", 2001, "y"));
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("A1") != std::string::npos);
      CHECK(std::string(e.what()).find("record 2") != std::string::npos);
    }
  }
  SUBCASE("year out of range") { CHECK_THROWS_AS(corpus_from_json(json_record("A", 1850, "x")), DataError); }
  SUBCASE("blank body") { CHECK_THROWS_AS(corpus_from_json(json_record("A", 2000, "   ")), DataError); }
  SUBCASE("malformed json") {
    CHECK_THROWS_WITH_AS(corpus_from_json(json_record("A", 2000, "x") + "{oops\n"), doctest::Contains("record 2"),
                         DataError);
  }
  SUBCASE("missing field") {
    CHECK_THROWS_AS(corpus_from_json("{\"id\":\"A\",\"title\":\"t\",\"abstract\":\"x\",\"year\":2000}\n"), DataError);
  }
}

TEST_CASE("delimited input with header and quoting") {
  std::istringstream in(
      "ID;Year;Journal;Title;Body\n"
      "a;1994;Lupus;\"One; two\";\"text with \"\"quotes\"\"\"\n"
      "b;1995;Lupus;Other;more text\n");
  LoadOptions opt;
  opt.format = CorpusFormat::delimited;
  opt.delimiter = ';';
  const auto c = read_corpus(in, opt);
  REQUIRE(c.documents.size() == 2);
  CHECK(c.documents[0].title == "One; two");
  CHECK(c.documents[0].body == "text with \"quotes\"");
  CHECK(c.documents[1].year == 1995);

  std::istringstream short_row("id,title,body,journal,year\na,t,b\n");
  opt.delimiter = ',';
  CHECK_THROWS_WITH_AS(read_corpus(short_row, opt), doctest::Contains("line 2"), DataError);
}

TEST_CASE("tokenizer examples") {
  TokenizationRules rules;
  rules.stopwords = {"and"};
  const auto c = tokenized({"SLE and lupus; SLE.", "B-Cell dsDNA"}, rules);
  CHECK(c.tokens[0] == std::vector<std::string>{"sle", "lupus", "sle"});
  CHECK(c.tokens[1] == std::vector<std::string>{"b-cell", "dsdna"});
  CHECK(c.token_total == 5);
}

TEST_CASE("hyphens only inside tokens") {
  CHECK(split_tokens("-anti- anti--dsDNA x-ray 2-3", true) ==
        std::vector<std::string>{"anti", "anti", "dsdna", "x-ray", "2-3"});
  CHECK(split_tokens("IL-6, TNF-alpha", false) == std::vector<std::string>{"IL-6", "TNF-alpha"});
}

TEST_CASE("unicode letters and lowercasing") {
  CHECK(split_tokens("Érythème Sjögren ΑΒΓ", true) == std::vector<std::string>{"érythème", "sjögren", "αβγ"});
  CHECK(to_lower_utf8("ÀÉÎ Ωmega") == "àéî ωmega");
}

TEST_CASE("numeric tokens kept unless dropped") {
  TokenizationRules rules;
  rules.stopwords = {};
  CHECK(tokenized({"dose 10 mg 2a"}, rules).tokens[0] == std::vector<std::string>{"dose", "10", "mg", "2a"});
  rules.drop_numeric = true;
  CHECK(tokenized({"dose 10 mg 2a"}, rules).tokens[0] == std::vector<std::string>{"dose", "mg", "2a"});
}

TEST_CASE("vocabulary thresholds") {
  TokenizationRules rules;
  rules.stopwords = {};
  std::vector<std::string> bodies(10, "common");
  // rare3: 12 occurrences in 3 documents; thin6: 9 occurrences in 6 documents
  for (int d = 0; d < 3; ++d) bodies[d] += " rare3 rare3 rare3 rare3";
  for (int d = 0; d < 6; ++d) bodies[d] += d < 3 ? " thin6 thin6" : " thin6";
  for (auto& b : bodies) b += " common";
  const auto c = tokenized(bodies, rules);
  const auto v = build_vocabulary(c, rules);
  REQUIRE(v.size() == 1);
  CHECK(v.entries[0].word == "common");

  rules.filter_rule = FilterRule::require_either;
  const auto either = build_vocabulary(c, rules);
  CHECK(either.size() == 3);

  rules.min_doc_count = 100;
  rules.min_total_count = 100;
  CHECK_THROWS_AS(build_vocabulary(c, rules), DataError);
}

TEST_CASE("planted word matches an independent recount") {
  std::mt19937_64 rng(7);
  TokenizationRules rules;
  rules.stopwords = {"the"};
  std::vector<std::string> bodies;
  const char* pool[] = {"alpha", "beta", "gamma", "delta", "the", "epsilon"};
  for (int d = 0; d < 50; ++d) {
    std::string body;
    for (int k = 0; k < 30; ++k) body += std::string(pool[rng() % 6]) + " ";
    if (d % 5 == 0) body += "planted planted";
    bodies.push_back(body);
  }
  const auto c = tokenized(bodies, rules);
  const auto v = build_vocabulary(c, rules);

  std::map<std::string, std::pair<int, int>> recount;  // word -> (docs, total)
  for (const auto& body : bodies) {
    std::istringstream in(body);
    std::map<std::string, int> local;
    std::string w;
    while (in >> w) {
      if (w != "the") ++local[w];
    }
    for (const auto& [word, n] : local) {
      recount[word].first += 1;
      recount[word].second += n;
    }
  }
  bool found = false;
  std::int64_t kept_total = 0;
  for (const auto& e : v.entries) {
    CHECK(e.doc_count == recount[e.word].first);
    CHECK(e.total_count == recount[e.word].second);
    kept_total += e.total_count;
    if (e.word == "planted") {
      found = true;
      CHECK(e.doc_count == 10);
      CHECK(e.total_count == 20);
    }
    CHECK(e.word != "the");
  }
  CHECK(found);
  CHECK(kept_total <= c.token_total);
  CHECK(std::is_sorted(v.entries.begin(), v.entries.end(),
                       [](const auto& a, const auto& b) { return a.word < b.word; }));
}

TEST_CASE("filtering is monotone in the thresholds") {
  std::mt19937_64 rng(11);
  std::vector<std::string> bodies;
  for (int d = 0; d < 40; ++d) {
    std::string body;
    for (int k = 0; k < 25; ++k) body += "w" + std::to_string(rng() % 40) + " ";
    bodies.push_back(body);
  }
  TokenizationRules rules;
  rules.stopwords = {};
  const auto c = tokenized(bodies, rules);
  std::size_t previous = SIZE_MAX;
  for (int t = 1; t <= 12; ++t) {
    rules.min_doc_count = t;
    rules.min_total_count = t + 2;
    std::size_t size = 0;
    try {
      size = build_vocabulary(c, rules).size();
    } catch (const DataError&) {
    }
    CHECK(size <= previous);
    previous = size;
  }
}

TEST_CASE("tokenization is deterministic and validates rules") {
  TokenizationRules rules;
  const auto a = tokenized({"The quick brown fox", "Jumps over the lazy dog"}, rules);
  const auto b = tokenized({"The quick brown fox", "Jumps over the lazy dog"}, rules);
  CHECK(a.tokens == b.tokens);
  rules.min_doc_count = 0;
  CHECK_THROWS_AS(tokenized({"x"}, rules), ConfigError);
}

TEST_CASE("built-in stopwords cover the named word classes") {
  const auto s = default_stopwords();
  for (const char* w : {"of", "and", "we", "this", "the", "in", "which"}) CHECK(s.count(w) == 1);
}
