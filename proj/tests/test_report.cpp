#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "chronolex/corpus.hpp"
#include "chronolex/error.hpp"
#include "chronolex/report.hpp"
#include "oracles.hpp"

using namespace chronolex;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

boost::property_tree::ptree parse_xml(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

std::vector<std::pair<double, double>> circle_centres(const std::string& svg) {
  std::vector<std::pair<double, double>> out;
  const std::regex re("<circle class=\"point\" cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  return out;
}

}  // namespace

TEST_CASE("summary counts") {
  Corpus c;
  c.documents = {{"a", "", "x y", "Lupus", 1994}, {"b", "", "x", "Lupus", 1994}, {"c", "", "and", "Arthritis", 1995}};
  TokenizationRules rules;
  rules.stopwords = {"and"};
  c = tokenize(std::move(c), rules);
  Vocabulary v;
  v.entries = {{"x", 2, 2}};
  const auto s = summarize(c, v);
  CHECK(s.documents_per_year == std::map<int, std::size_t>{{1994, 2}, {1995, 1}});
  REQUIRE(s.documents_per_journal.size() == 2);
  CHECK(s.documents_per_journal[0].first == "Lupus");
  CHECK(s.token_total == 3);
  CHECK(s.distinct_words == 2);
  CHECK(s.vocabulary_size == 1);
  CHECK(s.empty_documents == std::vector<std::string>{"c"});
  std::size_t sum = 0;
  for (const auto& [y, n] : s.documents_per_year) sum += n;
  CHECK(sum == s.documents);
}

TEST_CASE("two-point scatter") {
  PlotSpec spec;
  spec.title = "A & B <test>";
  spec.points = {{"alpha", 0.0, 1.0, "w", 1.0}, {"beta", -1.0, 2.0, "w", 2.0}};
  const auto svg = render_svg(spec);
  CHECK(count(svg, "<circle class=\"point\"") == 2);
  CHECK(count(svg, "<text class=\"label\"") == 2);
  CHECK(svg.find("A &amp; B &lt;test&gt;") != std::string::npos);
  CHECK_NOTHROW(parse_xml(svg));
  CHECK(parse_xml(svg).get_child("svg.<xmlattr>.version").data() == "1.1");
}

TEST_CASE("trajectory polyline keeps year order") {
  PlotSpec spec;
  spec.kind = PlotKind::trajectory;
  for (int y = 0; y < 5; ++y) spec.points.push_back({std::to_string(2001 + y), double(y * y), double(y % 2), "year", 0});
  const auto svg = render_svg(spec);
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex("<polyline class=\"trajectory\"[^>]*points=\"([^\"]*)\"")));
  std::istringstream in(m[1].str());
  std::vector<double> xs;
  std::string vertex;
  while (in >> vertex) xs.push_back(std::stod(vertex.substr(0, vertex.find(','))));
  REQUIRE(xs.size() == 5);
  CHECK(std::is_sorted(xs.begin(), xs.end()));
  CHECK(svg.find(">2001<") < svg.find(">2005<"));
}

TEST_CASE("pixel transform preserves ordering") {
  PlotSpec spec;
  const double xs[] = {0.3, -2.0, 5.5, 1.0, -0.7};
  const double ys[] = {1.0, 4.0, -3.0, 0.0, 2.5};
  for (int i = 0; i < 5; ++i) spec.points.push_back({"p" + std::to_string(i), xs[i], ys[i], "t", 0.0});
  const auto centres = circle_centres(render_svg(spec));
  REQUIRE(centres.size() == 5);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      if (xs[a] < xs[b]) CHECK(centres[a].first < centres[b].first);
      if (ys[a] < ys[b]) CHECK(centres[a].second > centres[b].second);  // SVG y grows downwards
    }
}

TEST_CASE("label policies and de-duplication") {
  PlotSpec spec;
  spec.points = {{"x", 0, 0, "a", 3.0}, {"x", 1, 1, "a", 1.0}, {"y", 2, 0, "b", 2.0}};
  const auto all = render_svg(spec);
  CHECK(all.find(">x (2)<") != std::string::npos);
  spec.label_policy = LabelPolicy::top_n;
  spec.top_n = 2;
  const auto top = render_svg(spec);
  CHECK(count(top, "<text class=\"label\"") == 2);
  CHECK(top.find(">x (2)<") == std::string::npos);
  spec.label_policy = LabelPolicy::none;
  CHECK(count(render_svg(spec), "<text class=\"label\"") == 0);
}

TEST_CASE("bar chart") {
  PlotSpec spec;
  spec.kind = PlotKind::bar;
  spec.points = {{"1994", 0, 3, "n", 0}, {"1995", 1, 7, "n", 0}, {"1996", 2, 0, "n", 0}};
  const auto svg = render_svg(spec);
  CHECK(count(svg, "<rect class=\"bar\"") == 3);
  CHECK_NOTHROW(parse_xml(svg));
}

TEST_CASE("rendering is byte-deterministic") {
  const auto dir = oracle::scratch_dir("svg");
  PlotSpec spec;
  spec.points = {{"a", 0.1, 0.2, "t", 1}, {"b", 0.3, -0.2, "u", 2}, {"c", -0.5, 0.0, "t", 3}};
  render_svg(spec, dir / "one.svg");
  render_svg(spec, dir / "two.svg");
  std::ifstream a(dir / "one.svg", std::ios::binary), b(dir / "two.svg", std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() == render_svg(spec));
}

TEST_CASE("invalid specs") {
  PlotSpec spec;
  CHECK_THROWS_AS(render_svg(spec), DataError);
  spec.points = {{"a", std::nan(""), 0.0, "t", 0}};
  CHECK_THROWS_AS(render_svg(spec), DataError);
  spec.points = {{"a", 0.0, 0.0, "t", 0}};
  CHECK_THROWS_AS(render_svg(spec, "/nonexistent-dir/x.svg"), DataError);
}

TEST_CASE("axis labels") { CHECK(axis_label(1, 12.3456) == "Axis 1 (12.35%)"); }
