#include "chronolex/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "chronolex/ca.hpp"
#include "chronolex/chrono.hpp"
#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"
#include "chronolex/lextable.hpp"
#include "chronolex/mfact.hpp"
#include "chronolex/report.hpp"

namespace chronolex {

namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(fmt::format("setting '{}': '{}' is not an integer", key, value));
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("setting '{}': '{}' is not a number", key, value));
  }
}

bool parse_flag(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(fmt::format("setting '{}': '{}' is not a boolean", key, value));
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

// --- manifests ---------------------------------------------------------------

struct Manifest {
  std::string stage;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> inputs;   // name, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // name, hash
};

fs::path manifest_path(const fs::path& dir, Stage stage) {
  return dir / fmt::format("{}.manifest", stage_name(stage));
}

void write_manifest(const Manifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "stage = " << m.stage << '\n';
  out << "format_version = " << kFormatVersion << '\n';
  for (const auto& [k, v] : m.params) out << "param." << k << " = " << v << '\n';
  for (const auto& [k, v] : m.inputs) out << "input " << k << ' ' << v << '\n';
  for (const auto& [k, v] : m.outputs) out << "output " << k << ' ' << v << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "output" || head == "input") {
      std::string name, hash;
      ls >> name >> hash;
      (head == "output" ? m.outputs : m.inputs).emplace_back(name, hash);
    } else if (head == "stage") {
      std::string eq;
      ls >> eq >> m.stage;
    }
  }
  return m;
}

class StageContext {
 public:
  StageContext(Stage stage, const ProjectConfig& config) : stage_(stage), dir_(config.out) {
    manifest_.stage = std::string(stage_name(stage));
  }

  void param(std::string key, std::string value) { manifest_.params.emplace_back(std::move(key), std::move(value)); }

  /// Upstream artifact, checked against the producing stage's manifest.
  fs::path input(Stage upstream, const std::string& name) {
    const fs::path mpath = manifest_path(dir_, upstream);
    if (!fs::exists(mpath)) {
      throw DataError(fmt::format("missing upstream artifact '{}': run the '{}' stage first", name,
                                  stage_name(upstream)));
    }
    const Manifest m = read_manifest(mpath);
    auto it = std::find_if(m.outputs.begin(), m.outputs.end(), [&](const auto& o) { return o.first == name; });
    const fs::path path = dir_ / name;
    if (it == m.outputs.end() || !fs::exists(path)) {
      throw DataError(fmt::format("missing upstream artifact '{}' from the '{}' stage", name, stage_name(upstream)));
    }
    const std::string hash = hex64(fnv1a_file(path));
    if (hash != it->second) {
      throw DataError(fmt::format("upstream artifact '{}' changed since the '{}' stage wrote it; rerun '{}'", name,
                                  stage_name(upstream), stage_name(upstream)));
    }
    manifest_.inputs.emplace_back(name, hash);
    return path;
  }

  void external_input(const std::string& label, const fs::path& path) {
    manifest_.inputs.emplace_back(label, hex64(fnv1a_file(path)));
  }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  void finish() {
    for (const auto& name : outputs_) manifest_.outputs.emplace_back(name, hex64(fnv1a_file(dir_ / name)));
    write_manifest(manifest_, manifest_path(dir_, stage_));
  }

 private:
  Stage stage_;
  fs::path dir_;
  Manifest manifest_;
  std::vector<std::string> outputs_;
};

// --- CSV access by column name -------------------------------------------------

class CsvTable {
 public:
  explicit CsvTable(const fs::path& path) : path_(path) {
    auto records = read_csv_file(path);
    if (records.empty()) throw DataError(path.string() + ": empty file");
    header_ = std::move(records.front().fields);
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].fields.size() != header_.size()) {
        throw DataError(fmt::format("{}: line {} has {} fields, expected {}", path.string(), records[r].line,
                                    records[r].fields.size(), header_.size()));
      }
      rows_.push_back(std::move(records[r].fields));
    }
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  std::size_t column(std::string_view name) const {
    auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) throw DataError(fmt::format("{}: missing column '{}'", path_.string(), name));
    return static_cast<std::size_t>(it - header_.begin());
  }
  bool has(std::string_view name) const { return std::find(header_.begin(), header_.end(), name) != header_.end(); }

  const std::string& text(std::size_t row, std::string_view name) const { return rows_[row][column(name)]; }
  double number(std::size_t row, std::string_view name) const {
    const auto& s = text(row, name);
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw DataError(fmt::format("{}: '{}' in column '{}' is not a number", path_.string(), s, name));
    }
  }

 private:
  fs::path path_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct DocumentInfo {
  int year = 0;
  std::string journal;
};

std::map<std::string, DocumentInfo> read_documents(const fs::path& path) {
  CsvTable t(path);
  std::map<std::string, DocumentInfo> docs;
  for (std::size_t r = 0; r < t.size(); ++r) {
    docs[t.text(r, "id")] = {static_cast<int>(t.number(r, "year")), t.text(r, "journal")};
  }
  return docs;
}

std::vector<int> row_years(const LexicalTable& table, const std::map<std::string, DocumentInfo>& docs) {
  std::vector<int> years;
  for (const auto& id : table.row_ids()) {
    auto it = docs.find(id);
    if (it == docs.end()) throw DataError(fmt::format("table row '{}' is missing from documents.csv", id));
    years.push_back(it->second.year);
  }
  return years;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

TokenizationRules rules_from(const ProjectConfig& c) {
  TokenizationRules rules;
  rules.lowercase = c.lowercase;
  rules.drop_numeric = c.drop_numeric;
  rules.stopwords = c.stopwords ? load_stopwords(*c.stopwords, c.lowercase) : default_stopwords();
  rules.min_doc_count = c.min_doc_count;
  rules.min_total_count = c.min_total_count;
  rules.filter_rule = c.filter_rule;
  return rules;
}

// --- stages ----------------------------------------------------------------------

void stage_ingest(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::ingest, c);
  ctx.external_input("corpus", c.corpus);
  if (c.stopwords) ctx.external_input("stopwords", *c.stopwords);
  ctx.param("format", c.format == CorpusFormat::json_lines ? "jsonl" : "delimited");
  ctx.param("min_doc_count", std::to_string(c.min_doc_count));
  ctx.param("min_total_count", std::to_string(c.min_total_count));
  ctx.param("filter_rule", c.filter_rule == FilterRule::require_both ? "both" : "either");
  ctx.param("lowercase", c.lowercase ? "true" : "false");
  ctx.param("drop_numeric", c.drop_numeric ? "true" : "false");

  const TokenizationRules rules = rules_from(c);
  Corpus corpus = load_corpus(c.corpus, LoadOptions{c.format, c.delimiter, c.min_year, c.max_year});
  corpus = tokenize(std::move(corpus), rules);
  const Vocabulary vocab = build_vocabulary(corpus, rules);
  const LexicalTableBuild build = build_lexical_table(corpus, vocab);
  const CorpusSummary summary = summarize(corpus, vocab);

  {
    auto out = open_output(ctx.output("documents.csv"));
    CsvWriter w(out);
    w.row({"id", "year", "journal", "title", "tokens", "analysed"});
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
      const auto& doc = corpus.documents[d];
      const bool analysed = std::none_of(build.excluded.begin(), build.excluded.end(),
                                         [&](const RowExclusion& e) { return e.id == doc.id; });
      w.field(std::string_view(doc.id)).field(doc.year).field(std::string_view(doc.journal));
      w.field(std::string_view(doc.title)).field(corpus.tokens[d].size()).field(analysed ? "1" : "0");
      w.end_row();
    }
  }
  {
    auto out = open_output(ctx.output("vocabulary.csv"));
    CsvWriter w(out);
    w.row({"word", "doc_count", "total_count"});
    for (const auto& e : vocab.entries) {
      w.field(std::string_view(e.word)).field(static_cast<long long>(e.doc_count));
      w.field(static_cast<long long>(e.total_count)).end_row();
    }
  }
  write_table_csv(build.table, ctx.output("lextable.csv"));
  {
    auto out = open_output(ctx.output("excluded.csv"));
    CsvWriter w(out);
    w.row({"id", "reason"});
    for (const auto& e : build.excluded) w.field(std::string_view(e.id)).field(std::string_view(e.reason)).end_row();
  }
  write_summary_csv(summary, c.out);
  ctx.output("summary.csv");
  ctx.output("summary_years.csv");
  ctx.output("summary_journals.csv");
  ctx.finish();
  log << fmt::format("[ingest] {} documents, {} tokens, {} distinct words, table {}x{} ({} excluded)\n",
                     summary.documents, summary.token_total, summary.distinct_words, build.table.rows(),
                     build.table.cols(), build.excluded.size());
}

void stage_ca(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::ca, c);
  ctx.param("axes", std::to_string(c.axes));
  const LexicalTable table = read_table_csv(ctx.input(Stage::ingest, "lextable.csv"));
  const CaResult res = correspondence_analysis(table, c.axes);
  for (const auto& w : res.warnings) log << "[ca] warning: " << w << '\n';

  write_ca_eigenvalues_csv(res, ctx.output("ca_eigenvalues.csv"));
  write_ca_points_csv(res, MetaKind::metadoc, ctx.output("ca_rows.csv"));
  write_ca_points_csv(res, MetaKind::metakey, ctx.output("ca_cols.csv"));
  {
    auto out = open_output(ctx.output("ca_meta.csv"));
    CsvWriter w(out);
    w.row({"axis", "kind", "sign", "label", "contribution", "coordinate"});
    for (Eigen::Index k = 0; k < res.axes(); ++k) {
      for (MetaKind kind : {MetaKind::metakey, MetaKind::metadoc}) {
        const auto [pos, neg] = extract_meta(res, k, kind);
        for (const MetaSet* set : {&pos, &neg}) {
          for (const auto& m : set->members) {
            w.field(static_cast<long long>(k + 1)).field(kind == MetaKind::metakey ? "metakey" : "metadoc");
            w.field(set->sign == AxisSign::positive ? "+" : "-").field(std::string_view(m.label));
            w.field(m.contribution).field(m.coordinate).end_row();
          }
        }
      }
    }
  }
  ctx.finish();
  log << fmt::format("[ca] {} axes, total inertia {}, first eigenvalue {}\n", res.axes(),
                     format_number(res.total_inertia), format_number(res.axes() ? res.eigenvalues(0) : 0.0));
}

void stage_mfact(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::mfact, c);
  ctx.param("axes", std::to_string(c.axes));
  const LexicalTable table = read_table_csv(ctx.input(Stage::ingest, "lextable.csv"));
  const auto docs = read_documents(ctx.input(Stage::ingest, "documents.csv"));
  const auto years = row_years(table, docs);
  const MfactResult res = mfact(table, to_double_years(years), c.axes);
  for (const auto& w : res.warnings) log << "[mfact] warning: " << w << '\n';

  const YearTrajectory trajectory = year_trajectory(res, years);
  std::vector<std::string> year_labels, journal_labels;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    year_labels.push_back(std::to_string(years[i]));
    journal_labels.push_back(docs.at(table.row_ids()[i]).journal);
  }
  std::vector<CategoryProjection> projections;
  for (Viewpoint v : {Viewpoint::global, Viewpoint::vocabulary, Viewpoint::chronology}) {
    projections.push_back(project_categories(res, year_labels, v, "year"));
  }
  for (Viewpoint v : {Viewpoint::global, Viewpoint::vocabulary}) {
    projections.push_back(project_categories(res, journal_labels, v, "journal"));
  }

  write_mfact_eigenvalues_csv(res, ctx.output("mfact_eigenvalues.csv"));
  write_mfact_rows_csv(res, ctx.output("mfact_rows.csv"));
  write_mfact_cols_csv(res, ctx.output("mfact_cols.csv"));
  write_mfact_groups_csv(res, ctx.output("mfact_groups.csv"));
  write_trajectory_csv(trajectory, ctx.output("mfact_trajectory.csv"));
  write_categories_csv(projections, ctx.output("mfact_categories.csv"));
  ctx.finish();
  log << fmt::format("[mfact] first eigenvalue {}, axis-1 year correlation {}\n",
                     format_number(res.global_eigenvalues(0)), format_number(res.axis_year_correlation(0)));
}

void stage_permtest(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::permtest, c);
  ctx.param("replications", std::to_string(c.replications));
  ctx.param("seed", std::to_string(c.seed));
  const LexicalTable table = read_table_csv(ctx.input(Stage::ingest, "lextable.csv"));
  const auto docs = read_documents(ctx.input(Stage::ingest, "documents.csv"));
  const auto years = row_years(table, docs);
  const auto res = permutation_test(table, to_double_years(years), {c.replications, c.seed, c.threads});
  write_permutation_csv(res, ctx.output("permtest.csv"), ctx.output("permtest_null.csv"));
  ctx.finish();
  log << fmt::format("[permtest] observed lambda1 {}, p = {} ({} replications)\n", format_number(res.observed_lambda1),
                     format_number(res.p_value), res.replications);
}

YearTrajectory read_trajectory(const fs::path& path) {
  CsvTable t(path);
  Eigen::Index K = 0;
  while (t.has(fmt::format("vocabulary{}", K + 1))) ++K;
  YearTrajectory traj;
  for (std::size_t r = 0; r < t.size(); ++r) {
    TrajectoryPoint p;
    p.year = static_cast<int>(t.number(r, "year"));
    p.members = static_cast<std::size_t>(t.number(r, "documents"));
    p.coords = Eigen::VectorXd(K);
    for (Eigen::Index k = 0; k < K; ++k) p.coords(k) = t.number(r, fmt::format("vocabulary{}", k + 1));
    traj.points.push_back(std::move(p));
    if (r + 1 < t.size()) traj.gaps.push_back(t.number(r, "gap_to_next"));
  }
  return traj;
}

void stage_periods(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::periods, c);
  ctx.param("periods", std::to_string(c.periods));
  const YearTrajectory traj = read_trajectory(ctx.input(Stage::mfact, "mfact_trajectory.csv"));
  const YearPeriods periods = segment_periods(traj, c.periods);
  write_periods_csv(periods, ctx.output("periods.csv"));
  ctx.finish();
  std::string labels;
  for (const auto& l : periods.labels) labels += (labels.empty() ? "" : ", ") + l;
  log << fmt::format("[periods] {}\n", labels);
}

YearPeriods read_periods(const fs::path& path) {
  CsvTable t(path);
  YearPeriods periods;
  for (std::size_t r = 0; r < t.size(); ++r) {
    periods.labels.push_back(t.text(r, "label"));
    std::vector<int> years;
    std::istringstream in(t.text(r, "years"));
    int y;
    while (in >> y) years.push_back(y);
    if (years.empty()) throw DataError(path.string() + ": period without years");
    periods.years.push_back(std::move(years));
  }
  return periods;
}

void stage_characterize(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::characterize, c);
  ctx.param("alpha", format_number(c.alpha));
  ctx.param("benjamini_hochberg", c.benjamini_hochberg ? "true" : "false");
  const YearPeriods periods = read_periods(ctx.input(Stage::periods, "periods.csv"));
  const LexicalTable table = read_table_csv(ctx.input(Stage::ingest, "lextable.csv"));
  const auto docs = read_documents(ctx.input(Stage::ingest, "documents.csv"));
  const auto years = row_years(table, docs);
  const AggregatedTable agg = aggregate(table, period_partition(periods, table.row_ids(), years), "lextable.csv");

  const CharacterizationOptions opt{c.alpha, c.benjamini_hochberg};
  const auto words = characteristic_words(agg, opt);
  const auto increments = characteristic_increments(agg, opt);
  const auto chrono = chronological_characteristic_words(agg, c.alpha);
  write_characteristic_words_csv(words, ctx.output("char_words.csv"));
  write_increments_csv(increments, ctx.output("char_increments.csv"));
  write_chronological_csv(chrono, ctx.output("char_chrono.csv"));
  ctx.finish();
  log << fmt::format("[characterize] {} characteristic words, {} increments, {} chronological words\n", words.size(),
                     increments.size(), chrono.size());
}

// Rebuilds the parts of an MFACT result that pioneer detection needs.
MfactResult read_mfact_rows(const fs::path& rows_path, const fs::path& eig_path) {
  CsvTable rows(rows_path);
  CsvTable eig(eig_path);
  Eigen::Index K = 0;
  while (rows.has(fmt::format("global{}", K + 1))) ++K;
  std::vector<std::string> groups;
  for (const auto& h : rows.header()) {
    if (h.rfind("partial_", 0) == 0 && h.size() > 9 && h.back() == '1' && h.substr(8, h.size() - 9).find_first_of("0123456789") == std::string::npos) {
      groups.push_back(h.substr(8, h.size() - 9));
    }
  }
  MfactResult res;
  const auto n = static_cast<Eigen::Index>(rows.size());
  res.row_weights = Eigen::VectorXd(n);
  res.row_coords = Eigen::MatrixXd(n, K);
  res.partial_row_coords.assign(groups.size(), Eigen::MatrixXd(n, K));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    res.groups.push_back({groups[g], groups[g] == "year" ? GroupKind::quantitative : GroupKind::frequency, {}, 0.0, 1.0});
    if (groups[g] == "words") res.vocabulary_group = g;
    if (groups[g] == "year") res.chronology_group = g;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    res.row_ids.push_back(rows.text(r, "id"));
    res.row_weights(i) = rows.number(r, "weight");
    for (Eigen::Index k = 0; k < K; ++k) {
      res.row_coords(i, k) = rows.number(r, fmt::format("global{}", k + 1));
      for (std::size_t g = 0; g < groups.size(); ++g) {
        res.partial_row_coords[g](i, k) = rows.number(r, fmt::format("partial_{}{}", groups[g], k + 1));
      }
    }
  }
  res.global_eigenvalues = Eigen::VectorXd::Zero(K);
  res.axis_year_correlation = Eigen::VectorXd::Zero(K);
  for (std::size_t r = 0; r < eig.size() && static_cast<Eigen::Index>(r) < K; ++r) {
    res.global_eigenvalues(static_cast<Eigen::Index>(r)) = eig.number(r, "eigenvalue");
    if (!eig.text(r, "year_correlation").empty()) {
      res.axis_year_correlation(static_cast<Eigen::Index>(r)) = eig.number(r, "year_correlation");
    }
  }
  return res;
}

void stage_pioneers(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::pioneers, c);
  ctx.param("pioneer_sd", format_number(c.pioneer_sd));
  const MfactResult res = read_mfact_rows(ctx.input(Stage::mfact, "mfact_rows.csv"),
                                          ctx.input(Stage::mfact, "mfact_eigenvalues.csv"));
  const auto docs = read_documents(ctx.input(Stage::ingest, "documents.csv"));
  std::vector<int> years;
  for (const auto& id : res.row_ids) {
    auto it = docs.find(id);
    if (it == docs.end()) throw DataError(fmt::format("mfact row '{}' is missing from documents.csv", id));
    years.push_back(it->second.year);
  }
  PioneerOptions opt;
  opt.cohort_sd_multiplier = c.pioneer_sd;
  const PioneerReport report = pioneer_scores(res, years, opt);
  write_pioneers_csv(report.scores, ctx.output("pioneers.csv"));
  write_pioneers_csv(report.recent, ctx.output("pioneers_recent.csv"));
  ctx.finish();
  const auto flagged = std::count_if(report.scores.begin(), report.scores.end(), [](const auto& s) { return s.pioneer; });
  log << fmt::format("[pioneers] {} documents flagged; largest gap '{}'\n", flagged,
                     report.scores.empty() ? std::string("-") : report.scores.front().id);
}

PlotSpec bar_plot(const CsvTable& t, const char* label_col, const char* title) {
  PlotSpec spec;
  spec.kind = PlotKind::bar;
  spec.title = title;
  spec.y_label = "documents";
  for (std::size_t r = 0; r < t.size(); ++r) {
    spec.points.push_back({t.text(r, label_col), double(r), t.number(r, "documents"), "count", 0.0});
  }
  return spec;
}

double column_or_zero(const CsvTable& t, std::size_t r, const std::string& name) {
  return t.has(name) ? t.number(r, name) : 0.0;
}

void stage_report(const ProjectConfig& c, std::ostream& log) {
  StageContext ctx(Stage::report, c);
  ctx.param("label_top_n", std::to_string(c.label_top_n));
  const CsvTable years(ctx.input(Stage::ingest, "summary_years.csv"));
  const CsvTable journals(ctx.input(Stage::ingest, "summary_journals.csv"));
  const CsvTable ca_eig(ctx.input(Stage::ca, "ca_eigenvalues.csv"));
  const CsvTable ca_rows(ctx.input(Stage::ca, "ca_rows.csv"));
  const CsvTable ca_cols(ctx.input(Stage::ca, "ca_cols.csv"));
  const CsvTable mf_eig(ctx.input(Stage::mfact, "mfact_eigenvalues.csv"));
  const CsvTable mf_cols(ctx.input(Stage::mfact, "mfact_cols.csv"));
  const CsvTable mf_cats(ctx.input(Stage::mfact, "mfact_categories.csv"));
  const CsvTable traj(ctx.input(Stage::mfact, "mfact_trajectory.csv"));
  const CsvTable pioneers(ctx.input(Stage::pioneers, "pioneers.csv"));

  render_svg(bar_plot(years, "year", "Documents per year"), ctx.output("years.svg"));
  render_svg(bar_plot(journals, "journal", "Documents per journal"), ctx.output("journals.svg"));

  auto pct = [](const CsvTable& eig, std::size_t axis) {
    return axis < eig.size() ? eig.number(axis, "percent_inertia") : 0.0;
  };

  // CA factor maps on the first plane.
  for (const auto& [table, name, title, key] :
       {std::tuple{&ca_cols, "ca_words.svg", "CA: words", "word"}, std::tuple{&ca_rows, "ca_documents.svg", "CA: documents", "id"}}) {
    PlotSpec spec;
    spec.title = title;
    spec.x_label = axis_label(1, pct(ca_eig, 0));
    spec.y_label = axis_label(2, pct(ca_eig, 1));
    spec.label_policy = LabelPolicy::top_n;
    spec.top_n = c.label_top_n;
    for (std::size_t r = 0; r < table->size(); ++r) {
      const double weight = column_or_zero(*table, r, "contrib1") + column_or_zero(*table, r, "contrib2");
      spec.points.push_back({table->text(r, key), table->number(r, "coord1"), column_or_zero(*table, r, "coord2"),
                             "point", weight});
    }
    render_svg(spec, ctx.output(name));
  }

  {
    PlotSpec spec;
    spec.title = "MFACT: words with year categories (illustrative)";
    spec.x_label = axis_label(1, pct(mf_eig, 0));
    spec.y_label = axis_label(2, pct(mf_eig, 1));
    spec.label_policy = LabelPolicy::top_n;
    for (std::size_t r = 0; r < mf_cols.size(); ++r) {
      if (mf_cols.text(r, "group") != "words") continue;
      const double x = mf_cols.number(r, "coord1");
      const double y = column_or_zero(mf_cols, r, "coord2");
      spec.points.push_back({mf_cols.text(r, "column"), x, y, "word", x * x + y * y});
    }
    std::size_t categories = 0;
    for (std::size_t r = 0; r < mf_cats.size(); ++r) {
      if (mf_cats.text(r, "variable") != "year" || mf_cats.text(r, "viewpoint") != "global") continue;
      spec.points.push_back({mf_cats.text(r, "category"), mf_cats.number(r, "coord1"),
                             column_or_zero(mf_cats, r, "coord2"), "year", 1e300});
      ++categories;
    }
    spec.top_n = c.label_top_n + categories;
    render_svg(spec, ctx.output("mfact_words.svg"));
  }
  {
    PlotSpec spec;
    spec.kind = PlotKind::trajectory;
    spec.title = "Year trajectory (vocabulary viewpoint)";
    spec.x_label = axis_label(1, pct(mf_eig, 0));
    spec.y_label = axis_label(2, pct(mf_eig, 1));
    for (std::size_t r = 0; r < traj.size(); ++r) {
      spec.points.push_back({traj.text(r, "year"), traj.number(r, "vocabulary1"), column_or_zero(traj, r, "vocabulary2"),
                             "year", 0.0});
    }
    render_svg(spec, ctx.output("trajectory.svg"));
  }
  {
    PlotSpec spec;
    spec.title = "Axis-1 partial points: chronology vs vocabulary";
    spec.x_label = "chronology viewpoint (axis 1)";
    spec.y_label = "vocabulary viewpoint (axis 1)";
    spec.label_policy = LabelPolicy::top_n;
    spec.top_n = 0;
    for (std::size_t r = 0; r < pioneers.size(); ++r) {
      const bool flagged = pioneers.text(r, "pioneer") == "1";
      spec.top_n += flagged ? 1 : 0;
      spec.points.push_back({pioneers.text(r, "id"), pioneers.number(r, "chronology"), pioneers.number(r, "vocabulary"),
                             flagged ? "pioneer" : "document", pioneers.number(r, "gap")});
    }
    spec.top_n = std::min(spec.top_n, c.label_top_n);
    render_svg(spec, ctx.output("pioneers.svg"));
  }
  ctx.finish();
  log << "[report] 7 SVG figures written\n";
}

template <typename Fn>
void with_stage_context(Stage stage, Fn&& fn) {
  const std::string prefix = fmt::format("stage '{}': ", stage_name(stage));
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const AnalysisError& e) {
    throw AnalysisError(prefix + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(prefix + e.what());
  }
}

}  // namespace

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::ingest, Stage::ca, Stage::mfact, Stage::permtest, Stage::periods, Stage::characterize,
                  Stage::pioneers, Stage::report, Stage::all}) {
    if (stage_name(s) == name) return s;
  }
  throw ConfigError(fmt::format("unknown subcommand '{}'", name));
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::ca: return "ca";
    case Stage::mfact: return "mfact";
    case Stage::permtest: return "permtest";
    case Stage::periods: return "periods";
    case Stage::characterize: return "characterize";
    case Stage::pioneers: return "pioneers";
    case Stage::report: return "report";
    case Stage::all: return "all";
  }
  return "all";
}

void ProjectConfig::validate(Stage stage) const {
  const bool all = stage == Stage::all;
  if (out.empty()) throw ConfigError("output directory is not set");
  if (all || stage == Stage::ingest) {
    if (corpus.empty()) throw ConfigError("corpus path is not set");
    if (!fs::exists(corpus)) throw ConfigError("corpus file does not exist: " + corpus.string());
    if (stopwords && !fs::exists(*stopwords)) throw ConfigError("stopword file does not exist: " + stopwords->string());
    if (min_doc_count < 1 || min_total_count < 1) throw ConfigError("frequency thresholds must be >= 1");
    if (min_year > max_year) throw ConfigError("min_year exceeds max_year");
  }
  if (axes < 1) throw ConfigError("axes must be >= 1");
  if ((all || stage == Stage::periods) && periods < 2) throw ConfigError("periods must be >= 2");
  if ((all || stage == Stage::permtest) && replications < 99) throw ConfigError("replications must be >= 99");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(pioneer_sd >= 0.0)) throw ConfigError("pioneer_sd must be >= 0");
}

void apply_setting(ProjectConfig& c, std::string_view key, std::string_view value, const fs::path& base_dir) {
  value = trim(value);
  auto path_of = [&](std::string_view v) {
    fs::path p{std::string(v)};
    return (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
  };
  if (key == "corpus") {
    c.corpus = path_of(value);
  } else if (key == "format") {
    if (value == "jsonl" || value == "json-lines") {
      c.format = CorpusFormat::json_lines;
    } else if (value == "delimited" || value == "csv") {
      c.format = CorpusFormat::delimited;
    } else if (value == "tsv") {
      c.format = CorpusFormat::delimited;
      c.delimiter = '\t';
    } else {
      throw ConfigError(fmt::format("format must be jsonl, delimited, csv or tsv, got '{}'", value));
    }
  } else if (key == "delimiter") {
    if (value == "\\t" || value == "tab") {
      c.delimiter = '\t';
    } else if (value.size() == 1) {
      c.delimiter = value[0];
    } else {
      throw ConfigError("delimiter must be a single character or 'tab'");
    }
  } else if (key == "stopwords") {
    if (value.empty() || value == "builtin") {
      c.stopwords.reset();
    } else {
      c.stopwords = path_of(value);
    }
  } else if (key == "min_doc_count") {
    c.min_doc_count = parse_integer<int>(key, value);
  } else if (key == "min_total_count") {
    c.min_total_count = parse_integer<int>(key, value);
  } else if (key == "filter_rule") {
    if (value == "both") {
      c.filter_rule = FilterRule::require_both;
    } else if (value == "either") {
      c.filter_rule = FilterRule::require_either;
    } else {
      throw ConfigError("filter_rule must be 'both' or 'either'");
    }
  } else if (key == "lowercase") {
    c.lowercase = parse_flag(key, value);
  } else if (key == "drop_numeric") {
    c.drop_numeric = parse_flag(key, value);
  } else if (key == "min_year") {
    c.min_year = parse_integer<int>(key, value);
  } else if (key == "max_year") {
    c.max_year = parse_integer<int>(key, value);
  } else if (key == "axes") {
    c.axes = parse_integer<int>(key, value);
  } else if (key == "periods") {
    c.periods = parse_integer<int>(key, value);
  } else if (key == "replications") {
    c.replications = parse_integer<int>(key, value);
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "alpha") {
    c.alpha = parse_real(key, value);
  } else if (key == "benjamini_hochberg" || key == "bh") {
    c.benjamini_hochberg = parse_flag(key, value);
  } else if (key == "pioneer_sd") {
    c.pioneer_sd = parse_real(key, value);
  } else if (key == "threads") {
    c.threads = parse_integer<int>(key, value);
  } else if (key == "label_top_n") {
    c.label_top_n = parse_integer<std::size_t>(key, value);
  } else if (key == "out") {
    c.out = path_of(value);
  } else {
    throw ConfigError(fmt::format("unknown setting '{}'", key));
  }
}

ProjectConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ProjectConfig c;
  const fs::path base = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", path.string(), line_no));
    }
    apply_setting(c, trim(view.substr(0, eq)), trim(view.substr(eq + 1)), base);
  }
  return c;
}

std::string config_reference() {
  const ProjectConfig d;
  std::string s;
  s += "Config file: one 'key = value' per line, '#' starts a comment. Relative paths\n";
  s += "resolve against the config file's directory. Settings and defaults:\n";
  s += "  corpus            (required)  corpus file\n";
  s += "  format            jsonl       jsonl | delimited | csv | tsv\n";
  s += "  delimiter         ,           field delimiter for delimited input ('tab' for TAB)\n";
  s += "  stopwords         builtin     stopword file, one word per line\n";
  s += fmt::format("  min_doc_count     {:<11} keep words found in at least this many documents\n", d.min_doc_count);
  s += fmt::format("  min_total_count   {:<11} keep words with at least this many occurrences\n", d.min_total_count);
  s += "  filter_rule       both        both | either: how the two thresholds combine\n";
  s += "  lowercase         true\n";
  s += "  drop_numeric      false       drop purely numeric tokens\n";
  s += fmt::format("  min_year          {}\n  max_year          {}\n", d.min_year, d.max_year);
  s += fmt::format("  axes              {:<11} retained factor axes\n", d.axes);
  s += fmt::format("  periods           {:<11} number of periods cut from the year trajectory\n", d.periods);
  s += fmt::format("  replications      {:<11} permutation test replications (>= 99)\n", d.replications);
  s += fmt::format("  seed              {:<11} permutation seed\n", d.seed);
  s += fmt::format("  alpha             {:<11} significance level of the characterization tests\n", d.alpha);
  s += "  benjamini_hochberg false       filter characterization tests on BH-adjusted p-values\n";
  s += fmt::format("  pioneer_sd        {:<11} flag gap > pioneer_sd x cohort weighted SD\n", d.pioneer_sd);
  s += fmt::format("  threads           {:<11} worker threads for the permutation test\n", d.threads);
  s += fmt::format("  label_top_n       {:<11} labelled points per factor map\n", d.label_top_n);
  s += fmt::format("  out               {:<11} output directory\n", d.out.string());
  return s;
}

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void run_stage(Stage stage, const ProjectConfig& config, std::ostream& log) {
  with_stage_context(stage, [&] { config.validate(stage); });
  fs::create_directories(config.out);
  auto run = [&](Stage s, void (*fn)(const ProjectConfig&, std::ostream&)) {
    with_stage_context(s, [&] { fn(config, log); });
  };
  switch (stage) {
    case Stage::ingest: run(stage, stage_ingest); break;
    case Stage::ca: run(stage, stage_ca); break;
    case Stage::mfact: run(stage, stage_mfact); break;
    case Stage::permtest: run(stage, stage_permtest); break;
    case Stage::periods: run(stage, stage_periods); break;
    case Stage::characterize: run(stage, stage_characterize); break;
    case Stage::pioneers: run(stage, stage_pioneers); break;
    case Stage::report: run(stage, stage_report); break;
    case Stage::all:
      run(Stage::ingest, stage_ingest);
      run(Stage::ca, stage_ca);
      run(Stage::mfact, stage_mfact);
      run(Stage::permtest, stage_permtest);
      run(Stage::periods, stage_periods);
      run(Stage::characterize, stage_characterize);
      run(Stage::pioneers, stage_pioneers);
      run(Stage::report, stage_report);
      break;
  }
}

int run_command(Stage stage, const ProjectConfig& config, std::ostream& log, std::ostream& err) {
  try {
    run_stage(stage, config, log);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 3;
  } catch (const AnalysisError& e) {
    err << "analysis error: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace chronolex
