#include "chronolex/lextable.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

LexicalTable::LexicalTable(std::vector<std::string> row_ids, std::vector<std::string> col_words,
                           std::vector<std::vector<Cell>> rows)
    : row_ids_(std::move(row_ids)), col_words_(std::move(col_words)), rows_(std::move(rows)) {
  if (rows_.size() != row_ids_.size()) throw DataError("row id count does not match row count");
  row_margins_.assign(rows_.size(), 0);
  col_margins_.assign(col_words_.size(), 0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    auto& r = rows_[i];
    std::sort(r.begin(), r.end(), [](const Cell& a, const Cell& b) { return a.col < b.col; });
    std::vector<Cell> merged;
    merged.reserve(r.size());
    for (const Cell& c : r) {
      if (c.col < 0 || static_cast<std::size_t>(c.col) >= col_words_.size()) {
        throw DataError(fmt::format("row '{}': column index {} out of range", row_ids_[i], c.col));
      }
      if (c.count < 0) throw DataError(fmt::format("row '{}': negative count", row_ids_[i]));
      if (c.count == 0) continue;
      if (!merged.empty() && merged.back().col == c.col) {
        merged.back().count += c.count;
      } else {
        merged.push_back(c);
      }
    }
    r = std::move(merged);
    for (const Cell& c : r) {
      row_margins_[i] += c.count;
      col_margins_[static_cast<std::size_t>(c.col)] += c.count;
      grand_total_ += c.count;
    }
  }
}

LexicalTable LexicalTable::from_dense(std::vector<std::string> row_ids, std::vector<std::string> col_words,
                                      const Eigen::MatrixXd& counts) {
  if (counts.rows() != static_cast<Eigen::Index>(row_ids.size()) ||
      counts.cols() != static_cast<Eigen::Index>(col_words.size())) {
    throw DataError("dense counts shape does not match labels");
  }
  std::vector<std::vector<Cell>> rows(row_ids.size());
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      const double v = counts(i, j);
      if (v != std::floor(v)) throw DataError("dense counts must be integers");
      if (v != 0.0) rows[i].push_back({static_cast<std::int32_t>(j), static_cast<std::int64_t>(v)});
    }
  }
  return LexicalTable(std::move(row_ids), std::move(col_words), std::move(rows));
}

std::int64_t LexicalTable::at(std::size_t i, std::size_t j) const {
  const auto& r = rows_.at(i);
  auto it = std::lower_bound(r.begin(), r.end(), static_cast<std::int32_t>(j),
                             [](const Cell& c, std::int32_t col) { return c.col < col; });
  return (it != r.end() && it->col == static_cast<std::int32_t>(j)) ? it->count : 0;
}

std::optional<std::size_t> LexicalTable::row_index(const std::string& id) const {
  auto it = std::find(row_ids_.begin(), row_ids_.end(), id);
  if (it == row_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - row_ids_.begin());
}

Eigen::MatrixXd LexicalTable::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const Cell& c : rows_[i]) m(static_cast<Eigen::Index>(i), c.col) = static_cast<double>(c.count);
  }
  return m;
}

LexicalTable LexicalTable::select_rows(const std::vector<std::size_t>& indices) const {
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i : indices) {
    ids.push_back(row_ids_.at(i));
    rows.push_back(rows_.at(i));
  }
  return LexicalTable(std::move(ids), col_words_, std::move(rows));
}

LexicalTableBuild build_lexical_table(const Corpus& corpus, const Vocabulary& vocab) {
  if (!corpus.tokenized) throw DataError("corpus must be tokenized before building the lexical table");
  if (vocab.entries.empty()) throw DataError("vocabulary is empty");

  std::unordered_map<std::string, std::int32_t> column;
  std::vector<std::string> words;
  for (std::size_t j = 0; j < vocab.entries.size(); ++j) {
    column.emplace(vocab.entries[j].word, static_cast<std::int32_t>(j));
    words.push_back(vocab.entries[j].word);
  }

  LexicalTableBuild out;
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    std::map<std::int32_t, std::int64_t> counts;
    for (const auto& tok : corpus.tokens[d]) {
      if (auto it = column.find(tok); it != column.end()) ++counts[it->second];
    }
    if (counts.empty()) {
      out.excluded.push_back({corpus.documents[d].id, corpus.tokens[d].empty()
                                                          ? "no tokens after stopword removal"
                                                          : "no vocabulary word"});
      continue;
    }
    std::vector<Cell> row;
    for (const auto& [j, n] : counts) row.push_back({j, n});
    ids.push_back(corpus.documents[d].id);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("every document has a zero row margin; vocabulary is disjoint from the corpus");
  out.table = LexicalTable(std::move(ids), std::move(words), std::move(rows));
  return out;
}

AggregatedTable aggregate(const LexicalTable& table, const Partition& partition, std::string source) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.rows(); ++i) index.emplace(table.row_ids()[i], i);

  std::vector<bool> covered(table.rows(), false);
  std::vector<std::string> labels;
  std::vector<std::vector<Cell>> rows;
  AggregatedTable out;
  for (const auto& group : partition.groups) {
    std::map<std::int32_t, std::int64_t> sum;
    for (const auto& id : group.members) {
      auto it = index.find(id);
      if (it == index.end()) {
        throw DataError(fmt::format("partition '{}' references unknown row id '{}'", partition.name, id));
      }
      if (covered[it->second]) {
        throw DataError(fmt::format("partition '{}' lists row id '{}' more than once", partition.name, id));
      }
      covered[it->second] = true;
      for (const Cell& c : table.row(it->second)) sum[c.col] += c.count;
    }
    std::vector<Cell> row;
    for (const auto& [j, n] : sum) row.push_back({j, n});
    labels.push_back(group.label);
    rows.push_back(std::move(row));
    out.sort_keys.push_back(group.sort_key);
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) {
      throw DataError(fmt::format("partition '{}' does not cover row id '{}'", partition.name, table.row_ids()[i]));
    }
  }
  out.table = LexicalTable(std::move(labels), table.col_words(), std::move(rows));
  out.source = std::move(source);
  out.partition = partition.name;
  out.ordered = partition.ordered;
  return out;
}

Partition identity_partition(const LexicalTable& table) {
  Partition p;
  p.name = "identity";
  for (const auto& id : table.row_ids()) p.groups.push_back({id, {id}, std::nullopt});
  return p;
}

Partition partition_by_key(const LexicalTable& table, const std::vector<int>& row_keys, std::string name) {
  if (row_keys.size() != table.rows()) throw DataError("one key per table row is required");
  std::map<int, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < table.rows(); ++i) groups[row_keys[i]].push_back(table.row_ids()[i]);
  Partition p;
  p.name = std::move(name);
  p.ordered = true;
  for (auto& [key, members] : groups) p.groups.push_back({std::to_string(key), std::move(members), key});
  return p;
}

Partition partition_by_label(const LexicalTable& table, const std::vector<std::string>& row_labels,
                             std::string name) {
  if (row_labels.size() != table.rows()) throw DataError("one label per table row is required");
  std::map<std::string, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < table.rows(); ++i) groups[row_labels[i]].push_back(table.row_ids()[i]);
  Partition p;
  p.name = std::move(name);
  for (auto& [label, members] : groups) p.groups.push_back({label, std::move(members), std::nullopt});
  return p;
}

void write_table_csv(const LexicalTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  CsvWriter w(out);
  w.field("id");
  for (const auto& word : table.col_words()) w.field(std::string_view(word));
  w.end_row();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    w.field(std::string_view(table.row_ids()[i]));
    std::size_t next = 0;
    for (const Cell& c : table.row(i)) {
      for (; next < static_cast<std::size_t>(c.col); ++next) w.field(0);
      w.field(static_cast<long long>(c.count));
      ++next;
    }
    for (; next < table.cols(); ++next) w.field(0);
    w.end_row();
  }
}

LexicalTable read_table_csv(const std::filesystem::path& path) {
  const auto records = read_csv_file(path);
  if (records.empty() || records[0].fields.size() < 2) throw DataError(path.string() + ": missing header row");
  std::vector<std::string> words(records[0].fields.begin() + 1, records[0].fields.end());
  std::vector<std::string> ids;
  std::vector<std::vector<Cell>> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != words.size() + 1) {
      throw DataError(fmt::format("{}: line {} has {} fields, expected {}", path.string(), records[r].line,
                                  f.size(), words.size() + 1));
    }
    ids.push_back(f[0]);
    std::vector<Cell> row;
    for (std::size_t j = 0; j < words.size(); ++j) {
      std::int64_t v = 0;
      const auto& s = f[j + 1];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw DataError(fmt::format("{}: line {}: '{}' is not an integer count", path.string(), records[r].line, s));
      }
      if (v != 0) row.push_back({static_cast<std::int32_t>(j), v});
    }
    rows.push_back(std::move(row));
  }
  return LexicalTable(std::move(ids), std::move(words), std::move(rows));
}

}  // namespace chronolex
