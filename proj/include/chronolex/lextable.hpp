#pragma once

// Documents x words contingency table and its aggregations.
//
// Index convention: i is the row entity (document, year, period), j the
// column entity (word). row_margins[i] = n_i., col_margins[j] = n_.j,
// grand_total = n_..

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chronolex/corpus.hpp"

namespace chronolex {

struct Cell {
  std::int32_t col;
  std::int64_t count;
};

class LexicalTable {
 public:
  LexicalTable() = default;

  /// Rows are sparse (column, count) lists; entries are sorted and merged,
  /// zero counts dropped. Throws DataError on negative counts or bad columns.
  LexicalTable(std::vector<std::string> row_ids, std::vector<std::string> col_words,
               std::vector<std::vector<Cell>> rows);

  static LexicalTable from_dense(std::vector<std::string> row_ids, std::vector<std::string> col_words,
                                 const Eigen::MatrixXd& counts);

  std::size_t rows() const { return row_ids_.size(); }
  std::size_t cols() const { return col_words_.size(); }

  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_words() const { return col_words_; }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }
  std::int64_t at(std::size_t i, std::size_t j) const;

  const std::vector<std::int64_t>& row_margins() const { return row_margins_; }
  const std::vector<std::int64_t>& col_margins() const { return col_margins_; }
  std::int64_t grand_total() const { return grand_total_; }

  std::optional<std::size_t> row_index(const std::string& id) const;

  Eigen::MatrixXd dense() const;

  /// Rows in the given order (used for partition-order aggregation).
  LexicalTable select_rows(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_words_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::int64_t> row_margins_;
  std::vector<std::int64_t> col_margins_;
  std::int64_t grand_total_ = 0;
};

struct RowExclusion {
  std::string id;
  std::string reason;
};

struct LexicalTableBuild {
  LexicalTable table;
  std::vector<RowExclusion> excluded;  // zero-margin documents, kept for reports
};

/// n_ij = occurrences of vocabulary word j in document i. Documents with no
/// vocabulary word are excluded and listed. Throws DataError if every row is zero.
LexicalTableBuild build_lexical_table(const Corpus& corpus, const Vocabulary& vocab);

struct PartitionGroup {
  std::string label;
  std::vector<std::string> members;  // row ids
  std::optional<int> sort_key;       // e.g. first year of a period
};

struct Partition {
  std::string name;
  std::vector<PartitionGroup> groups;
  bool ordered = false;
};

struct AggregatedTable {
  LexicalTable table;  // rows are partition groups, in partition order
  std::string source;
  std::string partition;
  bool ordered = false;
  std::vector<std::optional<int>> sort_keys;
};

/// Throws DataError for unknown ids, ids listed twice, or uncovered rows.
AggregatedTable aggregate(const LexicalTable& table, const Partition& partition, std::string source = "lexical");

/// Each row in its own group; labels are the row ids.
Partition identity_partition(const LexicalTable& table);

/// Groups table rows by an integer key (e.g. year); groups sorted by key.
Partition partition_by_key(const LexicalTable& table, const std::vector<int>& row_keys, std::string name);

/// Groups table rows by string label; groups sorted by label.
Partition partition_by_label(const LexicalTable& table, const std::vector<std::string>& row_labels,
                             std::string name);

/// First column is the row id/label, header row lists the words.
void write_table_csv(const LexicalTable& table, const std::filesystem::path& path);
LexicalTable read_table_csv(const std::filesystem::path& path);

}  // namespace chronolex
