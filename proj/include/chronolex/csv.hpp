#pragma once

// RFC-4180 style delimited text: reader, writer and number formatting used
// by every exported table.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chronolex {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// Parses quoted fields, doubled quotes and embedded newlines. Throws
/// DataError on an unterminated quote.
std::vector<CsvRecord> read_delimited(std::istream& in, char delimiter = ',');
std::vector<CsvRecord> read_csv_file(const std::filesystem::path& path);

std::string csv_field(std::string_view value, char delimiter = ',');

/// Shortest round-trippable-enough form used in all CSV exports ({:.10g}).
std::string format_number(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out, char delimiter = ',') : out_(out), delimiter_(delimiter) {}

  CsvWriter& field(std::string_view value);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
  void end_row();

  void row(const std::vector<std::string>& values);

 private:
  void separator();

  std::ostream& out_;
  char delimiter_;
  bool first_ = true;
};

}  // namespace chronolex
