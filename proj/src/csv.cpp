#include "chronolex/csv.hpp"

#include <fstream>

#include <fmt/format.h>

#include "chronolex/error.hpp"

namespace chronolex {

std::vector<CsvRecord> read_delimited(std::istream& in, char delimiter) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_has_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto finish_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto finish_record = [&] {
    if (record_has_content || !current.fields.empty()) {
      finish_field();
      records.push_back(std::move(current));
    }
    current = CsvRecord{};
    current.line = line;
    record_has_content = false;
  };

  char ch;
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      record_has_content = true;
    } else if (ch == delimiter) {
      finish_field();
      record_has_content = true;
    } else if (ch == '\r') {
      // swallowed; "\r\n" ends the record at '\n'
    } else if (ch == '\n') {
      ++line;
      finish_record();
    } else {
      field.push_back(ch);
      field_started = true;
      record_has_content = true;
    }
  }
  if (in_quotes) {
    throw DataError(fmt::format("unterminated quoted field starting in record at line {}", current.line));
  }
  finish_record();
  return records;
}

std::vector<CsvRecord> read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_delimited(in, ',');
}

std::string csv_field(std::string_view value, char delimiter) {
  const bool needs_quotes = value.find_first_of(std::string{'"', '\n', '\r', delimiter}) != std::string_view::npos;
  if (!needs_quotes) return std::string(value);
  std::string quoted = "\"";
  for (char ch : value) {
    if (ch == '"') quoted.push_back('"');
    quoted.push_back(ch);
  }
  quoted.push_back('"');
  return quoted;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{:.10g}", value);
}

void CsvWriter::separator() {
  if (!first_) out_ << delimiter_;
  first_ = false;
}

CsvWriter& CsvWriter::field(std::string_view value) {
  separator();
  out_ << csv_field(value, delimiter_);
  return *this;
}

CsvWriter& CsvWriter::field(double value) {
  separator();
  out_ << format_number(value);
  return *this;
}

CsvWriter& CsvWriter::field(long long value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void CsvWriter::row(const std::vector<std::string>& values) {
  for (const auto& v : values) field(std::string_view(v));
  end_row();
}

}  // namespace chronolex
