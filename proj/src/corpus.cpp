#include "chronolex/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

int parse_year(std::string_view text, std::size_t record) {
  text = trim(text);
  int year = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError(fmt::format("record {}: year '{}' is not an integer", record, text));
  }
  return year;
}

void check_document(const Document& doc, const LoadOptions& options, std::size_t record,
                    std::unordered_set<std::string>& seen) {
  if (trim(doc.id).empty()) throw DataError(fmt::format("record {}: empty id", record));
  if (!seen.insert(doc.id).second) {
    throw DataError(fmt::format("record {}: duplicate id '{}'", record, doc.id));
  }
  if (doc.year < options.min_year || doc.year > options.max_year) {
    throw DataError(fmt::format("record {}: year {} outside [{}, {}] for id '{}'", record, doc.year,
                                options.min_year, options.max_year, doc.id));
  }
  if (trim(doc.body).empty()) {
    throw DataError(fmt::format("record {}: empty body for id '{}'", record, doc.id));
  }
}

Corpus read_json_lines(std::istream& in, const LoadOptions& options) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(fmt::format("record {}: malformed JSON ({})", line_no, e.what()));
    }
    if (!record.is_object()) throw DataError(fmt::format("record {}: expected a JSON object", line_no));

    auto text_field = [&](std::initializer_list<const char*> keys) -> std::string {
      for (const char* key : keys) {
        auto it = record.find(key);
        if (it == record.end()) continue;
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number_integer()) return std::to_string(it->get<long long>());
        throw DataError(fmt::format("record {}: field '{}' must be a string", line_no, key));
      }
      throw DataError(fmt::format("record {}: missing field '{}'", line_no, *keys.begin()));
    };

    Document doc;
    doc.id = text_field({"id"});
    doc.title = text_field({"title"});
    doc.body = text_field({"abstract", "body"});
    doc.journal = text_field({"journal"});
    auto year = record.find("year");
    if (year == record.end()) throw DataError(fmt::format("record {}: missing field 'year'", line_no));
    if (year->is_number_integer()) {
      doc.year = year->get<int>();
    } else if (year->is_string()) {
      doc.year = parse_year(year->get<std::string>(), line_no);
    } else {
      throw DataError(fmt::format("record {}: year must be an integer", line_no));
    }
    check_document(doc, options, line_no, seen);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus read_delimited_corpus(std::istream& in, const LoadOptions& options) {
  const auto records = read_delimited(in, options.delimiter);
  if (records.empty()) throw DataError("delimited corpus has no header row");

  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < records[0].fields.size(); ++c) {
    column[to_lower_utf8(trim(records[0].fields[c]))] = c;
  }
  auto require = [&](std::initializer_list<const char*> names) {
    for (const char* name : names) {
      if (auto it = column.find(name); it != column.end()) return it->second;
    }
    throw DataError(fmt::format("header row lacks required column '{}'", *names.begin()));
  };
  const std::size_t id_col = require({"id"});
  const std::size_t title_col = require({"title"});
  const std::size_t body_col = require({"abstract", "body"});
  const std::size_t journal_col = require({"journal"});
  const std::size_t year_col = require({"year"});
  const std::size_t width = records[0].fields.size();

  Corpus corpus;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      throw DataError(fmt::format("record at line {}: expected {} fields, found {}", rec.line, width,
                                  rec.fields.size()));
    }
    Document doc;
    doc.id = std::string(trim(rec.fields[id_col]));
    doc.title = rec.fields[title_col];
    doc.body = rec.fields[body_col];
    doc.journal = std::string(trim(rec.fields[journal_col]));
    doc.year = parse_year(rec.fields[year_col], rec.line);
    check_document(doc, options, rec.line, seen);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

// --- UTF-8 ---------------------------------------------------------------

// Decodes one code point; invalid bytes decode as U+FFFD and advance by one.
char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> int {
    if (pos + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(k);
    if (c < 0) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | char32_t(c);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
}

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

// Letters: ASCII, Latin-1/Extended, Greek, Cyrillic, and any code point
// outside the punctuation, symbol and whitespace blocks.
bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp == 0xFFFD) return false;
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows, math
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
  return true;
}

char32_t lower_code_point(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E && cp % 2 == 1) return cp + 1;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

bool all_digits(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

void TokenizationRules::validate() const {
  if (min_doc_count < 1) throw ConfigError("min_doc_count must be >= 1");
  if (min_total_count < 1) throw ConfigError("min_total_count must be >= 1");
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return read_corpus(in, options);
}

Corpus read_corpus(std::istream& in, const LoadOptions& options) {
  return options.format == CorpusFormat::json_lines ? read_json_lines(in, options)
                                                    : read_delimited_corpus(in, options);
}

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_code_point(text, pos);
    if (cp == 0xFFFD && pos - start == 1) {
      out.push_back(text[start]);
      continue;
    }
    append_utf8(out, lower_code_point(cp));
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view text, bool lowercase) {
  std::vector<std::string> tokens;
  std::string current;
  bool pending_hyphen = false;

  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
    pending_hyphen = false;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = next_code_point(text, pos);
    if (is_letter(cp) || is_digit(cp)) {
      if (pending_hyphen) current.push_back('-');
      pending_hyphen = false;
      append_utf8(current, lowercase ? lower_code_point(cp) : cp);
    } else if (cp == '-' && !current.empty() && !pending_hyphen) {
      pending_hyphen = true;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Corpus tokenize(Corpus corpus, const TokenizationRules& rules) {
  rules.validate();
  std::set<std::string> stop;
  for (const auto& w : rules.stopwords) stop.insert(rules.lowercase ? to_lower_utf8(w) : w);

  corpus.tokens.assign(corpus.documents.size(), {});
  corpus.token_total = 0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    auto raw = split_tokens(corpus.documents[d].body, rules.lowercase);
    auto& kept = corpus.tokens[d];
    kept.reserve(raw.size());
    for (auto& tok : raw) {
      if (stop.count(tok)) continue;
      if (rules.drop_numeric && all_digits(tok)) continue;
      kept.push_back(std::move(tok));
    }
    corpus.token_total += static_cast<std::int64_t>(kept.size());
  }
  corpus.tokenized = true;
  return corpus;
}

Vocabulary count_words(const Corpus& corpus) {
  if (!corpus.tokenized) throw DataError("corpus must be tokenized before counting words");
  std::map<std::string, VocabularyEntry> counts;
  for (const auto& doc_tokens : corpus.tokens) {
    std::unordered_map<std::string_view, std::int64_t> local;
    for (const auto& tok : doc_tokens) ++local[tok];
    for (const auto& [word, n] : local) {
      auto& entry = counts[std::string(word)];
      entry.doc_count += 1;
      entry.total_count += n;
    }
  }
  Vocabulary vocab;
  vocab.entries.reserve(counts.size());
  for (auto& [word, entry] : counts) {
    entry.word = word;
    vocab.entries.push_back(std::move(entry));
  }
  return vocab;
}

Vocabulary build_vocabulary(const Corpus& corpus, const TokenizationRules& rules) {
  rules.validate();
  Vocabulary all = count_words(corpus);
  Vocabulary kept;
  for (auto& e : all.entries) {
    const bool docs_ok = e.doc_count >= rules.min_doc_count;
    const bool total_ok = e.total_count >= rules.min_total_count;
    const bool keep = rules.filter_rule == FilterRule::require_both ? (docs_ok && total_ok) : (docs_ok || total_ok);
    if (keep && !rules.stopwords.count(e.word)) kept.entries.push_back(std::move(e));
  }
  if (kept.entries.empty()) {
    throw DataError(fmt::format("vocabulary is empty after filtering (min_doc_count={}, min_total_count={})",
                                rules.min_doc_count, rules.min_total_count));
  }
  return kept;
}

std::set<std::string> default_stopwords() {
  return {
      // articles and determiners
      "a", "an", "the", "this", "that", "these", "those", "each", "every", "some", "any", "no",
      // prepositions
      "about", "above", "across", "after", "against", "along", "among", "around", "at", "before", "behind",
      "below", "beneath", "beside", "between", "beyond", "by", "despite", "down", "during", "except", "for",
      "from", "in", "inside", "into", "near", "of", "off", "on", "onto", "out", "outside", "over", "per",
      "since", "through", "throughout", "to", "toward", "towards", "under", "until", "up", "upon", "versus",
      "via", "with", "within", "without",
      // conjunctions
      "and", "but", "or", "nor", "so", "yet", "although", "because", "if", "unless", "whereas", "whether",
      "while", "than", "as", "both", "either", "neither",
      // pronouns
      "i", "me", "my", "mine", "we", "us", "our", "ours", "you", "your", "yours", "he", "him", "his", "she",
      "her", "hers", "it", "its", "they", "them", "their", "theirs", "who", "whom", "whose", "which", "what",
      "itself", "themselves", "ourselves",
      // auxiliaries
      "is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does", "did",
  };
}

std::set<std::string> load_stopwords(const std::filesystem::path& path, bool lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open stopword file " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    words.insert(lowercase ? to_lower_utf8(view) : std::string(view));
  }
  return words;
}

}  // namespace chronolex
