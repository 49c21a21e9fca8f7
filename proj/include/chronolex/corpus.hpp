#pragma once

// Corpus ingestion, tokenization and vocabulary filtering.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace chronolex {

struct Document {
  std::string id;
  std::string title;
  std::string body;
  std::string journal;
  int year = 0;
};

enum class CorpusFormat { delimited, json_lines };

struct LoadOptions {
  CorpusFormat format = CorpusFormat::json_lines;
  char delimiter = ',';
  int min_year = 1900;
  int max_year = 2100;
};

/// How the two frequency thresholds combine when deciding to keep a word.
enum class FilterRule {
  require_both,    // keep iff doc_count >= min AND total_count >= min
  require_either,  // keep iff doc_count >= min OR total_count >= min
};

struct TokenizationRules {
  bool lowercase = true;
  bool drop_numeric = false;
  std::set<std::string> stopwords;
  int min_doc_count = 5;
  int min_total_count = 10;
  FilterRule filter_rule = FilterRule::require_both;

  /// Throws ConfigError when a threshold is below 1.
  void validate() const;
};

struct Corpus {
  std::vector<Document> documents;
  /// Per-document token sequences, parallel to documents. Empty until tokenize().
  std::vector<std::vector<std::string>> tokens;
  std::int64_t token_total = 0;
  bool tokenized = false;
};

struct VocabularyEntry {
  std::string word;
  std::int64_t doc_count = 0;
  std::int64_t total_count = 0;
};

struct Vocabulary {
  std::vector<VocabularyEntry> entries;  // sorted by word

  std::size_t size() const { return entries.size(); }
};

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options);
Corpus read_corpus(std::istream& in, const LoadOptions& options);

/// Splits text into maximal runs of letters/digits joined by internal hyphens.
std::vector<std::string> split_tokens(std::string_view text, bool lowercase);

Corpus tokenize(Corpus corpus, const TokenizationRules& rules);

/// All distinct words of a tokenized corpus with their counts, unfiltered.
Vocabulary count_words(const Corpus& corpus);

/// Throws DataError if no word survives the thresholds.
Vocabulary build_vocabulary(const Corpus& corpus, const TokenizationRules& rules);

/// Built-in list: prepositions, conjunctions, pronouns, determiners, demonstratives.
std::set<std::string> default_stopwords();

/// One word per line; '#' starts a comment.
std::set<std::string> load_stopwords(const std::filesystem::path& path, bool lowercase);

/// Lowercase a UTF-8 string (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic).
std::string to_lower_utf8(std::string_view text);

}  // namespace chronolex
