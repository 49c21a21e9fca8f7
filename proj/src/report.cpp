#include "chronolex/report.hpp"

#include <algorithm>
#include <fstream>

#include "chronolex/csv.hpp"
#include "chronolex/error.hpp"

namespace chronolex {

CorpusSummary summarize(const Corpus& corpus, const Vocabulary& vocab) {
  if (!corpus.tokenized) throw DataError("corpus must be tokenized before summarizing");
  CorpusSummary s;
  s.documents = corpus.documents.size();
  std::map<std::string, std::size_t> journals;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& doc = corpus.documents[d];
    ++s.documents_per_year[doc.year];
    ++journals[doc.journal];
    if (corpus.tokens[d].empty()) s.empty_documents.push_back(doc.id);
  }
  s.documents_per_journal.assign(journals.begin(), journals.end());
  std::stable_sort(s.documents_per_journal.begin(), s.documents_per_journal.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  s.token_total = corpus.token_total;
  s.mean_tokens = s.documents > 0 ? double(s.token_total) / double(s.documents) : 0.0;
  s.distinct_words = count_words(corpus).size();
  s.vocabulary_size = vocab.size();
  return s;
}

void write_summary_csv(const CorpusSummary& summary, const std::filesystem::path& dir) {
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("summary.csv");
    CsvWriter w(out);
    w.row({"key", "value"});
    w.field("documents").field(summary.documents).end_row();
    w.field("tokens").field(static_cast<long long>(summary.token_total)).end_row();
    w.field("mean_tokens_per_document").field(summary.mean_tokens).end_row();
    w.field("distinct_words").field(summary.distinct_words).end_row();
    w.field("vocabulary_size").field(summary.vocabulary_size).end_row();
    w.field("empty_documents").field(summary.empty_documents.size()).end_row();
    w.field("years").field(summary.documents_per_year.size()).end_row();
    w.field("journals").field(summary.documents_per_journal.size()).end_row();
  }
  {
    auto out = open("summary_years.csv");
    CsvWriter w(out);
    w.row({"year", "documents"});
    for (const auto& [year, n] : summary.documents_per_year) w.field(year).field(n).end_row();
  }
  auto out = open("summary_journals.csv");
  CsvWriter w(out);
  w.row({"journal", "documents"});
  for (const auto& [journal, n] : summary.documents_per_journal) w.field(std::string_view(journal)).field(n).end_row();
}

}  // namespace chronolex
