#include "chronolex/synthetic.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "chronolex/error.hpp"
#include "chronolex/random.hpp"

namespace chronolex {

namespace {

constexpr const char* kJournals[] = {"Lupus", "Arthritis Rheum", "J Rheumatol", "Rheumatology",
                                     "Ann Rheum Dis", "Clin Rheumatol"};
constexpr double kJournalShare[] = {0.30, 0.22, 0.18, 0.12, 0.10, 0.08};
constexpr const char* kStopwords[] = {"the", "and", "of", "in", "with", "for"};

std::size_t draw(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  std::size_t k = 0;
  while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
  return k;
}

std::vector<double> drift_weights(const DriftCorpusOptions& o, double year_position) {
  std::vector<double> cumulative;
  double acc = 0.0;
  for (int w = 0; w < o.drift_words; ++w) {
    const double peak = o.drift_words > 1 ? double(w) * (o.years - 1) / double(o.drift_words - 1) : 0.0;
    const double d = (peak - year_position) / o.drift_width;
    acc += std::exp(-0.5 * d * d);
    cumulative.push_back(acc);
  }
  return cumulative;
}

}  // namespace

std::vector<Document> make_drift_corpus(const DriftCorpusOptions& o) {
  if (o.documents < o.years || o.years < 2 || o.drift_words < 2 || o.min_tokens < 1 || o.max_tokens < o.min_tokens) {
    throw ConfigError("invalid drift corpus options");
  }
  std::mt19937_64 rng(splitmix64(o.seed));
  std::vector<double> journal_cumulative;
  double acc = 0.0;
  for (double s : kJournalShare) journal_cumulative.push_back(acc += s);

  std::vector<Document> docs;
  bool planted = false;
  for (int d = 0; d < o.documents; ++d) {
    const int year_index = d * o.years / o.documents;
    int vocabulary_index = year_index;
    Document doc;
    if (o.plant_early_adopter && !planted && year_index == o.early_year) {
      vocabulary_index = o.early_vocabulary;
      doc.id = kEarlyAdopterId;
      planted = true;
    } else {
      doc.id = fmt::format("D{:04d}", d + 1);
    }
    doc.year = o.first_year + year_index;
    doc.journal = kJournals[draw(rng, journal_cumulative)];
    doc.title = fmt::format("Synthetic abstract {}", d + 1);

    const auto weights = drift_weights(o, double(vocabulary_index));
    const int length = o.min_tokens + static_cast<int>(uniform_below(rng, std::uint64_t(o.max_tokens - o.min_tokens + 1)));
    std::string body;
    for (int t = 0; t < length; ++t) {
      const double u = uniform01(rng);
      std::string word;
      if (u < o.stopword_share) {
        word = kStopwords[uniform_below(rng, std::size(kStopwords))];
      } else if (u < o.stopword_share + o.background_share && o.background_words > 0) {
        word = fmt::format("base{:02d}", uniform_below(rng, std::uint64_t(o.background_words)));
      } else {
        word = fmt::format("term{:02d}", draw(rng, weights));
      }
      if (!body.empty()) body.push_back(' ');
      body += word;
    }
    body.push_back('.');
    doc.body = std::move(body);
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_json_lines(const std::vector<Document>& documents, std::ostream& out) {
  for (const auto& d : documents) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["title"] = d.title;
    j["abstract"] = d.body;
    j["journal"] = d.journal;
    j["year"] = d.year;
    out << j.dump() << '\n';
  }
}

}  // namespace chronolex
