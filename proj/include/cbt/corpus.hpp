#ifndef CBT_CORPUS_HPP
#define CBT_CORPUS_HPP

// Labeled commonsense corpus: JSONL ingestion and serialization, gold-label
// aggregation, Fleiss' kappa, stratified splitting and category statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cbt/error.hpp"
#include "cbt/label.hpp"
#include "cbt/random.hpp"
#include "cbt/text.hpp"

namespace cbt {

struct OriginalSource {
  bool operator==(const OriginalSource&) const = default;
};

struct GeneralizedSource {
  int level = 0;
  bool operator==(const GeneralizedSource&) const = default;
};

struct AugmentedSource {
  std::string source_id;
  std::string synonym;
  std::string provider;
  bool operator==(const AugmentedSource&) const = default;
};

using Provenance = std::variant<OriginalSource, GeneralizedSource, AugmentedSource>;

inline bool is_original(const Provenance& p) {
  return std::holds_alternative<OriginalSource>(p);
}

struct SentenceRecord {
  std::string id;
  std::string subject;
  std::string predicate;
  std::string object;
  std::string text;
  Category category = Category::Gender;
  std::string term;
  std::vector<Label> annotator_labels;
  Label gold = Label::Neutral;
  Provenance provenance;

  bool operator==(const SentenceRecord&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<SentenceRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  bool operator==(const Corpus&) const = default;
};

inline std::string render_tuple(std::string_view subject, std::string_view predicate,
                                std::string_view object) {
  std::string out;
  out.reserve(subject.size() + predicate.size() + object.size() + 2);
  out.append(subject).append(" ").append(predicate).append(" ").append(object);
  return out;
}

/// Strict majority; any tie resolves to Neutral. In a two-way tie Neutral is
/// either one of the tied labels (and the nearer one) or sits between them.
inline Label majority_gold(const std::vector<Label>& labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptyLabelList, "no annotator labels");
  std::array<std::size_t, kNumLabels> counts{};
  for (Label l : labels) ++counts[index_of(l)];
  const std::size_t best = *std::max_element(counts.begin(), counts.end());
  const auto winners = std::count(counts.begin(), counts.end(), best);
  if (winners > 1) return Label::Neutral;
  for (Label l : kAllLabels)
    if (counts[index_of(l)] == best) return l;
  return Label::Neutral;
}

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::ordered_json provenance_to_json(const Provenance& p) {
  nlohmann::ordered_json j;
  if (std::holds_alternative<OriginalSource>(p)) {
    j["kind"] = "original";
  } else if (const auto* g = std::get_if<GeneralizedSource>(&p)) {
    j["kind"] = "generalized";
    j["level"] = g->level;
  } else {
    const auto& a = std::get<AugmentedSource>(p);
    j["kind"] = "augmented";
    j["source_id"] = a.source_id;
    j["synonym"] = a.synonym;
    j["provider"] = a.provider;
  }
  return j;
}

inline nlohmann::ordered_json record_to_json(const SentenceRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["subject"] = r.subject;
  j["predicate"] = r.predicate;
  j["object"] = r.object;
  j["text"] = r.text;
  j["category"] = to_string(r.category);
  j["term"] = r.term;
  auto labels = nlohmann::ordered_json::array();
  for (Label l : r.annotator_labels) labels.push_back(to_string(l));
  j["annotator_labels"] = std::move(labels);
  j["gold"] = to_string(r.gold);
  if (!is_original(r.provenance)) j["provenance"] = provenance_to_json(r.provenance);
  return j;
}

namespace corpus_detail {

inline std::string where(std::size_t line_no) {
  return "line " + std::to_string(line_no);
}

inline std::string required_string(const nlohmann::json& j, const char* field,
                                   std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null())
    throw Error(ErrorCode::MissingField, where(line_no) + ": " + field);
  if (!it->is_string())
    throw Error(ErrorCode::MalformedLine,
                where(line_no) + ": field '" + field + "' is not a string");
  return nfc(it->get<std::string>());
}

inline Label label_value(const nlohmann::json& v, std::size_t line_no) {
  if (!v.is_string())
    throw Error(ErrorCode::BadLabel, where(line_no) + ": " + v.dump());
  auto label = try_parse_label(v.get<std::string>());
  if (!label) throw Error(ErrorCode::BadLabel, where(line_no) + ": " + v.get<std::string>());
  return *label;
}

inline Provenance provenance_from_json(const nlohmann::json& j, std::size_t line_no) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorCode::MalformedLine, where(line_no) + ": bad provenance");
  const auto kind = j["kind"].get<std::string>();
  if (kind == "original") return OriginalSource{};
  if (kind == "generalized") {
    if (!j.contains("level") || !j["level"].is_number_integer())
      throw Error(ErrorCode::MalformedLine, where(line_no) + ": provenance level");
    return GeneralizedSource{j["level"].get<int>()};
  }
  if (kind == "augmented") {
    return AugmentedSource{required_string(j, "source_id", line_no),
                           required_string(j, "synonym", line_no),
                           required_string(j, "provider", line_no)};
  }
  throw Error(ErrorCode::MalformedLine, where(line_no) + ": provenance kind " + kind);
}

}  // namespace corpus_detail

/// Checks the per-record invariants that do not depend on the rest of the
/// corpus: term occurs in text, labels present, gold agrees with majority.
inline void validate_record(const SentenceRecord& r) {
  if (r.annotator_labels.empty()) throw Error(ErrorCode::EmptyLabelList, r.id);
  if (!contains_whole_word(r.text, r.term)) throw Error(ErrorCode::TermNotInText, r.id);
  if (r.gold != majority_gold(r.annotator_labels))
    throw Error(ErrorCode::GoldMismatch, r.id);
}

/// Parses one JSONL line. String fields are NFC-normalized on ingestion.
inline SentenceRecord record_from_json_line(std::string_view line, std::size_t line_no) {
  using corpus_detail::required_string;
  using corpus_detail::where;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::MalformedLine, where(line_no));
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedLine, where(line_no));

  SentenceRecord r;
  r.id = required_string(j, "id", line_no);
  r.subject = required_string(j, "subject", line_no);
  r.predicate = required_string(j, "predicate", line_no);
  r.object = required_string(j, "object", line_no);
  if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
    r.text = required_string(j, "text", line_no);
  } else {
    r.text = render_tuple(r.subject, r.predicate, r.object);
  }
  const auto category = required_string(j, "category", line_no);
  auto parsed_category = try_parse_category(category);
  if (!parsed_category)
    throw Error(ErrorCode::MalformedLine, where(line_no) + ": category " + category);
  r.category = *parsed_category;
  r.term = required_string(j, "term", line_no);

  auto labels = j.find("annotator_labels");
  if (labels == j.end() || labels->is_null())
    throw Error(ErrorCode::MissingField, where(line_no) + ": annotator_labels");
  if (!labels->is_array())
    throw Error(ErrorCode::MalformedLine, where(line_no) + ": annotator_labels");
  for (const auto& v : *labels)
    r.annotator_labels.push_back(corpus_detail::label_value(v, line_no));
  if (r.annotator_labels.empty())
    throw Error(ErrorCode::EmptyLabelList, where(line_no));

  if (auto gold = j.find("gold"); gold != j.end() && !gold->is_null()) {
    r.gold = corpus_detail::label_value(*gold, line_no);
  } else {
    r.gold = majority_gold(r.annotator_labels);
  }
  if (auto prov = j.find("provenance"); prov != j.end() && !prov->is_null())
    r.provenance = corpus_detail::provenance_from_json(*prov, line_no);

  validate_record(r);
  return r;
}

/// Parses a JSONL stream into a corpus. Blank lines are skipped; record
/// order follows line order.
inline Corpus parse_corpus(std::istream& in, std::string name = {}) {
  Corpus corpus;
  corpus.name = std::move(name);
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    SentenceRecord r = record_from_json_line(line, line_no);
    if (!ids.insert(r.id).second) throw Error(ErrorCode::DuplicateId, r.id);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

inline Corpus parse_corpus(std::string_view content, std::string name = {}) {
  std::istringstream in{std::string(content)};
  return parse_corpus(in, std::move(name));
}

inline void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records) out << record_to_json(r).dump() << '\n';
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  serialize_corpus(corpus, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Agreement

/// Rater counts per label for one item.
using RatingRow = std::vector<int>;

/// Fleiss' kappa over an item-by-category count matrix. Every row must sum
/// to `raters_per_item`. When expected agreement is 1 (every rater picked the
/// same single category on every item) kappa is undefined; 1.0 is returned.
inline double fleiss_kappa(const std::vector<RatingRow>& matrix, int raters_per_item) {
  if (matrix.empty()) throw Error(ErrorCode::EmptyInput, "no items");
  if (raters_per_item < 2)
    throw Error(ErrorCode::InconsistentRaterCount, "need at least 2 raters per item");
  const std::size_t k = matrix.front().size();
  const double n = raters_per_item;
  std::vector<double> column_totals(k, 0.0);
  double sum_agreement = 0.0;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto& row = matrix[i];
    if (row.size() != k)
      throw Error(ErrorCode::InconsistentRaterCount, "item " + std::to_string(i) + ": width");
    long total = 0;
    double squares = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] < 0)
        throw Error(ErrorCode::InconsistentRaterCount,
                    "item " + std::to_string(i) + ": negative count");
      total += row[j];
      squares += static_cast<double>(row[j]) * row[j];
      column_totals[j] += row[j];
    }
    if (total != raters_per_item)
      throw Error(ErrorCode::InconsistentRaterCount,
                  "item " + std::to_string(i) + " has " + std::to_string(total) + " ratings");
    sum_agreement += (squares - n) / (n * (n - 1.0));
  }
  const double items = static_cast<double>(matrix.size());
  const double p_bar = sum_agreement / items;
  double p_expected = 0.0;
  for (double t : column_totals) {
    const double p = t / (items * n);
    p_expected += p * p;
  }
  if (p_expected >= 1.0) return 1.0;
  return (p_bar - p_expected) / (1.0 - p_expected);
}

/// Builds the rating matrix from the annotator labels of each record.
inline std::vector<RatingRow> rating_matrix(const Corpus& corpus) {
  std::vector<RatingRow> matrix;
  matrix.reserve(corpus.size());
  for (const auto& r : corpus.records) {
    RatingRow row(kNumLabels, 0);
    for (Label l : r.annotator_labels) ++row[index_of(l)];
    matrix.push_back(std::move(row));
  }
  return matrix;
}

// ---------------------------------------------------------------------------
// Splitting

struct Split {
  Corpus train;
  Corpus test;
};

/// Stratified by category: each category's records are shuffled with one
/// seeded generator and round(fraction * n) of them (clamped to [1, n-1])
/// go to test. Both halves keep the input order.
inline Split split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "test_fraction must be in (0, 1)");
  std::array<std::vector<std::size_t>, kNumCategories> by_category;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    by_category[index_of(corpus.records[i].category)].push_back(i);

  Rng rng(seed);
  std::vector<bool> in_test(corpus.size(), false);
  for (Category c : kAllCategories) {
    auto& members = by_category[index_of(c)];
    if (members.empty()) continue;
    if (members.size() < 2)
      throw Error(ErrorCode::TooSmall, std::string(to_string(c)) + " has fewer than 2 records");
    shuffle(std::span<std::size_t>(members), rng);
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    for (std::size_t i = 0; i < n_test; ++i) in_test[members[i]] = true;
  }

  Split result;
  result.train.name = corpus.name + ":train";
  result.test.name = corpus.name + ":test";
  for (std::size_t i = 0; i < corpus.size(); ++i)
    (in_test[i] ? result.test : result.train).records.push_back(corpus.records[i]);
  return result;
}

// ---------------------------------------------------------------------------
// Statistics

struct CategoryStats {
  std::array<std::size_t, kNumCategories> counts{};
  std::array<double, kNumCategories> shares{};
  std::size_t total = 0;
  std::size_t unique_texts = 0;
};

inline CategoryStats category_stats(const Corpus& corpus) {
  CategoryStats stats;
  std::unordered_set<std::string> texts;
  for (const auto& r : corpus.records) {
    ++stats.counts[index_of(r.category)];
    texts.insert(r.text);
  }
  stats.total = corpus.size();
  stats.unique_texts = texts.size();
  if (stats.total > 0)
    for (std::size_t i = 0; i < kNumCategories; ++i)
      stats.shares[i] = static_cast<double>(stats.counts[i]) / static_cast<double>(stats.total);
  return stats;
}

/// Deduplicates by text. Of each group of identical texts, the first record
/// whose gold equals the majority over the pooled annotator labels of the
/// group is kept. When no record matches, the first record is kept with the
/// pooled labels and their majority as gold.
inline Corpus unique_view(const Corpus& corpus) {
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(corpus.records[i].text);
    if (inserted) order.push_back(corpus.records[i].text);
    it->second.push_back(i);
  }
  Corpus out;
  out.name = corpus.name + ":unique";
  for (const auto& text : order) {
    const auto& members = groups[text];
    std::vector<Label> pooled;
    for (std::size_t i : members)
      pooled.insert(pooled.end(), corpus.records[i].annotator_labels.begin(),
                    corpus.records[i].annotator_labels.end());
    const Label majority = majority_gold(pooled);
    auto keep = std::find_if(members.begin(), members.end(), [&](std::size_t i) {
      return corpus.records[i].gold == majority;
    });
    if (keep != members.end()) {
      out.records.push_back(corpus.records[*keep]);
    } else {
      SentenceRecord r = corpus.records[members.front()];
      r.annotator_labels = std::move(pooled);
      r.gold = majority;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace cbt

#endif  // CBT_CORPUS_HPP
