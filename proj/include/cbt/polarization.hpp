#ifndef CBT_POLARIZATION_HPP
#define CBT_POLARIZATION_HPP

// Term polarization: how often a term's presence moves the predicted label
// up or down relative to the same sentence with the term masked.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cbt/classifier.hpp"
#include "cbt/corpus.hpp"
#include "cbt/error.hpp"
#include "cbt/ontology.hpp"
#include "cbt/text.hpp"

namespace cbt {

struct TermPolarization {
  std::string term;
  std::size_t n_total = 0;
  std::size_t n_changed_positive = 0;
  std::size_t n_changed_negative = 0;
  double p_signed = 0.0;

  /// Unsigned polarization, the quantity compared against the threshold.
  double magnitude() const { return std::abs(p_signed); }
  bool operator==(const TermPolarization&) const = default;
};

struct GroupPolarization {
  std::string group;
  Category category = Category::Gender;
  std::size_t n_total = 0;
  double p_signed = 0.0;
  bool operator==(const GroupPolarization&) const = default;
};

struct PolarizationReport {
  std::vector<TermPolarization> terms;
  std::vector<GroupPolarization> groups;
  std::size_t unknown_terms = 0;
};

/// Replaces every whole-word occurrence of the record's term by "[MASK]".
inline SentenceRecord mask_term(const SentenceRecord& record) {
  SentenceRecord out = record;
  if (replace_whole_word(out.text, record.term, kMaskToken) == 0)
    throw Error(ErrorCode::NoOccurrence, record.id + ": " + record.term);
  return out;
}

/// +1 when the unmasked prediction is higher in label order than the masked
/// one, -1 when lower, 0 when equal.
constexpr int change_direction(Label masked, Label unmasked) {
  const int delta = static_cast<int>(unmasked) - static_cast<int>(masked);
  return (delta > 0) - (delta < 0);
}

namespace polarization_detail {

struct Tally {
  std::size_t total = 0;
  std::size_t up = 0;
  std::size_t down = 0;
};

inline TermPolarization finish(std::string term, const Tally& t) {
  TermPolarization p;
  p.term = std::move(term);
  p.n_total = t.total;
  p.n_changed_positive = t.up;
  p.n_changed_negative = t.down;
  p.p_signed = t.total == 0 ? 0.0
                            : (static_cast<double>(t.up) - static_cast<double>(t.down)) /
                                  static_cast<double>(t.total);
  return p;
}

/// Predicts unmasked and masked texts of `records` in one batch and returns
/// the change direction of each record.
inline std::vector<int> directions(const Predictor& predictor,
                                   const std::vector<const SentenceRecord*>& records) {
  std::vector<std::string> texts;
  texts.reserve(records.size() * 2);
  for (const auto* r : records) texts.push_back(r->text);
  for (const auto* r : records) texts.push_back(mask_term(*r).text);
  const auto labels = predict_labels(predictor, texts);
  std::vector<int> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    out[i] = change_direction(labels[records.size() + i], labels[i]);
  return out;
}

inline void add(Tally& t, int direction) {
  ++t.total;
  if (direction > 0) ++t.up;
  if (direction < 0) ++t.down;
}

}  // namespace polarization_detail

/// Polarization of `term` over the records annotated with it (compared
/// case-insensitively).
inline TermPolarization measure_term(const Predictor& predictor, const Corpus& corpus,
                                     std::string_view term) {
  const std::string key = ascii_fold(term);
  std::vector<const SentenceRecord*> members;
  for (const auto& r : corpus.records)
    if (ascii_fold(r.term) == key) members.push_back(&r);
  if (members.empty()) throw Error(ErrorCode::TermNotFound, std::string(term));
  polarization_detail::Tally tally;
  for (int d : polarization_detail::directions(predictor, members))
    polarization_detail::add(tally, d);
  return polarization_detail::finish(std::string(term), tally);
}

/// One entry per distinct annotated term known to the ontology, sorted by
/// case-folded term, plus n_total-weighted aggregation per level-1 group.
/// Unknown terms are skipped and counted.
inline PolarizationReport measure_all(const Predictor& predictor, const Corpus& corpus,
                                      const TermOntology& ontology) {
  PolarizationReport report;
  std::vector<const SentenceRecord*> members;
  std::set<std::string> unknown;
  for (const auto& r : corpus.records) {
    if (ontology.knows(r.term)) {
      members.push_back(&r);
    } else {
      unknown.insert(ascii_fold(r.term));
    }
  }
  report.unknown_terms = unknown.size();
  if (members.empty()) return report;

  const auto dirs = polarization_detail::directions(predictor, members);
  std::map<std::string, polarization_detail::Tally> tallies;
  for (std::size_t i = 0; i < members.size(); ++i)
    polarization_detail::add(tallies[ascii_fold(members[i]->term)], dirs[i]);

  std::map<std::tuple<Category, std::string>, std::tuple<std::string, std::size_t, long>> groups;
  for (const auto& [key, tally] : tallies) {
    auto display = ontology.resolve(key, GeneralizationLevel::L0).value_or(key);
    report.terms.push_back(polarization_detail::finish(display, tally));
    auto group = ontology.group_of(key);
    auto category = ontology.category_of(key);
    if (!group || !category) continue;
    auto& [name, total, net] = groups[{*category, ascii_fold(*group)}];
    name = *group;
    total += tally.total;
    net += static_cast<long>(tally.up) - static_cast<long>(tally.down);
  }
  for (const auto& [key, value] : groups) {
    const auto& [name, total, net] = value;
    report.groups.push_back({name, std::get<0>(key), total,
                             static_cast<double>(net) / static_cast<double>(total)});
  }
  return report;
}

/// Terms whose |p_signed| is strictly greater than tau.
inline std::set<std::string> select_polarized(const std::vector<TermPolarization>& report,
                                              double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be >= 0");
  std::set<std::string> selected;
  for (const auto& t : report)
    if (t.magnitude() > tau) selected.insert(t.term);
  return selected;
}

}  // namespace cbt

#endif  // CBT_POLARIZATION_HPP
