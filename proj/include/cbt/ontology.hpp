#ifndef CBT_ONTOLOGY_HPP
#define CBT_ONTOLOGY_HPP

// Two-level demographic term hierarchy and hierarchical generalization of
// records and corpora.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cbt/corpus.hpp"
#include "cbt/error.hpp"
#include "cbt/label.hpp"
#include "cbt/text.hpp"

namespace cbt {

struct OntologyEntry {
  std::string term;
  Category category = Category::Gender;
  std::string level1;
  std::string level2;

  bool operator==(const OntologyEntry&) const = default;
};

enum class GeneralizationLevel { L0 = 0, L1 = 1, L2 = 2 };

inline int to_int(GeneralizationLevel level) { return static_cast<int>(level); }

/// Leftmost-longest whole-word matcher over a fixed set of keys. Keys are
/// bucketed by their first word so each word start probes only plausible
/// candidates.
class TermMatcher {
 public:
  struct Match {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t payload = 0;
  };

  void add(std::string_view key, std::size_t payload) {
    const std::string folded = ascii_fold(key);
    const std::string head = first_word(folded);
    if (head.empty()) return;
    auto& bucket = buckets_[head];
    bucket.push_back({folded, payload});
    std::stable_sort(bucket.begin(), bucket.end(), [](const Key& a, const Key& b) {
      return a.text.size() > b.text.size();
    });
  }

  std::vector<Match> find(std::string_view text) const {
    std::vector<Match> matches;
    std::size_t pos = 0;
    while (pos < text.size()) {
      if (!is_word_byte(static_cast<unsigned char>(text[pos])) ||
          !is_boundary_before(text, pos)) {
        ++pos;
        continue;
      }
      std::size_t word_end = pos;
      while (word_end < text.size() && is_word_byte(static_cast<unsigned char>(text[word_end])))
        ++word_end;
      auto bucket = buckets_.find(ascii_fold(text.substr(pos, word_end - pos)));
      bool matched = false;
      if (bucket != buckets_.end()) {
        for (const auto& key : bucket->second) {
          if (equals_fold_at(text, pos, key.text) &&
              is_boundary_after(text, pos + key.text.size())) {
            matches.push_back({pos, pos + key.text.size(), key.payload});
            pos += key.text.size();
            matched = true;
            break;
          }
        }
      }
      if (!matched) pos = word_end;
    }
    return matches;
  }

 private:
  struct Key {
    std::string text;
    std::size_t payload;
  };

  static std::string first_word(std::string_view s) {
    std::size_t end = 0;
    while (end < s.size() && is_word_byte(static_cast<unsigned char>(s[end]))) ++end;
    return std::string(s.substr(0, end));
  }

  std::unordered_map<std::string, std::vector<Key>> buckets_;
};

struct TermMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  const OntologyEntry* entry = nullptr;
};

class TermOntology {
 public:
  TermOntology() = default;

  /// Adds one entry, enforcing the single-mapping and level-1 closure
  /// invariants. Re-adding an identical (case-insensitive) row is a no-op.
  void add(OntologyEntry entry) {
    const std::string key = ascii_fold(entry.term);
    const std::string l1 = ascii_fold(entry.level1);
    const std::string l2 = ascii_fold(entry.level2);
    if (auto it = by_term_.find(key); it != by_term_.end()) {
      const auto& existing = entries_[it->second];
      if (ascii_fold(existing.level1) != l1 || ascii_fold(existing.level2) != l2 ||
          existing.category != entry.category)
        throw Error(ErrorCode::ConflictingMapping, entry.term);
      return;
    }
    if (auto it = level1_.find(l1); it != level1_.end()) {
      if (ascii_fold(it->second.level2) != l2)
        throw Error(ErrorCode::UnresolvableLevel1, entry.level1);
    }
    check_cross_levels(key, l1, l2, entry);
    by_term_.emplace(key, entries_.size());
    level1_.try_emplace(l1, Level1Info{entry.level1, entry.level2, entry.category});
    level2_.try_emplace(l2, entry.level2);
    entries_.push_back(std::move(entry));
    rebuild_matchers();
  }

  const std::vector<OntologyEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const OntologyEntry* entry(std::string_view term) const {
    auto it = by_term_.find(ascii_fold(term));
    return it == by_term_.end() ? nullptr : &entries_[it->second];
  }

  bool is_level1(std::string_view term) const { return level1_.contains(ascii_fold(term)); }
  bool is_level2(std::string_view term) const { return level2_.contains(ascii_fold(term)); }
  bool knows(std::string_view term) const {
    return entry(term) != nullptr || is_level1(term) || is_level2(term);
  }

  /// Level-1 term -> level-2 term.
  std::optional<std::string> level2_of_level1(std::string_view level1) const {
    auto it = level1_.find(ascii_fold(level1));
    if (it == level1_.end()) return std::nullopt;
    return it->second.level2;
  }

  /// Target of `term` at `level`. Level-1 terms are fixed points of L1 and
  /// level-2 terms are fixed points of every level.
  std::optional<std::string> resolve(std::string_view term, GeneralizationLevel level) const {
    if (const auto* e = entry(term)) {
      switch (level) {
        case GeneralizationLevel::L0: return e->term;
        case GeneralizationLevel::L1: return e->level1;
        case GeneralizationLevel::L2: return e->level2;
      }
    }
    if (auto it = level1_.find(ascii_fold(term)); it != level1_.end())
      return level == GeneralizationLevel::L2 ? it->second.level2 : it->second.display;
    if (auto it = level2_.find(ascii_fold(term)); it != level2_.end()) return it->second;
    return std::nullopt;
  }

  /// Group used for polarization aggregation: the level-1 term.
  std::optional<std::string> group_of(std::string_view term) const {
    if (const auto* e = entry(term)) return e->level1;
    if (auto it = level1_.find(ascii_fold(term)); it != level1_.end()) return it->second.display;
    return std::nullopt;
  }

  std::optional<Category> category_of(std::string_view term) const {
    if (const auto* e = entry(term)) return e->category;
    if (auto it = level1_.find(ascii_fold(term)); it != level1_.end()) return it->second.category;
    return std::nullopt;
  }

  /// The hierarchy shifted down one level: level-1 terms become level-0
  /// entries mapping to their level-2 term.
  TermOntology level1_as_base() const {
    TermOntology shifted;
    for (const auto& e : entries_) {
      const auto& info = level1_.at(ascii_fold(e.level1));
      shifted.add({info.display, info.category, info.level2, info.level2});
    }
    return shifted;
  }

  /// Matcher over level-0 terms; payload indexes entries().
  const TermMatcher& base_matcher() const { return base_matcher_; }

  /// Matcher over level-0 and level-1 terms; payload is the level-2 target
  /// index into level2_targets().
  const TermMatcher& upper_matcher() const { return upper_matcher_; }
  const std::vector<std::string>& level2_targets() const { return upper_targets_; }

 private:
  struct Level1Info {
    std::string display;
    std::string level2;
    Category category;
  };

  void check_cross_levels(const std::string& key, const std::string& l1, const std::string& l2,
                          const OntologyEntry& entry) const {
    // A level-0 term that is also a level-1 term must generalize to the same
    // level-2 term either way.
    if (auto it = level1_.find(key); it != level1_.end() && ascii_fold(it->second.level2) != l2)
      throw Error(ErrorCode::UnresolvableLevel1, entry.term);
    if (auto it = by_term_.find(l1); it != by_term_.end() &&
                                     ascii_fold(entries_[it->second].level2) != l2)
      throw Error(ErrorCode::UnresolvableLevel1, entry.level1);
    // Level-2 terms are fixed points.
    if (auto it = by_term_.find(l2); it != by_term_.end() &&
                                     ascii_fold(entries_[it->second].level2) != l2)
      throw Error(ErrorCode::UnresolvableLevel1, entry.level2);
    if (auto it = level1_.find(l2); it != level1_.end() && ascii_fold(it->second.level2) != l2)
      throw Error(ErrorCode::UnresolvableLevel1, entry.level2);
    if (key == l2 && l1 != l2) throw Error(ErrorCode::UnresolvableLevel1, entry.term);
    if (level2_.contains(key) && l2 != key) throw Error(ErrorCode::UnresolvableLevel1, entry.term);
    if (level2_.contains(l1) && l2 != l1) throw Error(ErrorCode::UnresolvableLevel1, entry.level1);
  }

  void rebuild_matchers() {
    base_matcher_ = TermMatcher{};
    upper_matcher_ = TermMatcher{};
    upper_targets_.clear();
    std::map<std::string, std::size_t> target_index;
    auto target = [&](const std::string& level2) {
      auto [it, inserted] = target_index.try_emplace(ascii_fold(level2), upper_targets_.size());
      if (inserted) upper_targets_.push_back(level2);
      return it->second;
    };
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      base_matcher_.add(entries_[i].term, i);
      upper_matcher_.add(entries_[i].term, target(entries_[i].level2));
      seen[ascii_fold(entries_[i].term)] = true;
    }
    for (const auto& [key, info] : level1_) {
      if (seen.contains(key)) continue;
      upper_matcher_.add(info.display, target(info.level2));
    }
  }

  std::vector<OntologyEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_term_;
  std::map<std::string, Level1Info> level1_;
  std::map<std::string, std::string> level2_;
  TermMatcher base_matcher_;
  TermMatcher upper_matcher_;
  std::vector<std::string> upper_targets_;
};

namespace ontology_detail {

inline bool well_formed_term(std::string_view s) {
  return !s.empty() && is_word_byte(static_cast<unsigned char>(s.front())) &&
         is_word_byte(static_cast<unsigned char>(s.back()));
}

}  // namespace ontology_detail

/// Reads the ontology TSV ("term\tcategory\tlevel1\tlevel2"). Lines starting
/// with '#' and blank lines are ignored; the header line is optional.
inline TermOntology load_ontology(std::istream& in) {
  TermOntology ontology;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (first_row) {
      first_row = false;
      if (fields.size() == 4 && fields[0] == "term" && fields[1] == "category") continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorCode::MalformedRow, where);
    for (auto& f : fields) f = nfc(trim(f));
    auto category = try_parse_category(ascii_fold(fields[1]));
    if (!category) throw Error(ErrorCode::MalformedRow, where + ": category " + fields[1]);
    if (!ontology_detail::well_formed_term(fields[0]) ||
        !ontology_detail::well_formed_term(fields[2]) ||
        !ontology_detail::well_formed_term(fields[3]))
      throw Error(ErrorCode::MalformedRow, where);
    ontology.add({fields[0], *category, fields[2], fields[3]});
  }
  return ontology;
}

inline TermOntology load_ontology(std::string_view content) {
  std::istringstream in{std::string(content)};
  return load_ontology(in);
}

/// All non-overlapping, leftmost-longest, whole-word matches of level-0
/// terms. Spans are byte offsets into nfc(text).
inline std::vector<TermMatch> find_terms(std::string_view text, const TermOntology& ontology) {
  const std::string normalized = nfc(text);
  std::vector<TermMatch> out;
  for (const auto& m : ontology.base_matcher().find(normalized))
    out.push_back({m.begin, m.end, &ontology.entries()[m.payload]});
  return out;
}

namespace ontology_detail {

inline bool is_text_initial(std::string_view text, std::size_t pos) {
  for (std::size_t i = 0; i < pos; ++i)
    if (is_word_byte(static_cast<unsigned char>(text[i]))) return false;
  return true;
}

/// Rewrites every matched span of `text` at `level`; the first letter of
/// each replacement is upper-cased iff the original span was capitalized or
/// starts the text.
inline std::string rewrite(std::string_view text, const TermOntology& ontology,
                           GeneralizationLevel level) {
  const bool upper = level == GeneralizationLevel::L2;
  const auto matches = upper ? ontology.upper_matcher().find(text)
                             : ontology.base_matcher().find(text);
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& m : matches) {
    out.append(text.substr(cursor, m.begin - cursor));
    const std::string& target = upper ? ontology.level2_targets()[m.payload]
                                      : ontology.entries()[m.payload].level1;
    const bool capital =
        starts_upper(text.substr(m.begin, m.end - m.begin)) || is_text_initial(text, m.begin);
    out.append(with_first_case(target, capital));
    cursor = m.end;
  }
  out.append(text.substr(cursor));
  return out;
}

}  // namespace ontology_detail

/// Replaces demographic terms by their level-1 (L1) or level-2 (L2)
/// generalization. Labels are untouched; L0 is the identity.
inline SentenceRecord generalize(const SentenceRecord& record, const TermOntology& ontology,
                                 GeneralizationLevel level) {
  if (level == GeneralizationLevel::L0) return record;
  auto resolved = ontology.resolve(record.term, level);
  if (!resolved) throw Error(ErrorCode::TermUnmapped, record.term);

  SentenceRecord out = record;
  out.text = ontology_detail::rewrite(record.text, ontology, level);
  out.subject = ontology_detail::rewrite(record.subject, ontology, level);
  out.predicate = ontology_detail::rewrite(record.predicate, ontology, level);
  out.object = ontology_detail::rewrite(record.object, ontology, level);
  out.term = with_first_case(*resolved, starts_upper(record.term));
  out.provenance = GeneralizedSource{to_int(level)};
  return out;
}

struct GeneralizeResult {
  Corpus corpus;
  std::size_t unmapped = 0;
};

/// Record-wise generalize. Records with unmapped terms pass through unchanged
/// and are counted.
inline GeneralizeResult generalize_corpus(const Corpus& corpus, const TermOntology& ontology,
                                          GeneralizationLevel level) {
  GeneralizeResult result;
  result.corpus.name = corpus.name;
  result.corpus.records.reserve(corpus.size());
  for (const auto& r : corpus.records) {
    if (level != GeneralizationLevel::L0 && !ontology.knows(r.term)) {
      ++result.unmapped;
      result.corpus.records.push_back(r);
      continue;
    }
    result.corpus.records.push_back(generalize(r, ontology, level));
  }
  return result;
}

}  // namespace cbt

#endif  // CBT_ONTOLOGY_HPP
