#ifndef CBT_TESTS_ORACLES_HPP
#define CBT_TESTS_ORACLES_HPP

// Deliberately naive reference computations used to cross-check the library.

#include <regex>
#include <string>
#include <vector>

#include "cbt/cbt.hpp"

namespace cbt::oracle {

/// Fleiss' kappa from explicit rater-pair enumeration: observed agreement is
/// the share of agreeing ordered pairs of distinct raters within an item;
/// chance agreement is the share of agreeing ordered pairs drawn with
/// replacement from all ratings pooled.
inline double kappa_by_pairs(const std::vector<std::vector<int>>& matrix) {
  double observed = 0.0;
  std::vector<int> pooled;
  for (const auto& row : matrix) {
    std::vector<int> ratings;
    for (std::size_t label = 0; label < row.size(); ++label)
      for (int k = 0; k < row[label]; ++k) ratings.push_back(static_cast<int>(label));
    long agree = 0, pairs = 0;
    for (std::size_t a = 0; a < ratings.size(); ++a)
      for (std::size_t b = 0; b < ratings.size(); ++b) {
        if (a == b) continue;
        ++pairs;
        agree += ratings[a] == ratings[b];
      }
    observed += static_cast<double>(agree) / static_cast<double>(pairs);
    pooled.insert(pooled.end(), ratings.begin(), ratings.end());
  }
  observed /= static_cast<double>(matrix.size());
  long agree = 0, pairs = 0;
  for (int a : pooled)
    for (int b : pooled) {
      ++pairs;
      agree += a == b;
    }
  const double chance = static_cast<double>(agree) / static_cast<double>(pairs);
  if (agree == pairs) return 1.0;
  return (observed - chance) / (1.0 - chance);
}

inline std::string regex_escape(const std::string& s) {
  static const std::string special = R"(.^$|?*+()[]{}\)";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

/// Masks every whole-word, case-insensitive occurrence of `term` (ASCII text).
inline std::string mask_with_regex(const std::string& text, const std::string& term) {
  const std::regex re("(^|[^A-Za-z0-9])" + regex_escape(term) + "(?=[^A-Za-z0-9]|$)",
                      std::regex::ECMAScript | std::regex::icase);
  return std::regex_replace(text, re, "$1[MASK]");
}

inline Label argmax_of(const Predictor& p, const std::string& text) {
  const std::vector<std::string> one{text};
  const auto d = p.predict_batch(one).front();
  Label best = Label::Negative;
  for (Label l : kAllLabels)
    if (d[l] > d[best]) best = l;
  return best;
}

/// Materializes every (masked, unmasked) pair for records annotated with
/// `term` and counts direction changes one sentence at a time.
inline TermPolarization polarization_by_enumeration(const Predictor& predictor,
                                                    const Corpus& corpus,
                                                    const std::string& term) {
  TermPolarization out;
  out.term = term;
  std::string folded_term;
  for (char c : term) folded_term.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const auto& r : corpus.records) {
    std::string folded;
    for (char c : r.term) folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (folded != folded_term) continue;
    const Label unmasked = argmax_of(predictor, r.text);
    const Label masked = argmax_of(predictor, mask_with_regex(r.text, r.term));
    ++out.n_total;
    if (static_cast<int>(unmasked) > static_cast<int>(masked)) ++out.n_changed_positive;
    if (static_cast<int>(unmasked) < static_cast<int>(masked)) ++out.n_changed_negative;
  }
  if (out.n_total > 0)
    out.p_signed = (static_cast<double>(out.n_changed_positive) -
                    static_cast<double>(out.n_changed_negative)) /
                   static_cast<double>(out.n_total);
  return out;
}

}  // namespace cbt::oracle

#endif
