#ifndef CBT_SYNTHETIC_HPP
#define CBT_SYNTHETIC_HPP

// Seeded generator for small labeled corpora with planted term biases. Its
// terms and predicates are covered by data/ontology.tsv and data/thesaurus.tsv.

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "cbt/corpus.hpp"
#include "cbt/label.hpp"
#include "cbt/random.hpp"

namespace cbt::synthetic {

struct TermSpec {
  std::string_view term;
  Category category;
  // When biased, the term is over-represented with `favored`.
  bool biased;
  Label favored;
};

// Category weights follow the shape of a real demographic-term dataset:
// origin and profession dominate, religion is scarce.
inline constexpr std::array<double, kNumCategories> kCategoryWeights = {
    0.15,  // gender
    0.42,  // origin
    0.39,  // profession
    0.04,  // religion
};

inline const std::vector<TermSpec>& terms() {
  using enum Category;
  constexpr auto N = Label::Negative;
  constexpr auto P = Label::Positive;
  constexpr auto U = Label::Neutral;
  static const std::vector<TermSpec> kTerms = {
      {"she", Gender, true, P},        {"he", Gender, true, N},
      {"lady", Gender, false, U},      {"stepmother", Gender, true, N},
      {"girl", Gender, false, U},      {"mother", Gender, true, P},
      {"boy", Gender, true, N},        {"father", Gender, false, U},
      {"brother", Gender, false, U},   {"woman", Gender, false, U},
      {"man", Gender, false, U},

      {"Afghanistan", Origin, true, N}, {"Iraq", Origin, true, N},
      {"Korean", Origin, true, P},      {"China", Origin, false, U},
      {"India", Origin, false, U},      {"Sweden", Origin, true, P},
      {"France", Origin, false, U},     {"Germany", Origin, false, U},
      {"Norway", Origin, true, P},      {"Nigeria", Origin, true, N},
      {"Kenya", Origin, false, U},      {"Egypt", Origin, false, U},
      {"Mexico", Origin, true, N},      {"Canada", Origin, true, P},
      {"Brazil", Origin, false, U},

      {"doctor", Profession, true, P},    {"nurse", Profession, true, P},
      {"surgeon", Profession, false, U},  {"author", Profession, false, U},
      {"artist", Profession, true, P},    {"athlete", Profession, false, U},
      {"engineer", Profession, false, U}, {"scientist", Profession, false, U},
      {"programmer", Profession, true, N}, {"mechanic", Profession, true, N},
      {"welder", Profession, false, U},   {"electrician", Profession, false, U},

      {"Catholic", Religion, true, P},  {"Christian", Religion, false, U},
      {"Sunni", Religion, true, N},     {"jihad", Religion, true, N},
      {"Muslim", Religion, false, U},   {"Hindu", Religion, false, U},
      {"Brahmin", Religion, true, N},
  };
  return kTerms;
}

/// Predicate groups; the first member is the common surface form, the rest
/// are rarer synonyms. Groups 0-4 are negative, 5-9 neutral, 10-14 positive.
inline const std::vector<std::array<std::string_view, 4>>& predicate_groups() {
  static const std::vector<std::array<std::string_view, 4>> kGroups = {
      {"attacks", "assaults", "strikes", "raids"},
      {"robs", "loots", "burgles", "plunders"},
      {"threatens", "menaces", "intimidates", "bullies"},
      {"harms", "hurts", "injures", "wounds"},
      {"deceives", "cheats", "defrauds", "swindles"},
      {"visits", "tours", "frequents", "inspects"},
      {"meets", "encounters", "joins", "sees"},
      {"watches", "observes", "views", "monitors"},
      {"describes", "mentions", "discusses", "notes"},
      {"follows", "trails", "tracks", "accompanies"},
      {"helps", "assists", "aids", "supports"},
      {"protects", "defends", "shields", "guards"},
      {"teaches", "educates", "tutors", "instructs"},
      {"feeds", "nourishes", "sustains", "provisions"},
      {"heals", "cures", "treats", "mends"},
  };
  return kGroups;
}

inline constexpr std::array<std::string_view, 8> kObjects = {
    "children", "neighbors", "families", "students",
    "strangers", "villagers", "tourists", "patients"};

struct Options {
  std::size_t n = 500;
  std::uint64_t seed = 42;
  // Probability that a biased term's sentence is drawn with its favored label.
  double bias_strength = 0.6;
  // Probability that a predicate uses the common surface form.
  double common_predicate = 0.7;
  // Probability that a rater reports the true label.
  double rater_accuracy = 0.85;
  std::size_t raters = 3;
};

namespace detail {

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(uniform_below(rng, items.size()))];
}

inline Category pick_category(Rng& rng) {
  double u = uniform_unit(rng);
  for (Category c : kAllCategories) {
    u -= kCategoryWeights[index_of(c)];
    if (u < 0.0) return c;
  }
  return Category::Profession;
}

inline Label pick_label(Rng& rng) { return kAllLabels[uniform_below(rng, kNumLabels)]; }

}  // namespace detail

inline Corpus generate(const Options& options = {}) {
  Rng rng(options.seed);
  std::array<std::vector<TermSpec>, kNumCategories> by_category;
  for (const auto& t : terms()) by_category[index_of(t.category)].push_back(t);
  const auto& groups = predicate_groups();

  Corpus corpus;
  corpus.name = "synthetic-" + std::to_string(options.n) + "-" + std::to_string(options.seed);
  corpus.records.reserve(options.n);
  for (std::size_t i = 0; i < options.n; ++i) {
    const Category category = detail::pick_category(rng);
    const TermSpec& term = detail::pick(by_category[index_of(category)], rng);
    Label truth = detail::pick_label(rng);
    if (term.biased && uniform_unit(rng) < options.bias_strength) truth = term.favored;

    const std::size_t group = index_of(truth) * 5 + uniform_below(rng, 5);
    std::size_t member = 0;
    if (uniform_unit(rng) >= options.common_predicate) member = 1 + uniform_below(rng, 3);
    const auto object = kObjects[uniform_below(rng, kObjects.size())];

    SentenceRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i + 1);
    r.id = id;
    r.subject = std::string(term.term);
    r.predicate = std::string(groups[group][member]);
    r.object = std::string(object);
    r.text = render_tuple(r.subject, r.predicate, r.object);
    r.category = category;
    r.term = r.subject;
    for (std::size_t k = 0; k < options.raters; ++k) {
      Label seen = truth;
      if (uniform_unit(rng) >= options.rater_accuracy) {
        // One of the two other labels, uniformly.
        const auto offset = 1 + uniform_below(rng, kNumLabels - 1);
        seen = kAllLabels[(index_of(truth) + offset) % kNumLabels];
      }
      r.annotator_labels.push_back(seen);
    }
    r.gold = majority_gold(r.annotator_labels);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace cbt::synthetic

#endif  // CBT_SYNTHETIC_HPP
