#ifndef CBT_LABEL_HPP
#define CBT_LABEL_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "cbt/error.hpp"

namespace cbt {

/// Polarity label. The enumerator order is the label order used for every
/// direction comparison: Negative < Neutral < Positive.
enum class Label { Negative = 0, Neutral = 1, Positive = 2 };

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::Negative, Label::Neutral, Label::Positive};

constexpr std::size_t index_of(Label label) {
  return static_cast<std::size_t>(label);
}

inline std::string_view to_string(Label label) {
  switch (label) {
    case Label::Negative: return "negative";
    case Label::Neutral: return "neutral";
    case Label::Positive: return "positive";
  }
  return "neutral";
}

inline std::optional<Label> try_parse_label(std::string_view text) {
  if (text == "negative") return Label::Negative;
  if (text == "neutral") return Label::Neutral;
  if (text == "positive") return Label::Positive;
  return std::nullopt;
}

inline Label parse_label(std::string_view text) {
  if (auto label = try_parse_label(text)) return *label;
  throw Error(ErrorCode::BadLabel, std::string(text));
}

enum class Category { Gender = 0, Origin = 1, Profession = 2, Religion = 3 };

inline constexpr std::size_t kNumCategories = 4;
inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::Gender, Category::Origin, Category::Profession, Category::Religion};

constexpr std::size_t index_of(Category category) {
  return static_cast<std::size_t>(category);
}

inline std::string_view to_string(Category category) {
  switch (category) {
    case Category::Gender: return "gender";
    case Category::Origin: return "origin";
    case Category::Profession: return "profession";
    case Category::Religion: return "religion";
  }
  return "gender";
}

inline std::optional<Category> try_parse_category(std::string_view text) {
  if (text == "gender") return Category::Gender;
  if (text == "origin") return Category::Origin;
  if (text == "profession") return Category::Profession;
  if (text == "religion") return Category::Religion;
  return std::nullopt;
}

}  // namespace cbt

#endif  // CBT_LABEL_HPP
