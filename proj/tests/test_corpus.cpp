#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace cbt;
using cbt::test::make_record;
using L = Label;

namespace {

const char* kIraqLine =
    R"({"id":"a1","subject":"Iraq","predicate":"causes","object":"war","category":"origin",)"
    R"("term":"Iraq","annotator_labels":["negative","negative","negative"],"gold":"negative"})";

std::string line_with(const std::string& field, const std::string& json_value) {
  auto j = nlohmann::json::parse(kIraqLine);
  if (json_value.empty()) {
    j.erase(field);
  } else {
    j[field] = nlohmann::json::parse(json_value);
  }
  return j.dump();
}

}  // namespace

TEST(ParseCorpus, IraqExample) {
  auto c = parse_corpus(std::string(kIraqLine) + "\n");
  ASSERT_EQ(c.size(), 1u);
  const auto& r = c.records[0];
  EXPECT_EQ(r.text, "Iraq causes war");
  EXPECT_EQ(r.category, Category::Origin);
  EXPECT_EQ(r.gold, L::Negative);
  EXPECT_TRUE(is_original(r.provenance));
}

TEST(ParseCorpus, EmptyStream) {
  EXPECT_TRUE(parse_corpus("").empty());
  EXPECT_TRUE(parse_corpus("\n\n  \n").empty());
}

TEST(ParseCorpus, Errors) {
  EXPECT_CBT_ERROR(parse_corpus(line_with("text", R"("Sweden causes war")")),
                   ErrorCode::TermNotInText);
  EXPECT_CBT_ERROR(parse_corpus("{not json"), ErrorCode::MalformedLine);
  EXPECT_CBT_ERROR(parse_corpus("[1,2]"), ErrorCode::MalformedLine);
  EXPECT_CBT_ERROR(parse_corpus(line_with("predicate", "")), ErrorCode::MissingField);
  EXPECT_CBT_ERROR(parse_corpus(line_with("subject", "42")), ErrorCode::MalformedLine);
  EXPECT_CBT_ERROR(parse_corpus(line_with("annotator_labels", R"(["negative","angry"])")),
                   ErrorCode::BadLabel);
  EXPECT_CBT_ERROR(parse_corpus(line_with("gold", R"("happy")")), ErrorCode::BadLabel);
  EXPECT_CBT_ERROR(parse_corpus(line_with("annotator_labels", "[]")), ErrorCode::EmptyLabelList);
  EXPECT_CBT_ERROR(parse_corpus(line_with("gold", R"("positive")")), ErrorCode::GoldMismatch);
  EXPECT_CBT_ERROR(parse_corpus(line_with("category", R"("weather")")), ErrorCode::MalformedLine);
  EXPECT_CBT_ERROR(parse_corpus(std::string(kIraqLine) + "\n" + kIraqLine),
                   ErrorCode::DuplicateId);
}

TEST(ParseCorpus, ErrorNamesTheLine) {
  const std::string content = std::string(kIraqLine) + "\n\n{oops\n";
  try {
    parse_corpus(content);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseCorpus, GoldDefaultsToMajority) {
  auto c = parse_corpus(line_with("gold", ""));
  EXPECT_EQ(c.records[0].gold, L::Negative);
}

TEST(ParseCorpus, TermMatchIsCaseInsensitive) {
  auto c = parse_corpus(line_with("text", R"("the war in IRAQ")"));
  EXPECT_EQ(c.records[0].text, "the war in IRAQ");
}

TEST(ParseCorpus, NormalizesToNfc) {
  auto j = nlohmann::json::parse(kIraqLine);
  j["subject"] = "Cafe\xCC\x81";
  j["term"] = "Cafe\xCC\x81";
  auto c = parse_corpus(j.dump());
  EXPECT_EQ(c.records[0].subject, "Caf\xC3\xA9");
  EXPECT_EQ(c.records[0].text, "Caf\xC3\xA9 causes war");
}

TEST(Serialize, RoundTripIncludingProvenance) {
  Corpus c;
  c.records.push_back(make_record("x1", "she", "helps", "children", Category::Gender,
                                  {L::Positive, L::Positive, L::Neutral}));
  auto g = make_record("x2", "Woman", "helps", "children", Category::Gender);
  g.provenance = GeneralizedSource{1};
  c.records.push_back(g);
  auto a = make_record("x1~aids", "she", "aids", "children", Category::Gender);
  a.provenance = AugmentedSource{"x1", "aids", "thesaurus"};
  c.records.push_back(a);
  auto back = parse_corpus(serialize_corpus(c));
  EXPECT_EQ(back.records, c.records);
  EXPECT_EQ(serialize_corpus(back), serialize_corpus(c));
}

TEST(Serialize, RoundTripBundledCorpus) {
  const auto text = cbt::test::slurp(cbt::test::data_path("synthetic_500.jsonl"));
  auto c = parse_corpus(text);
  EXPECT_EQ(serialize_corpus(c), text);
  EXPECT_EQ(parse_corpus(serialize_corpus(c)).records, c.records);
}

TEST(MajorityGold, Examples) {
  EXPECT_EQ(majority_gold({L::Negative, L::Negative, L::Positive}), L::Negative);
  EXPECT_EQ(majority_gold({L::Negative, L::Positive, L::Neutral}), L::Neutral);
  EXPECT_EQ(majority_gold({L::Positive}), L::Positive);
  EXPECT_CBT_ERROR(majority_gold({}), ErrorCode::EmptyLabelList);
}

TEST(MajorityGold, TwoWayTiesGoTowardNeutral) {
  EXPECT_EQ(majority_gold({L::Negative, L::Negative, L::Neutral, L::Neutral}), L::Neutral);
  EXPECT_EQ(majority_gold({L::Positive, L::Neutral, L::Positive, L::Neutral}), L::Neutral);
  EXPECT_EQ(majority_gold({L::Negative, L::Positive}), L::Neutral);
}

TEST(MajorityGold, PermutationInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<L> labels(1 + uniform_below(rng, 7));
    for (auto& l : labels) l = kAllLabels[uniform_below(rng, 3)];
    const L expected = majority_gold(labels);
    for (int p = 0; p < 5; ++p) {
      shuffle(std::span<L>(labels), rng);
      EXPECT_EQ(majority_gold(labels), expected);
    }
  }
}

TEST(FleissKappa, Examples) {
  EXPECT_EQ(fleiss_kappa({{0, 0, 3}, {3, 0, 0}}, 3), 1.0);
  EXPECT_NEAR(fleiss_kappa({{1, 0, 2}, {2, 0, 1}}, 3), -1.0 / 3.0, 1e-12);
  // One item, two raters disagreeing: no observed agreement, P̄e = 1/2.
  EXPECT_NEAR(fleiss_kappa({{1, 1, 0}}, 2), -1.0, 1e-12);
  // Everyone picks one label everywhere: returned as 1 by convention.
  EXPECT_EQ(fleiss_kappa({{0, 4, 0}, {0, 4, 0}}, 4), 1.0);
}

TEST(FleissKappa, Errors) {
  EXPECT_CBT_ERROR(fleiss_kappa({}, 3), ErrorCode::EmptyInput);
  EXPECT_CBT_ERROR(fleiss_kappa({{1, 1, 0}}, 3), ErrorCode::InconsistentRaterCount);
  EXPECT_CBT_ERROR(fleiss_kappa({{1, 0, 0}}, 1), ErrorCode::InconsistentRaterCount);
  EXPECT_CBT_ERROR(fleiss_kappa({{1, 1, 1}, {3, 0}}, 3), ErrorCode::InconsistentRaterCount);
}

TEST(FleissKappa, BundledCorpusIsModerate) {
  const double k = fleiss_kappa(rating_matrix(cbt::test::bundled_corpus()), 3);
  EXPECT_GT(k, 0.3);
  EXPECT_LT(k, 0.9);
}

namespace {

Corpus categorized(std::size_t n, std::uint64_t seed) {
  Corpus c;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cat = kAllCategories[i % 4];
    c.records.push_back(make_record("r" + std::to_string(i), "she", "does", "x" + std::to_string(i),
                                    cat, {kAllLabels[uniform_below(rng, 3)]}));
  }
  return c;
}

std::set<std::string> ids(const Corpus& c) {
  std::set<std::string> out;
  for (const auto& r : c.records) out.insert(r.id);
  return out;
}

}  // namespace

TEST(Split, DeterministicAndExhaustive) {
  auto c = categorized(100, 1);
  auto a = split(c, 0.2, 7);
  auto b = split(c, 0.2, 7);
  EXPECT_EQ(a.train.records, b.train.records);
  EXPECT_EQ(a.test.records, b.test.records);
  EXPECT_EQ(a.test.size(), 20u);
  EXPECT_EQ(a.train.size() + a.test.size(), 100u);
  auto all = ids(a.train);
  for (const auto& id : ids(a.test)) EXPECT_TRUE(all.insert(id).second) << id;
  EXPECT_EQ(all, ids(c));
}

TEST(Split, SeedChangesMembership) {
  auto c = categorized(100, 1);
  EXPECT_NE(ids(split(c, 0.2, 7).test), ids(split(c, 0.2, 8).test));
}

TEST(Split, StratifiedPerCategory) {
  auto c = categorized(100, 1);
  auto s = split(c, 0.2, 11);
  for (Category cat : kAllCategories) {
    auto in_test = std::count_if(s.test.records.begin(), s.test.records.end(),
                                 [&](const auto& r) { return r.category == cat; });
    EXPECT_EQ(in_test, 5) << to_string(cat);
  }
}

TEST(Split, Errors) {
  Corpus c;
  c.records.push_back(make_record("a", "she", "x", "y", Category::Gender));
  c.records.push_back(make_record("b", "he", "x", "y", Category::Gender));
  c.records.push_back(make_record("c", "Iraq", "x", "y", Category::Origin));
  EXPECT_CBT_ERROR(split(c, 0.5, 1), ErrorCode::TooSmall);
  EXPECT_CBT_ERROR(split(c, 0.0, 1), ErrorCode::InvalidArgument);
  EXPECT_CBT_ERROR(split(c, 1.0, 1), ErrorCode::InvalidArgument);
}

TEST(CategoryStats, SmallExample) {
  Corpus c;
  c.records.push_back(make_record("a", "she", "x", "y", Category::Gender));
  c.records.push_back(make_record("b", "he", "x", "y", Category::Gender));
  c.records.push_back(make_record("c", "Iraq", "x", "y", Category::Origin));
  auto s = category_stats(c);
  EXPECT_EQ(s.counts[index_of(Category::Gender)], 2u);
  EXPECT_EQ(s.counts[index_of(Category::Origin)], 1u);
  EXPECT_NEAR(s.shares[index_of(Category::Gender)], 0.6667, 1e-4);
  EXPECT_NEAR(s.shares[index_of(Category::Origin)], 0.3333, 1e-4);
  EXPECT_EQ(s.total, 3u);
  EXPECT_EQ(s.unique_texts, 3u);
}

TEST(CategoryStats, Empty) {
  auto s = category_stats(Corpus{});
  EXPECT_EQ(s.total, 0u);
  EXPECT_EQ(s.unique_texts, 0u);
  for (double share : s.shares) EXPECT_EQ(share, 0.0);
}

TEST(CategoryStats, ReferenceDatasetProportions) {
  // Category sizes of the original dataset; texts repeat so that 3227 are unique.
  const std::array<std::pair<Category, std::size_t>, 4> sizes = {{{Category::Origin, 4474},
                                                                  {Category::Religion, 384},
                                                                  {Category::Gender, 1565},
                                                                  {Category::Profession, 4158}}};
  Corpus c;
  std::size_t i = 0;
  for (auto [cat, n] : sizes)
    for (std::size_t j = 0; j < n; ++j, ++i)
      c.records.push_back(make_record("r" + std::to_string(i), "she", "does",
                                      "t" + std::to_string(i % 3227), cat));
  auto s = category_stats(c);
  EXPECT_EQ(s.total, 10581u);
  EXPECT_EQ(s.unique_texts, 3227u);
  const double pct_tol = 0.05;  // published percentages are rounded inconsistently
  EXPECT_NEAR(100 * s.shares[index_of(Category::Origin)], 42.28, pct_tol);
  EXPECT_NEAR(100 * s.shares[index_of(Category::Religion)], 3.6, pct_tol);
  EXPECT_NEAR(100 * s.shares[index_of(Category::Gender)], 14.80, pct_tol);
  EXPECT_NEAR(100 * s.shares[index_of(Category::Profession)], 39.29, pct_tol);
  double sum = 0;
  for (double share : s.shares) sum += share;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(UniqueView, KeepsMajorityRecord) {
  Corpus c;
  c.records.push_back(make_record("a", "she", "helps", "kids", Category::Gender,
                                  {L::Negative, L::Negative, L::Neutral}));
  c.records.push_back(make_record("b", "she", "helps", "kids", Category::Gender,
                                  {L::Positive, L::Positive, L::Positive}));
  c.records.push_back(make_record("c", "she", "helps", "kids", Category::Gender,
                                  {L::Positive, L::Positive, L::Neutral}));
  c.records.push_back(make_record("d", "he", "helps", "kids", Category::Gender));
  auto u = unique_view(c);
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u.records[0].id, "b");
  EXPECT_EQ(u.records[1].id, "d");
}
