#include <gtest/gtest.h>

#include "support.hpp"

using namespace cbt;

TEST(Synthetic, Deterministic) {
  synthetic::Options o;
  o.n = 300;
  o.seed = 5;
  EXPECT_EQ(serialize_corpus(synthetic::generate(o)), serialize_corpus(synthetic::generate(o)));
  auto other = o;
  other.seed = 6;
  EXPECT_NE(serialize_corpus(synthetic::generate(o)), serialize_corpus(synthetic::generate(other)));
}

TEST(Synthetic, BundledFileMatchesGenerator) {
  synthetic::Options o;
  o.n = 500;
  o.seed = 42;
  EXPECT_EQ(serialize_corpus(synthetic::generate(o)),
            cbt::test::slurp(cbt::test::data_path("synthetic_500.jsonl")));
}

TEST(Synthetic, TermsAgreeWithBundledOntology) {
  auto ontology = cbt::test::bundled_ontology();
  for (const auto& t : synthetic::terms()) {
    ASSERT_TRUE(ontology.knows(t.term)) << t.term;
    EXPECT_EQ(ontology.category_of(t.term), t.category) << t.term;
  }
}

TEST(Synthetic, RecordsAreValidAndRoughlyProportional) {
  synthetic::Options o;
  o.n = 4000;
  auto c = synthetic::generate(o);
  ASSERT_EQ(c.size(), 4000u);
  auto reparsed = parse_corpus(serialize_corpus(c));
  EXPECT_EQ(reparsed.records, c.records);
  auto stats = category_stats(c);
  for (Category cat : kAllCategories)
    EXPECT_NEAR(stats.shares[index_of(cat)], synthetic::kCategoryWeights[index_of(cat)], 0.03)
        << to_string(cat);
  for (const auto& r : c.records) EXPECT_EQ(r.annotator_labels.size(), o.raters);
}

TEST(Synthetic, PlantedBiasIsVisible) {
  synthetic::Options o;
  o.n = 6000;
  auto c = synthetic::generate(o);
  for (const auto& t : synthetic::terms()) {
    if (!t.biased) continue;
    std::size_t n = 0, favored = 0;
    for (const auto& r : c.records) {
      if (r.term != t.term) continue;
      ++n;
      favored += r.gold == t.favored;
    }
    if (n < 30) continue;
    EXPECT_GT(static_cast<double>(favored) / static_cast<double>(n), 0.5) << t.term;
  }
}
