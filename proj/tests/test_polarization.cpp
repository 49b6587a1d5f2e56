#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "support.hpp"

using namespace cbt;
using cbt::test::make_record;
using cbt::test::TablePredictor;
using L = Label;

namespace {

/// Records "alpha does thing<i>" plus a predictor that yields the given
/// unmasked and masked labels for them.
std::pair<Corpus, TablePredictor> rigged(const std::vector<L>& unmasked, const std::vector<L>& masked) {
  Corpus c;
  std::map<std::string, L> table;
  for (std::size_t i = 0; i < unmasked.size(); ++i) {
    auto r = make_record("r" + std::to_string(i), "alpha", "does", "thing" + std::to_string(i),
                         Category::Origin);
    table[r.text] = unmasked[i];
    table[mask_term(r).text] = masked[i];
    c.records.push_back(r);
  }
  return {c, TablePredictor(table)};
}

}  // namespace

TEST(MaskTerm, Examples) {
  auto r = make_record("a", "Iraq", "causes", "war", Category::Origin);
  auto m = mask_term(r);
  EXPECT_EQ(m.text, "[MASK] causes war");
  EXPECT_EQ(m.subject, "Iraq");
  EXPECT_EQ(m.term, "Iraq");
  auto w = make_record("b", "woman", "helps", "woman", Category::Gender);
  EXPECT_EQ(mask_term(w).text, "[MASK] helps [MASK]");
  auto broken = r;
  broken.text = "Sweden causes war";
  EXPECT_CBT_ERROR(mask_term(broken), ErrorCode::NoOccurrence);
}

TEST(ChangeDirection, Examples) {
  static_assert(change_direction(L::Neutral, L::Positive) == 1);
  static_assert(change_direction(L::Positive, L::Negative) == -1);
  static_assert(change_direction(L::Negative, L::Negative) == 0);
  EXPECT_EQ(change_direction(L::Negative, L::Positive), 1);
}

TEST(MeasureTerm, FourSentenceExample) {
  auto [c, p] = rigged({L::Negative, L::Negative, L::Neutral, L::Positive},
                       {L::Neutral, L::Negative, L::Neutral, L::Neutral});
  auto t = measure_term(p, c, "alpha");
  EXPECT_EQ(t.n_total, 4u);
  EXPECT_EQ(t.n_changed_positive, 1u);
  EXPECT_EQ(t.n_changed_negative, 1u);
  EXPECT_EQ(t.p_signed, 0.0);
  EXPECT_EQ(t, oracle::polarization_by_enumeration(p, c, "alpha"));
}

TEST(MeasureTerm, FiveSentenceExample) {
  auto [c, p] = rigged({L::Negative, L::Negative, L::Negative, L::Neutral, L::Positive},
                       {L::Neutral, L::Neutral, L::Positive, L::Neutral, L::Positive});
  auto t = measure_term(p, c, "ALPHA");
  EXPECT_EQ(t.n_changed_positive, 0u);
  EXPECT_EQ(t.n_changed_negative, 3u);
  EXPECT_DOUBLE_EQ(t.p_signed, -0.6);
  EXPECT_DOUBLE_EQ(t.magnitude(), 0.6);
}

TEST(MeasureTerm, RiggedTwoOfTen) {
  std::vector<L> unmasked(10, L::Neutral), masked(10, L::Neutral);
  unmasked[3] = L::Positive;
  unmasked[7] = L::Positive;
  auto [c, p] = rigged(unmasked, masked);
  EXPECT_DOUBLE_EQ(measure_term(p, c, "alpha").p_signed, 0.2);
}

TEST(MeasureTerm, TermNotFound) {
  auto [c, p] = rigged({L::Neutral}, {L::Neutral});
  EXPECT_CBT_ERROR(measure_term(p, c, "beta"), ErrorCode::TermNotFound);
}

TEST(MeasureTerm, ConstantPredictorGivesZero) {
  TablePredictor constant({}, L::Positive);
  auto corpus = cbt::test::bundled_corpus();
  auto report = measure_all(constant, corpus, cbt::test::bundled_ontology());
  ASSERT_FALSE(report.terms.empty());
  for (const auto& t : report.terms) {
    EXPECT_EQ(t.p_signed, 0.0) << t.term;
    EXPECT_EQ(t.n_changed_positive + t.n_changed_negative, 0u);
  }
}

TEST(MeasureTerm, MatchesEnumerationOracle) {
  auto corpus = cbt::test::bundled_corpus();
  auto model = train_reference(corpus, 1.0);
  std::set<std::string> terms;
  for (const auto& r : corpus.records) terms.insert(r.term);
  for (const auto& term : terms)
    EXPECT_EQ(measure_term(model, corpus, term), oracle::polarization_by_enumeration(model, corpus, term));
}

TEST(MeasureTerm, OrderInvariant) {
  auto corpus = cbt::test::bundled_corpus();
  auto model = train_reference(corpus, 1.0);
  auto ontology = cbt::test::bundled_ontology();
  auto a = measure_all(model, corpus, ontology);
  Rng rng(5);
  shuffle(std::span<SentenceRecord>(corpus.records), rng);
  auto b = measure_all(model, corpus, ontology);
  EXPECT_EQ(a.terms, b.terms);
  EXPECT_EQ(a.groups, b.groups);
}

TEST(MeasureAll, InvariantsOnBundledCorpus) {
  auto corpus = cbt::test::bundled_corpus();
  auto model = train_reference(corpus, 1.0);
  auto report = measure_all(model, corpus, cbt::test::bundled_ontology());
  EXPECT_EQ(report.unknown_terms, 0u);
  std::size_t total = 0;
  for (const auto& t : report.terms) {
    EXPECT_LE(t.n_changed_positive + t.n_changed_negative, t.n_total);
    EXPECT_LE(t.magnitude(), 1.0);
    const double scaled = t.p_signed * static_cast<double>(t.n_total);
    EXPECT_DOUBLE_EQ(scaled, static_cast<double>(t.n_changed_positive) -
                                 static_cast<double>(t.n_changed_negative));
    total += t.n_total;
  }
  EXPECT_EQ(total, corpus.size());
  std::size_t grouped = 0;
  for (const auto& g : report.groups) grouped += g.n_total;
  EXPECT_EQ(grouped, corpus.size());
  // Terms are either selected at tau = 0 or exactly unpolarized, never both.
  auto selected = select_polarized(report.terms, 0.0);
  for (const auto& t : report.terms)
    EXPECT_NE(selected.contains(t.term), t.p_signed == 0.0) << t.term;
}

TEST(MeasureAll, GroupsAreWeightedByTotal) {
  auto ontology = load_ontology(
      "Catholic\treligion\tChristian\tPeople\nBaptist\treligion\tChristian\tPeople\n"
      "Sunni\treligion\tMuslim\tPeople\n");
  Corpus c;
  std::map<std::string, L> table;
  auto add = [&](const std::string& id, const std::string& term, L unmasked) {
    auto r = make_record(id, term, "visits", "town" + id, Category::Religion);
    table[r.text] = unmasked;
    c.records.push_back(r);
  };
  add("1", "Catholic", L::Positive);
  add("2", "Catholic", L::Neutral);
  add("3", "Baptist", L::Neutral);
  add("4", "Baptist", L::Neutral);
  add("5", "Sunni", L::Negative);
  add("6", "Martian", L::Negative);
  TablePredictor p(table, L::Neutral);
  auto report = measure_all(p, c, ontology);
  EXPECT_EQ(report.unknown_terms, 1u);
  ASSERT_EQ(report.terms.size(), 3u);
  EXPECT_EQ(report.terms[0].term, "Baptist");
  EXPECT_EQ(report.terms[1].term, "Catholic");
  EXPECT_DOUBLE_EQ(report.terms[1].p_signed, 0.5);
  ASSERT_EQ(report.groups.size(), 2u);
  EXPECT_EQ(report.groups[0].group, "Christian");
  EXPECT_EQ(report.groups[0].n_total, 4u);
  EXPECT_DOUBLE_EQ(report.groups[0].p_signed, 0.25);
  EXPECT_DOUBLE_EQ(report.groups[1].p_signed, -1.0);
}

TEST(MeasureAll, EmptyCorpus) {
  TablePredictor p({});
  auto report = measure_all(p, Corpus{}, cbt::test::bundled_ontology());
  EXPECT_TRUE(report.terms.empty());
  EXPECT_TRUE(report.groups.empty());
}

TEST(SelectPolarized, Examples) {
  std::vector<TermPolarization> report = {
      {"A", 20, 1, 0, 0.05}, {"B", 10, 0, 2, -0.2}, {"C", 5, 0, 0, 0.0}};
  EXPECT_EQ(select_polarized(report, 0.0), (std::set<std::string>{"A", "B"}));
  EXPECT_EQ(select_polarized(report, 0.1), (std::set<std::string>{"B"}));
  EXPECT_EQ(select_polarized(report, 1.0), std::set<std::string>{});
  EXPECT_TRUE(select_polarized({}, 0.0).empty());
  EXPECT_CBT_ERROR(select_polarized(report, -0.1), ErrorCode::InvalidArgument);
}

TEST(Oracles, RegexMaskAgreesWithLibrary) {
  for (const auto& r : cbt::test::bundled_corpus().records)
    EXPECT_EQ(oracle::mask_with_regex(r.text, r.term), mask_term(r).text);
}
