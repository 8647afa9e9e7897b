#include "synaudit/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "synaudit/common.hpp"
#include "test_util.hpp"

namespace {

using namespace synaudit;

LabeledScores make(std::vector<double> scores, std::vector<int> labels) {
  LabeledScores data;
  data.scores = std::move(scores);
  for (int b : labels) data.labels.push_back(b ? 1 : 0);
  return data;
}

// --- auc_roc -----------------------------------------------------------------

TEST(AucTest, PerfectSeparation) {
  EXPECT_DOUBLE_EQ(auc_roc(make({4, 3, 2, 1}, {1, 1, 0, 0})), 1.0);
}

TEST(AucTest, AllTiedIsChance) {
  EXPECT_DOUBLE_EQ(auc_roc(make({7, 7, 7, 7}, {1, 0, 1, 0})), 0.5);
}

TEST(AucTest, ThreeOfFourPairsConcordant) {
  EXPECT_DOUBLE_EQ(auc_roc(make({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0})), 0.75);
}

TEST(AucTest, SingleClassRejected) {
  EXPECT_THROW(auc_roc(make({1, 2}, {1, 1})), EvalError);
  EXPECT_THROW(auc_roc(make({1, 2}, {0, 0})), EvalError);
}

TEST(AucTest, MatchesAllPairsOracleExactly) {
  Rng rng(301);
  for (int trial = 0; trial < 60; ++trial) {
    const LabeledScores data = testutil::random_labeled_scores(rng, 300, trial % 2 == 0);
    EXPECT_EQ(auc_roc(data), testutil::auc_all_pairs(data));
  }
}

TEST(AucTest, ComplementIdentityExact) {
  Rng rng(302);
  for (int trial = 0; trial < 60; ++trial) {
    LabeledScores data = testutil::random_labeled_scores(rng, 300, true);
    LabeledScores negated = data;
    for (double& s : negated.scores) s = -s;
    EXPECT_EQ(auc_roc(data) + auc_roc(negated), 1.0);
  }
}

TEST(AucTest, InvariantUnderStrictlyIncreasingTransforms) {
  Rng rng(303);
  for (int trial = 0; trial < 20; ++trial) {
    LabeledScores data = testutil::random_labeled_scores(rng, 200, true);
    LabeledScores mapped = data;
    for (double& s : mapped.scores) s = std::exp(0.5 * s) + 3.0;  // strictly increasing
    EXPECT_DOUBLE_EQ(auc_roc(data), auc_roc(mapped));
  }
}

// --- tpr_at_fpr --------------------------------------------------------------

TEST(TprAtFprTest, PerfectSeparationAtHalf) {
  const std::vector<double> levels{0.5};
  const auto tpr = tpr_at_fpr(make({4, 3, 2, 1}, {1, 1, 0, 0}), levels);
  EXPECT_DOUBLE_EQ(tpr.at(0.5), 1.0);
}

TEST(TprAtFprTest, AntiSeparationBelowOneOverM0) {
  const std::vector<double> levels{0.3};  // < 1/m0 = 0.5
  const auto tpr = tpr_at_fpr(make({1, 2, 3, 4}, {1, 1, 0, 0}), levels);
  EXPECT_DOUBLE_EQ(tpr.at(0.3), 0.0);
}

TEST(TprAtFprTest, NearOneAdmitsAllMembers) {
  const std::vector<double> levels{0.999};
  // Lowest score is a non-member, so the threshold below every member is
  // feasible at FPR (m0-1)/m0.
  const auto tpr = tpr_at_fpr(make({1, 2, 3, 4, 5, 6}, {0, 1, 1, 0, 1, 0}), levels);
  EXPECT_DOUBLE_EQ(tpr.at(0.999), 1.0);
}

TEST(TprAtFprTest, NondecreasingInAlpha) {
  Rng rng(311);
  const std::vector<double> levels{0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.9};
  for (int trial = 0; trial < 25; ++trial) {
    const LabeledScores data = testutil::random_labeled_scores(rng, 400, trial % 2 == 0);
    const auto tpr = tpr_at_fpr(data, levels);
    double prev = -1.0;
    for (double level : levels) {
      EXPECT_GE(tpr.at(level), prev);
      prev = tpr.at(level);
    }
  }
}

TEST(TprAtFprTest, MatchesEnumerationOracle) {
  Rng rng(312);
  const std::vector<double> levels{0.001, 0.01, 0.1, 0.37};
  for (int trial = 0; trial < 25; ++trial) {
    const LabeledScores data = testutil::random_labeled_scores(rng, 300, true);
    const auto tpr = tpr_at_fpr(data, levels);
    for (double level : levels)
      EXPECT_DOUBLE_EQ(tpr.at(level), testutil::tpr_at_fpr_enumeration(data, level));
  }
}

TEST(TprAtFprTest, LevelOutsideUnitIntervalRejected) {
  const std::vector<double> bad{0.0};
  EXPECT_THROW(tpr_at_fpr(make({1, 2}, {1, 0}), bad), EvalError);
}

// --- accuracy_at_median ------------------------------------------------------

TEST(AccuracyMedianTest, PerfectlyOrderedScores) {
  EXPECT_DOUBLE_EQ(accuracy_at_median(make({1, 2, 3, 4}, {0, 0, 1, 1})), 1.0);
}

TEST(AccuracyMedianTest, InvertedLabels) {
  EXPECT_DOUBLE_EQ(accuracy_at_median(make({1, 2, 3, 4}, {1, 1, 0, 0})), 0.0);
}

TEST(AccuracyMedianTest, AllTiedScoresPredictAllZero) {
  // Strict > at the median: every bit 0, so accuracy = share of non-members.
  EXPECT_DOUBLE_EQ(accuracy_at_median(make({5, 5, 5, 5}, {1, 0, 0, 0})), 0.75);
}

// --- aggregate ---------------------------------------------------------------

EvalReport report_with(double auc, std::uint64_t seed) {
  EvalReport r;
  r.auc = auc;
  r.accuracy_median = auc;
  r.tpr_at_fpr[0.1] = auc / 2.0;
  r.seed = seed;
  return r;
}

TEST(AggregateTest, DominantAttackRanksFirstEverywhere) {
  std::vector<TaggedReport> reports;
  for (const char* gen : {"g1", "g2"})
    for (std::uint64_t seed : {0, 1, 2}) {
      reports.push_back({gen, "strong", 100, report_with(0.9 + 0.01 * seed, seed)});
      reports.push_back({gen, "weak", 100, report_with(0.5 + 0.01 * seed, seed)});
    }
  const AggregateSummary summary = aggregate(reports);
  EXPECT_DOUBLE_EQ(summary.average_rank.at("strong"), 1.0);
  EXPECT_DOUBLE_EQ(summary.average_rank.at("weak"), 2.0);
}

TEST(AggregateTest, TiedAucSharesAverageRank) {
  std::vector<TaggedReport> reports;
  reports.push_back({"g", "a", 100, report_with(0.7, 0)});
  reports.push_back({"g", "b", 100, report_with(0.7, 0)});
  const AggregateSummary summary = aggregate(reports);
  EXPECT_DOUBLE_EQ(summary.ranks.at("g/n=100").at("a"), 1.5);
  EXPECT_DOUBLE_EQ(summary.ranks.at("g/n=100").at("b"), 1.5);
}

TEST(AggregateTest, SingleSeedHasZeroStd) {
  std::vector<TaggedReport> reports{{"g", "a", 100, report_with(0.6, 0)}};
  const AggregateSummary summary = aggregate(reports);
  ASSERT_EQ(summary.groups.size(), 1u);
  EXPECT_DOUBLE_EQ(summary.groups[0].auc.mean, 0.6);
  EXPECT_DOUBLE_EQ(summary.groups[0].auc.stddev, 0.0);
}

TEST(AggregateTest, MeanAndPopulationStd) {
  std::vector<TaggedReport> reports;
  reports.push_back({"g", "a", 100, report_with(0.4, 0)});
  reports.push_back({"g", "a", 100, report_with(0.8, 1)});
  const AggregateSummary summary = aggregate(reports);
  EXPECT_DOUBLE_EQ(summary.groups[0].auc.mean, 0.6);
  EXPECT_DOUBLE_EQ(summary.groups[0].auc.stddev, 0.2);  // population, not sample
}

TEST(AggregateTest, TextTableMentionsAttacksAndRanks) {
  std::vector<TaggedReport> reports;
  reports.push_back({"g", "gen_lra", 250, report_with(0.7, 0)});
  reports.push_back({"g", "dcr", 250, report_with(0.6, 0)});
  const std::string table = aggregate(reports).to_text_table();
  EXPECT_NE(table.find("gen_lra"), std::string::npos);
  EXPECT_NE(table.find("average rank"), std::string::npos);
  EXPECT_NE(table.find("g/n=250"), std::string::npos);
}

// --- report JSON -------------------------------------------------------------

TEST(EvalReportTest, JsonRoundTrip) {
  EvalReport r;
  r.attack = AttackId::domias;
  r.params = {{"note", 1}};
  r.seed = 42;
  r.auc = 0.625;
  r.tpr_at_fpr = {{0.001, 0.0}, {0.01, 0.125}, {0.1, 0.5}};
  r.accuracy_median = 0.55;
  const EvalReport back = EvalReport::from_json(r.to_json());
  EXPECT_EQ(back.attack, AttackId::domias);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_DOUBLE_EQ(back.auc, 0.625);
  EXPECT_DOUBLE_EQ(back.tpr_at_fpr.at(0.01), 0.125);
}

}  // namespace
