#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "phi_sentinel/folds.hpp"
#include "phi_sentinel/metrics.hpp"

using namespace phi_sentinel;
namespace pt = phi_sentinel::oracle;

TEST(Ranking, HandCase) {
  const std::vector<double> s = {0.9, 0.8, 0.7, 0.6, 0.3, 0.2};
  const std::vector<int> y = {1, 1, 0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(auroc(s, y), 8.0 / 9.0);
  EXPECT_DOUBLE_EQ(average_precision(s, y), 11.0 / 12.0);
}

TEST(Ranking, TiesCountHalf) {
  const std::vector<double> s = {0.5, 0.5, 0.5, 0.5};
  const std::vector<int> y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(auroc(s, y), 0.5);
  EXPECT_DOUBLE_EQ(average_precision(s, y), 0.5);
}

TEST(Ranking, MatchesPairwiseOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    const std::size_t levels = 1 + rng() % 20;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / static_cast<double>(levels);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auroc(s, y), pt::pairwise_auroc(s, y), 1e-12);
    EXPECT_NEAR(average_precision(s, y), pt::brute_average_precision(s, y), 1e-12);
  }
}

TEST(Ranking, SingleClassIsUndefined) {
  const std::vector<double> s = {0.1, 0.9};
  const std::vector<int> y = {1, 1};
  EXPECT_THROW(auroc(s, y), UndefinedMetricError);
  EXPECT_THROW(compute_metrics(s, y, 0.5), UndefinedMetricError);
  const auto lenient = compute_metrics_lenient(s, y, 0.5);
  EXPECT_FALSE(lenient.ranking_defined);
  EXPECT_DOUBLE_EQ(lenient.metrics.sensitivity, 0.5);
}

TEST(Threshold, ConfusionAndDerivedRatios) {
  const std::vector<double> s = {0.9, 0.6, 0.5, 0.4, 0.2, 0.1};
  const std::vector<int> y = {1, 0, 1, 1, 0, 0};
  const auto c = confusion(s, y, 0.5);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tn, 2u);
  const auto m = compute_metrics(s, y, 0.5);
  EXPECT_DOUBLE_EQ(m.sensitivity, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.specificity, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.npv, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
}

TEST(Threshold, EmptyDenominatorsGiveZero) {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> y = {1, 0};
  const auto m = compute_metrics(s, y, 0.9);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(m.sensitivity, 0.0);
}

TEST(Summary, MeanAndPopulationStd) {
  std::vector<MetricSet> folds(3);
  const std::array<double, 3> auc = {0.9, 0.8, 1.0};
  for (std::size_t i = 0; i < 3; ++i) folds[i].auroc = auc[i];
  const auto s = summarize(folds);
  EXPECT_DOUBLE_EQ(s.mean.auroc, 0.9);
  EXPECT_NEAR(s.stddev.auroc, std::sqrt(0.02 / 3.0), 1e-15);
  EXPECT_EQ(s.stddev.f1, 0.0);
}

TEST(Folds, StratifiedPartition) {
  std::vector<int> y(889, 0);
  for (std::size_t i = 0; i < 67; ++i) y[i * 13] = 1;
  const auto a = stratified_folds(y, 5, 42);
  std::array<std::size_t, 5> size{}, pos{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    ASSERT_LT(a[i], 5u);
    ++size[a[i]];
    pos[a[i]] += y[i];
  }
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_TRUE(size[f] == 177 || size[f] == 178) << size[f];
    EXPECT_TRUE(pos[f] == 13 || pos[f] == 14) << pos[f];
  }
  EXPECT_EQ(a, stratified_folds(y, 5, 42));
  EXPECT_NE(a, stratified_folds(y, 5, 43));
}

TEST(Folds, RejectsTooFewPerClass) {
  const std::vector<int> y = {1, 1, 0, 0, 0, 0, 0};
  EXPECT_THROW(stratified_folds(y, 3, 1), StratificationError);
  EXPECT_THROW(stratified_folds(y, 1, 1), StratificationError);
  EXPECT_NO_THROW(stratified_folds(y, 2, 1));
}
