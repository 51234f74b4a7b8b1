#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "phi_sentinel/gbt.hpp"

using namespace phi_sentinel;
using gbt::FeatureMatrix;

namespace {

struct Toy {
  FeatureMatrix x;
  std::vector<int> y;
};

// Labels from a noisy linear rule, with some missing cells.
Toy random_dataset(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  Toy t{oracle::random_matrix(rng, rows, cols, 0.05), std::vector<int>(rows)};
  std::normal_distribution<double> noise(0, 0.3);
  for (std::size_t r = 0; r < rows; ++r) {
    const double a = std::isnan(t.x.at(r, 0)) ? 0.5 : t.x.at(r, 0);
    const double b = std::isnan(t.x.at(r, 1)) ? 0.5 : t.x.at(r, 1);
    t.y[r] = a + b + noise(rng) > 1.0 ? 1 : 0;
  }
  t.y[0] = 1;
  t.y[1] = 0;
  return t;
}

gbt::TrainParams quick(std::size_t rounds = 20) {
  gbt::TrainParams p;
  p.rounds = rounds;
  return p;
}

}  // namespace

TEST(Train, SingleRoundStumpMatchesHandComputation) {
  FeatureMatrix x(2, 1);
  x.values = {0.0, 1.0};
  const std::vector<int> y = {0, 1};
  auto p = quick(1);
  p.max_depth = 1;
  const auto m = gbt::train(x, y, p);
  // base 0, gradients (0.5, -0.5), hessians 0.25, leaves -G/(H + 1).
  EXPECT_DOUBLE_EQ(m.base_score, 0.0);
  ASSERT_EQ(m.trees.size(), 1u);
  const auto& root = m.trees[0].nodes[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_DOUBLE_EQ(root.threshold, 0.5);
  EXPECT_DOUBLE_EQ(m.trees[0].nodes[root.left].leaf_value, -0.4);
  EXPECT_DOUBLE_EQ(m.trees[0].nodes[root.right].leaf_value, 0.4);
  EXPECT_DOUBLE_EQ(gbt::predict_margin(m, x.row(1)), gbt::kDefaultEta * 0.4);
}

TEST(Train, BaseScoreIsPriorLogOdds) {
  FeatureMatrix x(4, 1);
  x.values = {1, 1, 1, 1};
  const std::vector<int> y = {1, 0, 0, 0};
  const auto m = gbt::train(x, y, quick(3));
  EXPECT_DOUBLE_EQ(m.base_score, std::log(0.25 / 0.75));
  for (const auto& t : m.trees) EXPECT_EQ(t.nodes.size(), 1u);  // nothing to split on
}

TEST(Train, LossNeverIncreases) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = random_dataset(rng, 60 + rng() % 200, 2 + rng() % 6);
    gbt::TrainingLog log;
    gbt::train(t.x, t.y, quick(30), &log);
    ASSERT_EQ(log.loss.size(), 31u);
    for (std::size_t r = 1; r < log.loss.size(); ++r) EXPECT_LE(log.loss[r], log.loss[r - 1] + 1e-12);
  }
}

TEST(Train, SeparableToyIsLearnedExactly) {
  FeatureMatrix x(40, 2);
  std::vector<int> y(40);
  for (std::size_t r = 0; r < 40; ++r) {
    x.values[r * 2] = static_cast<double>(r);
    x.values[r * 2 + 1] = static_cast<double>(r % 7);
    y[r] = r >= 25 ? 1 : 0;
  }
  const auto m = gbt::train(x, y);
  for (std::size_t r = 0; r < 40; ++r) EXPECT_EQ(gbt::predict_proba_raw(m, x.row(r)) >= 0.5, y[r] == 1);
}

TEST(Train, MissingValuesFollowTheLearnedDefault) {
  FeatureMatrix x(20, 1);
  std::vector<int> y(20);
  for (std::size_t r = 0; r < 20; ++r) {
    y[r] = r < 10 ? 1 : 0;
    x.values[r] = r < 10 ? std::nan("") : static_cast<double>(r);
  }
  const auto m = gbt::train(x, y, quick(10));
  const std::array<double, 1> missing = {std::nan("")};
  const std::array<double, 1> present = {15.0};
  EXPECT_GT(gbt::predict_margin(m, missing), 0.0);
  EXPECT_LT(gbt::predict_margin(m, present), 0.0);
}

TEST(Train, IdenticalAcrossThreadCounts) {
  std::mt19937_64 rng(32);
  const auto t = random_dataset(rng, 300, 8);
  auto p = quick(25);
  p.threads = 1;
  const auto one = gbt::model_to_string(gbt::train(t.x, t.y, p));
  p.threads = 4;
  EXPECT_EQ(one, gbt::model_to_string(gbt::train(t.x, t.y, p)));
}

TEST(Train, RejectsDegenerateInput) {
  FeatureMatrix x(3, 1);
  EXPECT_THROW(gbt::train(x, std::vector<int>{1, 1, 1}), DegenerateModelError);
  EXPECT_THROW(gbt::train(x, std::vector<int>{1, 0}), DimensionError);
  gbt::GbtModel m;
  EXPECT_THROW(gbt::predict_margin(m, std::vector<double>(3)), DimensionError);
}

TEST(Serialize, ExactRoundTripAndStableHash) {
  std::mt19937_64 rng(33);
  const auto t = random_dataset(rng, 200, 5);
  auto m = gbt::train(t.x, t.y, quick(15));
  m.platt_a = -1.2345678901234567;
  m.platt_b = 0.1;
  const auto back = gbt::model_from_json(nlohmann::json::parse(gbt::model_to_string(m)));
  EXPECT_EQ(gbt::model_to_string(back), gbt::model_to_string(m));
  EXPECT_EQ(back.platt_a, m.platt_a);
  for (std::size_t r = 0; r < t.x.rows; ++r)
    EXPECT_EQ(gbt::predict_margin(back, t.x.row(r)), gbt::predict_margin(m, t.x.row(r)));
  EXPECT_EQ(gbt::model_hash(back), gbt::model_hash(m));
  auto changed = back;
  changed.trees[0].nodes[0].threshold += 1e-9;
  EXPECT_NE(gbt::model_hash(changed), gbt::model_hash(m));
  EXPECT_THROW(gbt::model_from_json(nlohmann::json::parse(R"({"format_version": 999})")), Error);
}

TEST(Platt, RecoversSyntheticLogit) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> score(0, 2);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<double> s(2000);
  std::vector<int> y(2000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = score(rng);
    y[i] = unit(rng) < gbt::sigmoid(s[i]) ? 1 : 0;
  }
  const auto p = gbt::fit_platt(s, y);
  EXPECT_NEAR(p.a, -1.0, 0.15);
  EXPECT_NEAR(p.b, 0.0, 0.15);
}

TEST(Platt, CalibrationPreservesRanking) {
  gbt::GbtModel m;
  m.platt_a = -0.7;
  m.platt_b = 0.3;
  double previous = -1;
  for (double margin = -8; margin <= 8; margin += 0.25) {
    const double p = gbt::calibrate(m, margin);
    EXPECT_GT(p, previous);
    previous = p;
  }
  EXPECT_THROW(gbt::fit_platt(std::vector<double>{1, 2}, std::vector<int>{1, 1}), CalibrationError);
}

TEST(Platt, TrainCalibratedUsesOutOfFoldMargins) {
  std::mt19937_64 rng(35);
  const auto t = random_dataset(rng, 400, 4);
  const auto out = gbt::train_calibrated(t.x, t.y, quick(20));
  EXPECT_TRUE(out.calibrated);
  EXPECT_EQ(out.out_of_fold_margins.size(), t.x.rows);
  const auto refit = gbt::fit_platt(out.out_of_fold_margins, t.y);
  EXPECT_EQ(refit.a, out.model.platt_a);
  EXPECT_EQ(refit.b, out.model.platt_b);
  EXPECT_LT(out.model.platt_a, 0.0);

  FeatureMatrix tiny(3, 1);
  tiny.values = {0, 1, 2};
  const auto few = gbt::train_calibrated(tiny, std::vector<int>{0, 1, 0}, quick(2));
  EXPECT_FALSE(few.calibrated);
  EXPECT_EQ(few.model.platt_a, -1.0);
}
