#include <gtest/gtest.h>

#include <bit>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "phi_sentinel/metafeatures.hpp"

using namespace phi_sentinel;
namespace pt = phi_sentinel::oracle;

namespace {

ColumnSample sample_of(std::vector<std::string> values) {
  ColumnSample s;
  s.column_name = "c";
  s.values = std::move(values);
  s.total_cells = s.values.size();
  s.inferred_type = infer_type(s.values);
  return s;
}

void expect_close(double actual, double expected, const char* what) {
  EXPECT_LE(std::fabs(actual - expected), 1e-9 * std::max(1.0, std::fabs(expected)))
      << what << ": " << actual << " vs " << expected;
}

std::vector<double> random_numbers(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0, 1);
  const double scale = std::pow(10.0, std::floor(unit(rng) * 4));
  std::vector<double> v(n);
  for (auto& x : v) x = std::round((unit(rng) * 2 - 1) * scale * 100) / 100;
  return v;
}

}  // namespace

TEST(Frequency, GiniAndDiversityKnownValues) {
  const std::vector<std::string> unique = {"a", "b", "c", "d"};
  EXPECT_DOUBLE_EQ(gini_impurity(unique), 0.75);
  EXPECT_DOUBLE_EQ(diversity_index(unique), 1.0);
  const std::vector<std::string> constant(10, "x");
  EXPECT_EQ(gini_impurity(constant), 0.0);
  EXPECT_EQ(diversity_index(constant), 0.0);
  const std::vector<std::string> one = {"x"};
  EXPECT_EQ(diversity_index(one), 0.0);
}

TEST(Frequency, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const std::size_t levels = 1 + rng() % 30;
    std::vector<std::string> v(n);
    for (auto& t : v) t = "L" + std::to_string(rng() % levels);
    expect_close(gini_impurity(v), pt::brute_gini(v), "gini");
    expect_close(diversity_index(v), pt::brute_diversity(v), "diversity");
  }
}

TEST(Numeric, MomentsMadQuantilesMatchBruteForce) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    auto v = random_numbers(rng, 1 + rng() % 200);
    if (trial % 10 == 0) v.assign(v.size(), v.front());
    const auto m = moments(v);
    const auto b = pt::brute_moments(v);
    expect_close(m.mean, b.mean, "mean");
    expect_close(m.variance, b.variance, "variance");
    const bool constant = std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    if (constant) {
      EXPECT_TRUE(is_missing(m.skewness));
      EXPECT_TRUE(is_missing(m.kurtosis));
    } else {
      expect_close(m.skewness, b.skewness, "skewness");
      expect_close(m.kurtosis, b.kurtosis, "kurtosis");
    }
    expect_close(median_absolute_deviation(v), pt::brute_mad(v), "mad");
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double p : kQuantileLevels) expect_close(quantile_sorted(sorted, p), pt::brute_quantile(v, p), "quantile");
  }
}

TEST(Numeric, KnownSmallCases) {
  const std::vector<double> v = {1, 2, 3, 4, 100};
  EXPECT_DOUBLE_EQ(median_absolute_deviation(v), 1.0);
  std::vector<double> sorted = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(sorted, 0.25), 1.75);
  const auto two = moments(std::vector<double>{0, 2});
  EXPECT_DOUBLE_EQ(two.skewness, 0.0);
  EXPECT_DOUBLE_EQ(two.kurtosis, -2.0);
  const auto single = moments(std::vector<double>{5});
  EXPECT_EQ(single.variance, 0.0);
  EXPECT_TRUE(is_missing(single.kurtosis));
}

TEST(Precision, DigitStatsMatchBruteForce) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<std::string> tokens(n);
    for (auto& t : tokens) {
      const auto kind = rng() % 5;
      if (kind == 0) t = "n/a" + std::to_string(rng() % 3);
      else if (kind == 1) t = "-" + std::to_string(rng() % 100000);
      else if (kind == 2) t = std::to_string(rng() % 1000) + "." + std::to_string(rng() % 1000);
      else t = std::to_string(rng() % 10000000);
    }
    const auto s = digit_precision_stats(tokens);
    const auto counts = pt::brute_digit_counts(tokens);
    if (counts.empty()) {
      EXPECT_TRUE(is_missing(s.mean));
      continue;
    }
    const auto b = pt::brute_moments(counts);
    expect_close(s.min, *std::min_element(counts.begin(), counts.end()), "precision min");
    expect_close(s.max, *std::max_element(counts.begin(), counts.end()), "precision max");
    expect_close(s.mean, b.mean, "precision mean");
    expect_close(s.variance, b.variance, "precision variance");
    expect_close(s.moe, 1.96 * std::sqrt(b.variance) / std::sqrt(static_cast<double>(counts.size())), "moe");
  }
}

TEST(Histogram, BinsSumToOneAndConstantColumnsUseOneBin) {
  const std::vector<double> v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto h = histogram(v);
  double total = 0;
  for (double c : h.counts) total += c;
  EXPECT_DOUBLE_EQ(total, 1.0);
  EXPECT_DOUBLE_EQ(h.bin_width, 1.0);
  EXPECT_DOUBLE_EQ(h.counts[9], 2.0 / 11.0);
  const auto flat = histogram(std::vector<double>(5, 3.0));
  EXPECT_EQ(flat.counts[0], 1.0);
  EXPECT_EQ(flat.bin_width, 0.0);
}

TEST(Vector, SlotLayoutAndMissingMarkers) {
  EXPECT_EQ(kNumSlots, 49u);
  EXPECT_EQ(*slot_index("gini_impurity"), slot::kGini);
  EXPECT_FALSE(slot_index("no_such_slot"));

  const auto text = column_vector(sample_of({"Alice", "Bob", "Alice", "Carol"}));
  EXPECT_EQ(text.values[static_cast<std::size_t>(DataType::kString)], 1.0);
  EXPECT_TRUE(is_missing(text.values[slot::kSkewness]));
  EXPECT_TRUE(is_missing(text.values[slot::kMin]));
  EXPECT_DOUBLE_EQ(text.values[slot::kUniqueCount], 3.0);
  EXPECT_DOUBLE_EQ(text.values[slot::kModeRatio], 0.5);
  EXPECT_DOUBLE_EQ(text.values[slot::kGini], 1.0 - (0.25 + 0.0625 + 0.0625));
  EXPECT_EQ(text.values[slot::kCategorical], 1.0);

  const auto ints = column_vector(sample_of({"3", "1", "2", "10", "5"}));
  EXPECT_EQ(ints.values[slot::kDtypeInt], 1.0);
  EXPECT_DOUBLE_EQ(ints.values[slot::kMin], 1.0);
  EXPECT_DOUBLE_EQ(ints.values[slot::kPrecision], 1.0);
  EXPECT_FALSE(is_missing(ints.values[slot::kKurtosis]));
  EXPECT_EQ(ints.values[slot::kOrderAsc], 0.0);

  const auto sorted = column_vector(sample_of({"1", "2", "2", "9"}));
  EXPECT_EQ(sorted.values[slot::kOrderAsc], 1.0);
  EXPECT_EQ(sorted.values[slot::kOrderDesc], 0.0);
}

TEST(Vector, DatesUseEpochSeconds) {
  const auto v = column_vector(sample_of({"1970-01-02", "1970-01-03"}));
  EXPECT_EQ(v.values[3], 1.0);
  EXPECT_DOUBLE_EQ(v.values[slot::kMin], 86400.0);
  EXPECT_TRUE(is_missing(v.values[slot::kPrecision]));
}

TEST(Vector, NullCountsComeFromTheWholeColumn) {
  Column c;
  c.name = "c";
  c.cells = {std::string("1"), std::nullopt, std::string("2"), std::nullopt};
  const auto v = column_vector(sample_column(c, 1000, 1));
  EXPECT_EQ(v.values[slot::kNullCount], 2.0);
  EXPECT_EQ(v.values[slot::kNullCount + 1], 0.5);
}

TEST(EncodingInvariance, FrequencyFamilyIsBitIdenticalUnderRecoding) {
  const std::array<std::size_t, 8> family = {slot::kCategorical, slot::kModeRatio, slot::kUniqueCount,
                                             slot::kUniqueCount + 1, slot::kUniqueCount + 2,
                                             slot::kUniqueCount + 3, slot::kGini, slot::kDiversity};
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t levels = 1 + rng() % 12;
    std::vector<std::string> codes_a, codes_b;
    for (std::size_t l = 0; l < levels; ++l) {
      codes_a.push_back("level_" + std::to_string(l));
      codes_b.push_back(std::to_string(l * 7 + 1));
    }
    std::shuffle(codes_b.begin(), codes_b.end(), rng);
    Column a, b;
    const std::size_t n = 1 + rng() % 300;
    for (std::size_t r = 0; r < n; ++r) {
      const auto l = rng() % levels;
      a.cells.emplace_back(codes_a[l]);
      b.cells.emplace_back(codes_b[l]);
    }
    const auto va = column_vector(sample_column(a, 100, trial));
    const auto vb = column_vector(sample_column(b, 100, trial));
    for (auto s : family)
      EXPECT_EQ(std::bit_cast<std::uint64_t>(va.values[s]), std::bit_cast<std::uint64_t>(vb.values[s]))
          << kSlotNames[s];
  }
}

TEST(MatrixCsv, RoundTripKeepsMissingAndLabels) {
  std::vector<MetaFeatureVector> rows(2);
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    rows[0].values[s] = 0.1 * static_cast<double>(s);
    rows[1].values[s] = s % 3 ? 1.0 / 3.0 : kMissing;
  }
  std::stringstream io;
  write_matrix_csv(io, rows, std::vector<int>{1, 0});
  const auto back = read_matrix_csv(io);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.labels, (std::vector<int>{1, 0}));
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    EXPECT_EQ(back.rows[0].values[s], rows[0].values[s]);
    if (is_missing(rows[1].values[s])) EXPECT_TRUE(is_missing(back.rows[1].values[s]));
    else EXPECT_EQ(back.rows[1].values[s], rows[1].values[s]);
  }
}

TEST(Extract, EmptySampleThrowsAndDatasetSkipsAllNull) {
  EXPECT_THROW(compute_metafeatures(ColumnSample{}), EmptySampleError);
  Dataset ds;
  ds.row_count = 2;
  ds.columns.push_back({"x", {std::string("1"), std::string("2")}, {}, {}});
  ds.columns.push_back({"y", {std::nullopt, std::nullopt}, {}, {}});
  const auto out = extract_dataset(ds, 1000, 42, 2);
  EXPECT_TRUE(out[0]);
  EXPECT_FALSE(out[1]);
}
