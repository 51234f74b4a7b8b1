#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phi_sentinel/datetime.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/ingest.hpp"
#include "phi_sentinel/parallel.hpp"

// Column metadata profile: type, cardinality, moments, histogram, digit
// precision. One profile becomes one 49-slot row of the derived matrix.
namespace phi_sentinel {

// Reserved marker for statistics that are undefined for a column.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline constexpr std::size_t kNumSlots = 49;
inline constexpr std::size_t kHistogramBins = 10;
inline constexpr std::array<double, 4> kQuantileLevels = {0.05, 0.25, 0.75, 0.95};

inline constexpr std::array<std::string_view, kNumSlots> kSlotNames = {
    "dtype_int",          "dtype_float",       "dtype_string",     "dtype_datetime",
    "categorical",        "order_asc",         "order_desc",       "null_count",
    "null_ratio",         "min",               "max",              "mode_ratio",
    "median",             "mad",               "sum",              "mean",
    "variance",           "stddev",            "skewness",         "kurtosis",
    "num_zeros",          "num_negatives",     "hist_0",           "hist_1",
    "hist_2",             "hist_3",            "hist_4",           "hist_5",
    "hist_6",             "hist_7",            "hist_8",           "hist_9",
    "bin_width",          "q05",               "q25",              "q75",
    "q95",                "unique_count",      "unique_ratio",     "max_category_ratio",
    "min_category_ratio", "gini_impurity",     "diversity_index",  "precision_min",
    "precision_max",      "precision_mean",    "precision_var",    "precision_std",
    "precision_moe"};

namespace slot {
inline constexpr std::size_t kDtypeInt = 0;
inline constexpr std::size_t kCategorical = 4;
inline constexpr std::size_t kOrderAsc = 5;
inline constexpr std::size_t kOrderDesc = 6;
inline constexpr std::size_t kNullCount = 7;
inline constexpr std::size_t kMin = 9;
inline constexpr std::size_t kModeRatio = 11;
inline constexpr std::size_t kSkewness = 18;
inline constexpr std::size_t kKurtosis = 19;
inline constexpr std::size_t kHistogram = 22;
inline constexpr std::size_t kBinWidth = 32;
inline constexpr std::size_t kQuantiles = 33;
inline constexpr std::size_t kUniqueCount = 37;
inline constexpr std::size_t kGini = 41;
inline constexpr std::size_t kDiversity = 42;
inline constexpr std::size_t kPrecision = 43;
}  // namespace slot

inline std::optional<std::size_t> slot_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumSlots; ++i)
    if (kSlotNames[i] == name) return i;
  return std::nullopt;
}

struct PrecisionStats {
  double min = kMissing;
  double max = kMissing;
  double mean = kMissing;
  double variance = kMissing;
  double stddev = kMissing;
  double moe = kMissing;  // 1.96 * stddev / sqrt(n)
};

struct Histogram {
  std::array<double, kHistogramBins> counts{};
  double bin_width = 0.0;
};

struct MetaFeatures {
  DataType data_type = DataType::kString;
  bool categorical = false;
  bool order_asc = false;
  bool order_desc = false;
  double null_count = 0;
  double null_ratio = 0;

  double min = kMissing;
  double max = kMissing;
  double mode_ratio = kMissing;
  double median = kMissing;
  double mad = kMissing;
  double sum = kMissing;
  double mean = kMissing;
  double variance = kMissing;
  double stddev = kMissing;
  double skewness = kMissing;
  double kurtosis = kMissing;  // excess
  double num_zeros = kMissing;
  double num_negatives = kMissing;
  std::array<double, kHistogramBins> histogram_counts = filled_missing<kHistogramBins>();
  double bin_width = kMissing;
  std::array<double, kQuantileLevels.size()> quantiles = filled_missing<kQuantileLevels.size()>();

  double unique_count = 0;
  double unique_ratio = 0;
  double max_category_ratio = kMissing;
  double min_category_ratio = kMissing;
  double gini_impurity = 0;
  double diversity_index = 0;
  PrecisionStats precision;

 private:
  template <std::size_t N>
  static std::array<double, N> filled_missing() {
    std::array<double, N> a;
    a.fill(kMissing);
    return a;
  }
};

struct MetaFeatureVector {
  std::string column_name;
  std::array<double, kNumSlots> values{};
};

// ---- individual statistics ----

// Value frequencies of raw tokens, returned as counts only; order is
// irrelevant to every statistic that consumes them.
inline std::vector<std::size_t> token_counts(std::span<const std::string> values) {
  std::unordered_map<std::string_view, std::size_t> counts;
  counts.reserve(values.size());
  for (const auto& v : values) ++counts[v];
  std::vector<std::size_t> out;
  out.reserve(counts.size());
  for (const auto& [_, n] : counts) out.push_back(n);
  std::sort(out.begin(), out.end());
  return out;
}

// 1 - sum p_i^2, evaluated as an integer ratio.
inline double gini_from_counts(std::span<const std::size_t> counts) {
  std::uint64_t total = 0;
  std::uint64_t squares = 0;
  for (auto n : counts) {
    total += n;
    squares += static_cast<std::uint64_t>(n) * n;
  }
  if (total == 0) return 0.0;
  const auto t2 = static_cast<double>(total) * static_cast<double>(total);
  return static_cast<double>(total * total - squares) / t2;
}

// Probability that two entries drawn without replacement differ.
inline double diversity_from_counts(std::span<const std::size_t> counts) {
  std::uint64_t total = 0;
  std::uint64_t same_pairs = 0;
  for (auto n : counts) {
    total += n;
    same_pairs += static_cast<std::uint64_t>(n) * (n - (n > 0 ? 1 : 0));
  }
  if (total <= 1) return 0.0;
  const std::uint64_t all_pairs = total * (total - 1);
  return static_cast<double>(all_pairs - same_pairs) / static_cast<double>(all_pairs);
}

inline double gini_impurity(std::span<const std::string> values) {
  const auto counts = token_counts(values);
  return gini_from_counts(counts);
}

inline double diversity_index(std::span<const std::string> values) {
  const auto counts = token_counts(values);
  return diversity_from_counts(counts);
}

inline std::size_t count_digits(std::string_view token) {
  return static_cast<std::size_t>(
      std::count_if(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }));
}

inline PrecisionStats digit_precision_stats(std::span<const std::string> tokens) {
  PrecisionStats s;
  std::vector<double> digits;
  digits.reserve(tokens.size());
  for (const auto& t : tokens)
    if (parse_number(t)) digits.push_back(static_cast<double>(count_digits(t)));
  if (digits.empty()) return s;
  const auto n = static_cast<double>(digits.size());
  s.min = *std::min_element(digits.begin(), digits.end());
  s.max = *std::max_element(digits.begin(), digits.end());
  double sum = 0.0;
  for (double d : digits) sum += d;
  s.mean = sum / n;
  if (s.min == s.max) {
    s.mean = s.min;
    s.variance = 0.0;
  } else {
    double ss = 0.0;
    for (double d : digits) ss += (d - s.mean) * (d - s.mean);
    s.variance = ss / n;
  }
  s.stddev = std::sqrt(s.variance);
  s.moe = 1.96 * s.stddev / std::sqrt(n);
  return s;
}

inline Histogram histogram(std::span<const double> values) {
  Histogram h;
  if (values.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double n = static_cast<double>(values.size());
  if (lo == hi) {
    h.counts[0] = 1.0;
    h.bin_width = 0.0;
    return h;
  }
  h.bin_width = (hi - lo) / static_cast<double>(kHistogramBins);
  std::array<std::size_t, kHistogramBins> raw{};
  for (double v : values) {
    auto bin = static_cast<std::size_t>(std::floor((v - lo) / h.bin_width));
    raw[std::min(bin, kHistogramBins - 1)]++;
  }
  for (std::size_t b = 0; b < kHistogramBins; ++b) h.counts[b] = static_cast<double>(raw[b]) / n;
  return h;
}

// Linear interpolation between order statistics at position (n-1)p.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median_sorted(std::span<const double> sorted) {
  const auto n = sorted.size();
  return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

struct Moments {
  double mean = kMissing;
  double variance = kMissing;
  double skewness = kMissing;
  double kurtosis = kMissing;  // excess
};

// Population moments. Skewness and kurtosis are undefined (missing) when
// every value is equal.
inline Moments moments(std::span<const double> values) {
  Moments m;
  if (values.empty()) return m;
  const auto n = static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    m.mean = *lo;
    m.variance = 0.0;
    return m;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

inline double median_absolute_deviation(std::span<const double> values) {
  if (values.empty()) return kMissing;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double med = median_sorted(sorted);
  std::vector<double> dev;
  dev.reserve(sorted.size());
  for (double v : sorted) dev.push_back(std::fabs(v - med));
  std::sort(dev.begin(), dev.end());
  return median_sorted(dev);
}

inline std::size_t categorical_threshold(std::size_t sample_size) {
  return std::max<std::size_t>(20, static_cast<std::size_t>(0.05 * static_cast<double>(sample_size)));
}

namespace detail {

// Numeric view of a sample: parsed numbers for int/float, epoch seconds for
// datetime; tokens that fail to parse are skipped.
inline std::vector<double> numeric_values(const ColumnSample& sample) {
  std::vector<double> out;
  out.reserve(sample.values.size());
  for (const auto& v : sample.values) {
    std::optional<double> x;
    if (sample.inferred_type == DataType::kDatetime) {
      x = datetime::to_epoch_seconds(v);
    } else {
      x = parse_number(v);
    }
    if (x) out.push_back(*x);
  }
  return out;
}

template <typename T, typename Less>
std::pair<bool, bool> monotone_flags(const std::vector<T>& seq, Less less) {
  bool asc = true, desc = true;
  for (std::size_t i = 1; i < seq.size() && (asc || desc); ++i) {
    if (less(seq[i], seq[i - 1])) asc = false;
    if (less(seq[i - 1], seq[i])) desc = false;
  }
  return {asc, desc};
}

}  // namespace detail

inline MetaFeatures compute_metafeatures(const ColumnSample& sample) {
  if (sample.values.empty())
    throw EmptySampleError("column '" + sample.column_name + "' has an empty sample");
  MetaFeatures f;
  const auto k = sample.values.size();
  const auto kd = static_cast<double>(k);
  f.data_type = sample.inferred_type;
  f.null_count = static_cast<double>(sample.null_count);
  f.null_ratio = sample.total_cells ? static_cast<double>(sample.null_count) /
                                          static_cast<double>(sample.total_cells)
                                    : 0.0;

  // Frequency family, on raw tokens for every type.
  const auto counts = token_counts(sample.values);
  f.unique_count = static_cast<double>(counts.size());
  f.unique_ratio = f.unique_count / kd;
  f.mode_ratio = static_cast<double>(counts.back()) / kd;
  f.categorical = counts.size() <= categorical_threshold(k);
  if (f.categorical) {
    f.max_category_ratio = static_cast<double>(counts.back()) / kd;
    f.min_category_ratio = static_cast<double>(counts.front()) / kd;
  }
  f.gini_impurity = gini_from_counts(counts);
  f.diversity_index = diversity_from_counts(counts);

  if (sample.inferred_type == DataType::kString) {
    const auto [asc, desc] =
        detail::monotone_flags(sample.values, [](const std::string& a, const std::string& b) { return a < b; });
    f.order_asc = asc;
    f.order_desc = desc;
    return f;
  }

  const auto numbers = detail::numeric_values(sample);
  const auto [asc, desc] = detail::monotone_flags(numbers, std::less<double>());
  f.order_asc = asc;
  f.order_desc = desc;
  if (numbers.empty()) return f;

  std::vector<double> sorted = numbers;
  std::sort(sorted.begin(), sorted.end());
  f.min = sorted.front();
  f.max = sorted.back();
  f.median = median_sorted(sorted);
  f.mad = median_absolute_deviation(sorted);
  double sum = 0.0;
  for (double v : numbers) sum += v;
  f.sum = sum;
  const auto m = moments(numbers);
  f.mean = m.mean;
  f.variance = m.variance;
  f.stddev = std::sqrt(m.variance);
  f.skewness = m.skewness;
  f.kurtosis = m.kurtosis;
  f.num_zeros = static_cast<double>(std::count(numbers.begin(), numbers.end(), 0.0));
  f.num_negatives = static_cast<double>(
      std::count_if(numbers.begin(), numbers.end(), [](double v) { return v < 0.0; }));
  const auto h = histogram(numbers);
  f.histogram_counts = h.counts;
  f.bin_width = h.bin_width;
  for (std::size_t q = 0; q < kQuantileLevels.size(); ++q)
    f.quantiles[q] = quantile_sorted(sorted, kQuantileLevels[q]);
  if (sample.inferred_type != DataType::kDatetime) f.precision = digit_precision_stats(sample.values);
  return f;
}

inline MetaFeatureVector flatten(const MetaFeatures& f, std::string column_name = {}) {
  MetaFeatureVector out;
  out.column_name = std::move(column_name);
  auto& v = out.values;
  v.fill(kMissing);
  for (std::size_t t = 0; t < 4; ++t) v[t] = static_cast<std::size_t>(f.data_type) == t ? 1.0 : 0.0;
  v[4] = f.categorical ? 1.0 : 0.0;
  v[5] = f.order_asc ? 1.0 : 0.0;
  v[6] = f.order_desc ? 1.0 : 0.0;
  v[7] = f.null_count;
  v[8] = f.null_ratio;
  const std::array<double, 11> stats = {f.min,  f.max,     f.mode_ratio, f.median,
                                        f.mad,  f.sum,     f.mean,       f.variance,
                                        f.stddev, f.skewness, f.kurtosis};
  std::copy(stats.begin(), stats.end(), v.begin() + 9);
  v[20] = f.num_zeros;
  v[21] = f.num_negatives;
  std::copy(f.histogram_counts.begin(), f.histogram_counts.end(), v.begin() + slot::kHistogram);
  v[slot::kBinWidth] = f.bin_width;
  std::copy(f.quantiles.begin(), f.quantiles.end(), v.begin() + slot::kQuantiles);
  v[37] = f.unique_count;
  v[38] = f.unique_ratio;
  v[39] = f.max_category_ratio;
  v[40] = f.min_category_ratio;
  v[41] = f.gini_impurity;
  v[42] = f.diversity_index;
  const auto& p = f.precision;
  const std::array<double, 6> prec = {p.min, p.max, p.mean, p.variance, p.stddev, p.moe};
  std::copy(prec.begin(), prec.end(), v.begin() + slot::kPrecision);
  return out;
}

inline MetaFeatureVector column_vector(const ColumnSample& sample) {
  return flatten(compute_metafeatures(sample), sample.column_name);
}

// One profile row per column. All-null columns yield nullopt.
inline std::vector<std::optional<MetaFeatureVector>> extract_dataset(const Dataset& dataset,
                                                                     std::size_t k,
                                                                     std::uint64_t seed,
                                                                     unsigned threads = 0) {
  std::vector<std::optional<MetaFeatureVector>> out(dataset.columns.size());
  parallel_for(dataset.columns.size(), threads, [&](std::size_t c) {
    try {
      out[c] = column_vector(sample_column(dataset.columns[c], k, seed));
    } catch (const EmptySampleError&) {
    }
  });
  return out;
}

// ---- derived matrix as CSV: slot names, optional trailing label ----

inline void write_matrix_csv(std::ostream& out, std::span<const MetaFeatureVector> rows,
                             std::span<const int> labels = {}) {
  if (!labels.empty() && labels.size() != rows.size())
    throw DimensionError("label count does not match row count");
  for (std::size_t i = 0; i < kNumSlots; ++i) out << (i ? "," : "") << kSlotNames[i];
  if (!labels.empty()) out << ",label";
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < kNumSlots; ++i) {
      if (i) out << ',';
      const double v = rows[r].values[i];
      if (is_missing(v)) {
        out << "NaN";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
      }
    }
    if (!labels.empty()) out << ',' << labels[r];
    out << '\n';
  }
}

struct LabeledMatrix {
  std::vector<MetaFeatureVector> rows;
  std::vector<int> labels;  // empty when the file has no label column
};

inline LabeledMatrix read_matrix_csv(std::istream& in) {
  CsvOptions options;
  options.null_tokens = {"", "NaN", "nan"};
  const auto table = read_dataset(in, "matrix", options);
  if (table.column_count() < kNumSlots) throw DimensionError("matrix needs 49 slot columns");
  for (std::size_t i = 0; i < kNumSlots; ++i) {
    if (table.columns[i].name != kSlotNames[i])
      throw DimensionError("matrix column " + std::to_string(i) + " is '" + table.columns[i].name +
                           "', expected '" + std::string(kSlotNames[i]) + "'");
  }
  const bool has_label = table.column_count() > kNumSlots && table.columns[kNumSlots].name == "label";
  LabeledMatrix m;
  m.rows.resize(table.row_count);
  for (std::size_t r = 0; r < table.row_count; ++r) {
    for (std::size_t i = 0; i < kNumSlots; ++i) {
      const auto& cell = table.columns[i].cells[r];
      m.rows[r].values[i] = cell ? parse_number(*cell).value_or(kMissing) : kMissing;
    }
    m.rows[r].column_name = "row_" + std::to_string(r);
    if (has_label) {
      const auto& cell = table.columns[kNumSlots].cells[r];
      m.labels.push_back(cell && *cell == "1" ? 1 : 0);
    }
  }
  return m;
}

}  // namespace phi_sentinel
