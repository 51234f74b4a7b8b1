#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "json.hpp"
#include "phi_sentinel/error.hpp"

namespace phi_sentinel {

struct MetricSet {
  double auroc = 0.0;
  double auprc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double npv = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;

  static constexpr std::array<const char*, 8> kNames = {
      "auroc", "auprc", "sensitivity", "specificity", "precision", "npv", "accuracy", "f1"};

  std::array<double, 8> as_array() const {
    return {auroc, auprc, sensitivity, specificity, precision, npv, accuracy, f1};
  }
  static MetricSet from_array(const std::array<double, 8>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }
};

inline void to_json(nlohmann::ordered_json& j, const MetricSet& m) {
  const auto values = m.as_array();
  j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < values.size(); ++i) j[MetricSet::kNames[i]] = values[i];
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion confusion(std::span<const double> scores, std::span<const int> labels,
                           double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

namespace detail {

inline double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Indices sorted by descending score; equal scores end up adjacent.
inline std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

inline void require_both_classes(std::span<const int> labels) {
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size()))
    throw UndefinedMetricError("AUROC/AUPRC need both classes present");
}

}  // namespace detail

// Trapezoidal area under the exact ROC step curve. Items with equal scores
// form one step, which is the same as counting tied pairs as one half.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  detail::require_both_classes(labels);
  const auto order = detail::descending_order(scores);
  double tp = 0, fp = 0, twice_area = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double dtp = 0, dfp = 0;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? dtp : dfp) += 1;
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
  }
  return twice_area / (2.0 * tp * fp);
}

// Average precision: sum over distinct thresholds of recall gain times the
// precision at that threshold. No interpolation.
inline double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  detail::require_both_classes(labels);
  const auto order = detail::descending_order(scores);
  double tp = 0, fp = 0, weighted = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double dtp = 0, dfp = 0;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? dtp : dfp) += 1;
    tp += dtp;
    fp += dfp;
    if (dtp > 0) weighted += dtp * tp / (tp + fp);
  }
  return weighted / tp;
}

struct MetricsResult {
  MetricSet metrics;
  bool ranking_defined = true;  // false when labels hold a single class
};

// Threshold metrics come from the confusion matrix at `threshold` (score >=
// threshold predicts positive). Ratios with an empty denominator are 0.
inline MetricsResult compute_metrics_lenient(std::span<const double> scores,
                                             std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  MetricsResult r;
  const auto c = confusion(scores, labels, threshold);
  auto& m = r.metrics;
  m.sensitivity = detail::ratio(c.tp, c.tp + c.fn);
  m.specificity = detail::ratio(c.tn, c.tn + c.fp);
  m.precision = detail::ratio(c.tp, c.tp + c.fp);
  m.npv = detail::ratio(c.tn, c.tn + c.fn);
  m.accuracy = detail::ratio(c.tp + c.tn, scores.size());
  const double denom = m.precision + m.sensitivity;
  m.f1 = denom > 0 ? 2.0 * m.precision * m.sensitivity / denom : 0.0;
  try {
    m.auroc = auroc(scores, labels);
    m.auprc = average_precision(scores, labels);
  } catch (const UndefinedMetricError&) {
    r.ranking_defined = false;
    m.auroc = m.auprc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

// Throws UndefinedMetricError for single-class labels; use the lenient form
// to still get the threshold metrics in that case.
inline MetricSet compute_metrics(std::span<const double> scores, std::span<const int> labels,
                                 double threshold) {
  const auto r = compute_metrics_lenient(scores, labels, threshold);
  if (!r.ranking_defined) throw UndefinedMetricError("AUROC/AUPRC need both classes present");
  return r.metrics;
}

struct MetricSummary {
  MetricSet mean;
  MetricSet stddev;  // population standard deviation across folds
};

inline MetricSummary summarize(std::span<const MetricSet> folds) {
  MetricSummary s;
  if (folds.empty()) return s;
  std::array<double, 8> mean{}, sd{};
  const auto n = static_cast<double>(folds.size());
  for (const auto& f : folds) {
    const auto a = f.as_array();
    for (std::size_t i = 0; i < 8; ++i) mean[i] += a[i];
  }
  for (auto& v : mean) v /= n;
  for (const auto& f : folds) {
    const auto a = f.as_array();
    for (std::size_t i = 0; i < 8; ++i) sd[i] += (a[i] - mean[i]) * (a[i] - mean[i]);
  }
  for (auto& v : sd) v = std::sqrt(v / n);
  s.mean = MetricSet::from_array(mean);
  s.stddev = MetricSet::from_array(sd);
  return s;
}

}  // namespace phi_sentinel
