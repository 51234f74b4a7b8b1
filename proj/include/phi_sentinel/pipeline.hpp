#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/explain.hpp"
#include "phi_sentinel/folds.hpp"
#include "phi_sentinel/gbt.hpp"
#include "phi_sentinel/ingest.hpp"
#include "phi_sentinel/metafeatures.hpp"
#include "phi_sentinel/metrics.hpp"
#include "phi_sentinel/parallel.hpp"
#include "phi_sentinel/regex_screen.hpp"
#include "phi_sentinel/version.hpp"

namespace phi_sentinel {

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr double kParanoidThreshold = 0.2;

// The combination rule: take the larger probability, so a column flagged by
// either detector stays flagged.
inline double ensemble(double prob_ml_calibrated, double prob_regex) {
  return std::max(prob_ml_calibrated, prob_regex);
}

struct SlotContribution {
  std::string slot;
  double value = 0.0;
};

struct ColumnVerdict {
  std::string column_name;
  double prob_regex = 0.0;
  double prob_ml_raw = 0.0;
  double prob_ml_calibrated = 0.0;
  double prob_final = 0.0;
  bool predicted = false;
  std::optional<std::string> best_pattern_id;
  std::vector<SlotContribution> top_attributions;
  bool no_data = false;
  std::optional<DataType> inferred_type;
};

struct ScanOptions {
  std::size_t k = kDefaultSampleSize;
  std::uint64_t seed = 42;
  double threshold = kDefaultThreshold;
  unsigned threads = 0;
  // Attributions per column; the background is a subsample of the scanned
  // dataset's own profiles.
  std::size_t top_attributions = 0;
};

inline ColumnVerdict make_verdict(std::string name, double prob_regex, double margin,
                                  const gbt::GbtModel& model, double threshold) {
  ColumnVerdict v;
  v.column_name = std::move(name);
  v.prob_regex = prob_regex;
  v.prob_ml_raw = gbt::sigmoid(margin);
  v.prob_ml_calibrated = gbt::calibrate(model, margin);
  v.prob_final = ensemble(v.prob_ml_calibrated, v.prob_regex);
  v.predicted = v.prob_final >= threshold;
  return v;
}

inline std::vector<ColumnVerdict> scan(const Dataset& dataset, const gbt::GbtModel& model,
                                       const PatternLibrary& library, const ScanOptions& options = {}) {
  if (options.threshold < 0.0 || options.threshold > 1.0) throw Error("threshold must lie in [0, 1]");
  if (model.num_features() != kNumSlots) throw DimensionError("model was not trained on the 49-slot profile");
  const auto m = dataset.columns.size();
  std::vector<ColumnVerdict> verdicts(m);
  std::vector<std::optional<MetaFeatureVector>> vectors(m);
  parallel_for(m, options.threads, [&](std::size_t c) {
    const auto& column = dataset.columns[c];
    try {
      const auto sample = sample_column(column, options.k, options.seed);
      const auto regex = screen_column(sample, library);
      vectors[c] = column_vector(sample);
      verdicts[c] = make_verdict(column.name, regex.prob_phi, gbt::predict_margin(model, *vectors[c]), model,
                                 options.threshold);
      verdicts[c].best_pattern_id = regex.best_pattern_id;
      verdicts[c].inferred_type = sample.inferred_type;
    } catch (const EmptySampleError&) {
      verdicts[c] = ColumnVerdict{};
      verdicts[c].column_name = column.name;
      verdicts[c].no_data = true;
      verdicts[c].predicted = options.threshold <= 0.0;
    }
  });

  if (options.top_attributions > 0) {
    std::vector<MetaFeatureVector> present;
    for (const auto& v : vectors)
      if (v) present.push_back(*v);
    if (!present.empty()) {
      const auto background =
          explain::sample_background(gbt::FeatureMatrix::from_vectors(present), options.seed);
      parallel_for(m, options.threads, [&](std::size_t c) {
        if (!vectors[c]) return;
        const auto attribution = explain::shap_values(model, *vectors[c], background);
        std::vector<std::size_t> order(kNumSlots);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return std::fabs(attribution.phi[a]) > std::fabs(attribution.phi[b]);
        });
        for (std::size_t i = 0; i < std::min(options.top_attributions, order.size()); ++i) {
          if (attribution.phi[order[i]] == 0.0) break;
          verdicts[c].top_attributions.push_back({model.slot_names[order[i]], attribution.phi[order[i]]});
        }
      });
    }
  }
  return verdicts;
}

// ---- labeled column profiles, shared by training and evaluation ----

struct ColumnProfile {
  std::string dataset_name;
  std::string column_name;
  MetaFeatureVector vector;
  double prob_regex = 0.0;
  std::optional<std::string> best_pattern_id;
  int label = 0;
  std::optional<PhiCategory> category;
};

struct ProfileOptions {
  std::size_t k = kDefaultSampleSize;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

// Profiles every labeled column with data. Unlabeled and all-null columns are
// skipped; `skipped` (if given) receives their count.
inline std::vector<ColumnProfile> profile_labeled(std::span<const Dataset> datasets, const PatternLibrary& library,
                                                  const ProfileOptions& options = {},
                                                  std::size_t* skipped = nullptr) {
  struct Job {
    const Dataset* dataset;
    const Column* column;
  };
  std::vector<Job> jobs;
  std::size_t skip_count = 0;
  for (const auto& d : datasets)
    for (const auto& c : d.columns) {
      if (c.label) {
        jobs.push_back({&d, &c});
      } else {
        ++skip_count;
      }
    }
  std::vector<std::optional<ColumnProfile>> results(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    const auto& [dataset, column] = jobs[i];
    try {
      const auto sample = sample_column(*column, options.k, options.seed);
      const auto regex = screen_column(sample, library);
      ColumnProfile p;
      p.dataset_name = dataset->name;
      p.column_name = column->name;
      p.vector = column_vector(sample);
      p.prob_regex = regex.prob_phi;
      p.best_pattern_id = regex.best_pattern_id;
      p.label = *column->label;
      p.category = column->category;
      results[i] = std::move(p);
    } catch (const EmptySampleError&) {
    }
  });
  std::vector<ColumnProfile> out;
  for (auto& r : results) {
    if (r) {
      out.push_back(std::move(*r));
    } else {
      ++skip_count;
    }
  }
  if (skipped) *skipped = skip_count;
  return out;
}

inline gbt::FeatureMatrix profile_matrix(std::span<const ColumnProfile> profiles) {
  gbt::FeatureMatrix m(profiles.size(), kNumSlots);
  for (std::size_t r = 0; r < profiles.size(); ++r)
    std::copy(profiles[r].vector.values.begin(), profiles[r].vector.values.end(), m.row(r).begin());
  return m;
}

inline std::vector<int> profile_labels(std::span<const ColumnProfile> profiles) {
  std::vector<int> y;
  y.reserve(profiles.size());
  for (const auto& p : profiles) y.push_back(p.label);
  return y;
}

// ---- cross validation ----

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  double threshold = kDefaultThreshold;
  gbt::TrainParams params;
  unsigned threads = 0;
};

struct FoldResult {
  std::vector<std::size_t> test_rows;
  MetricSet regex;
  MetricSet ml;
  MetricSet ensemble;
  std::vector<double> ml_calibrated;  // aligned with test_rows
  std::vector<double> final_scores;   // aligned with test_rows
};

struct CvResult {
  std::vector<std::size_t> assignment;
  std::vector<FoldResult> folds;
  std::vector<gbt::GbtModel> fold_models;
  MetricSummary regex;
  MetricSummary ml;
  MetricSummary ensemble;
};

// Stratified k-fold evaluation of the three detectors. The GBT and its
// calibration are fit on the training folds only; the regex screen has
// nothing to fit and is scored directly on each held-out fold.
inline CvResult cross_validate(const gbt::FeatureMatrix& x, std::span<const int> y,
                               std::span<const double> regex_probs, const CvOptions& options = {}) {
  if (x.rows != y.size() || y.size() != regex_probs.size())
    throw DimensionError("features, labels and regex probabilities differ in length");
  CvResult result;
  result.assignment = stratified_folds(y, options.folds, options.seed);
  result.folds.resize(options.folds);
  result.fold_models.resize(options.folds);
  auto inner = options.params;
  inner.threads = 1;
  parallel_for(options.folds, options.threads, [&](std::size_t fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < y.size(); ++i) (result.assignment[i] == fold ? test_rows : train_rows).push_back(i);
    std::vector<int> train_y, test_y;
    for (auto i : train_rows) train_y.push_back(y[i]);
    for (auto i : test_rows) test_y.push_back(y[i]);
    auto trained = gbt::train_calibrated(x.select_rows(train_rows), train_y, inner);
    auto& fr = result.folds[fold];
    fr.test_rows = test_rows;
    std::vector<double> regex_scores;
    for (auto i : test_rows) {
      const double margin = gbt::predict_margin(trained.model, x.row(i));
      const double cal = gbt::calibrate(trained.model, margin);
      fr.ml_calibrated.push_back(cal);
      regex_scores.push_back(regex_probs[i]);
      fr.final_scores.push_back(ensemble(cal, regex_probs[i]));
    }
    fr.regex = compute_metrics_lenient(regex_scores, test_y, options.threshold).metrics;
    fr.ml = compute_metrics_lenient(fr.ml_calibrated, test_y, options.threshold).metrics;
    fr.ensemble = compute_metrics_lenient(fr.final_scores, test_y, options.threshold).metrics;
    result.fold_models[fold] = std::move(trained.model);
  });
  std::vector<MetricSet> regex, ml, ens;
  for (const auto& f : result.folds) {
    regex.push_back(f.regex);
    ml.push_back(f.ml);
    ens.push_back(f.ensemble);
  }
  result.regex = summarize(regex);
  result.ml = summarize(ml);
  result.ensemble = summarize(ens);
  return result;
}

inline std::string format_mean_std(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f(%.3f)", mean, sd);
  return buf;
}

// Plain-text "mean(std)" table, one row per detector.
inline std::string format_metric_table(const CvResult& cv) {
  std::ostringstream out;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%-9s", "");
  out << buf;
  for (auto name : MetricSet::kNames) {
    std::snprintf(buf, sizeof buf, " %-13s", name);
    out << buf;
  }
  out << '\n';
  auto row = [&](const char* label, const MetricSummary& s) {
    std::snprintf(buf, sizeof buf, "%-9s", label);
    out << buf;
    const auto mean = s.mean.as_array();
    const auto sd = s.stddev.as_array();
    for (std::size_t i = 0; i < mean.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %-13s", format_mean_std(mean[i], sd[i]).c_str());
      out << buf;
    }
    out << '\n';
  };
  row("Regex", cv.regex);
  row("ML", cv.ml);
  row("Ensemble", cv.ensemble);
  return out.str();
}

inline nlohmann::ordered_json summary_to_json(const MetricSummary& s, std::span<const MetricSet> folds) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["std"] = s.stddev;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : folds) j["folds"].push_back(f);
  return j;
}

inline nlohmann::ordered_json cv_to_json(const CvResult& cv) {
  std::vector<MetricSet> regex, ml, ens;
  for (const auto& f : cv.folds) {
    regex.push_back(f.regex);
    ml.push_back(f.ml);
    ens.push_back(f.ensemble);
  }
  nlohmann::ordered_json j;
  j["regex"] = summary_to_json(cv.regex, regex);
  j["ml"] = summary_to_json(cv.ml, ml);
  j["ensemble"] = summary_to_json(cv.ensemble, ens);
  return j;
}

// ---- report ----

struct ReportMeta {
  std::string tool_version = kToolVersion;
  std::string library_version;
  std::string model_hash;
  std::size_t k = kDefaultSampleSize;
  std::uint64_t seed = 42;
  double threshold = kDefaultThreshold;
};

inline nlohmann::ordered_json verdict_to_json(const ColumnVerdict& v) {
  nlohmann::ordered_json j;
  j["column_name"] = v.column_name;
  j["prob_regex"] = v.prob_regex;
  j["prob_ml_raw"] = v.prob_ml_raw;
  j["prob_ml_calibrated"] = v.prob_ml_calibrated;
  j["prob_final"] = v.prob_final;
  j["predicted"] = v.predicted ? 1 : 0;
  j["best_pattern_id"] = v.best_pattern_id ? nlohmann::ordered_json(*v.best_pattern_id) : nullptr;
  j["inferred_type"] = v.inferred_type ? nlohmann::ordered_json(to_string(*v.inferred_type)) : nullptr;
  j["no_data"] = v.no_data;
  j["top_attributions"] = nlohmann::ordered_json::array();
  for (const auto& a : v.top_attributions) j["top_attributions"].push_back({{"slot", a.slot}, {"value", a.value}});
  return j;
}

inline nlohmann::ordered_json build_report(std::span<const ColumnVerdict> verdicts, const ReportMeta& meta,
                                           const nlohmann::ordered_json* metrics = nullptr) {
  nlohmann::ordered_json doc;
  doc["meta"] = {{"tool_version", meta.tool_version}, {"library_version", meta.library_version},
                 {"model_hash", meta.model_hash},     {"k", meta.k},
                 {"seed", meta.seed},                 {"threshold", meta.threshold}};
  doc["columns"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) doc["columns"].push_back(verdict_to_json(v));
  if (metrics) doc["metrics"] = *metrics;
  return doc;
}

inline void write_report(std::span<const ColumnVerdict> verdicts, const ReportMeta& meta, const std::string& path,
                         const nlohmann::ordered_json* metrics = nullptr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report to " + path);
  out << build_report(verdicts, meta, metrics).dump(2) << '\n';
  if (!out) throw IoError("failed writing report to " + path);
}

}  // namespace phi_sentinel
