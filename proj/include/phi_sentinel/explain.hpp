#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "phi_sentinel/error.hpp"
#include "phi_sentinel/gbt.hpp"
#include "phi_sentinel/parallel.hpp"
#include "phi_sentinel/random.hpp"

// Interventional Shapley values for tree ensembles, on the margin scale.
//
// For one explained row x and one background row b, a tree's value for a
// coalition S is its output on the hybrid row taking S from x and the rest
// from b. Walking the tree, a node whose feature sends x and b the same way
// does not depend on S; otherwise the walk forks, recording the feature as
// "must come from x" (set A) on x's branch or "must come from b" (set B) on
// b's branch. Each reachable leaf is then the game 1[A in S, B out of S],
// whose Shapley values are closed form:
//   i in A:  +v * (|A|-1)! |B|! / (|A|+|B|)!
//   j in B:  -v * |A|! (|B|-1)! / (|A|+|B|)!
// Averaging over background rows gives the attribution.
namespace phi_sentinel::explain {

struct Attribution {
  std::string column_name;
  double phi0 = 0.0;  // mean margin over the background rows
  std::vector<double> phi;
  double margin = 0.0;  // model margin of the explained row
};

namespace detail {

// weights(a, c) = a! c! / (a + c + 1)!
class ShapleyWeights {
 public:
  explicit ShapleyWeights(std::size_t max_terms) : n_(max_terms + 1), table_(n_ * n_, 0.0) {
    std::vector<double> log_fact(2 * n_ + 2, 0.0);
    for (std::size_t i = 1; i < log_fact.size(); ++i) log_fact[i] = log_fact[i - 1] + std::log(static_cast<double>(i));
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t c = 0; c < n_; ++c)
        table_[a * n_ + c] = std::exp(log_fact[a] + log_fact[c] - log_fact[a + c + 1]);
  }
  double operator()(std::size_t a, std::size_t c) const { return table_[a * n_ + c]; }

 private:
  std::size_t n_;
  std::vector<double> table_;
};

enum class Origin : unsigned char { kFree, kFromX, kFromB };

class TreeWalker {
 public:
  TreeWalker(const gbt::Tree& tree, std::span<const double> x, std::span<const double> b,
             const ShapleyWeights& weights, std::span<double> phi, double scale)
      : tree_(tree), x_(x), b_(b), weights_(weights), phi_(phi), scale_(scale), origin_(x.size(), Origin::kFree) {}

  void run() { walk(0); }

 private:
  static bool goes_left(const gbt::TreeNode& n, double v) {
    return std::isnan(v) ? n.default_left : v < n.threshold;
  }

  void walk(int index) {
    const auto& node = tree_.nodes[index];
    if (node.is_leaf()) {
      credit(node.leaf_value * scale_);
      return;
    }
    const auto f = static_cast<std::size_t>(node.feature);
    const bool x_left = goes_left(node, x_[f]);
    const bool b_left = goes_left(node, b_[f]);
    switch (origin_[f]) {
      case Origin::kFromX:
        walk(x_left ? node.left : node.right);
        return;
      case Origin::kFromB:
        walk(b_left ? node.left : node.right);
        return;
      case Origin::kFree:
        break;
    }
    if (x_left == b_left) {
      walk(x_left ? node.left : node.right);
      return;
    }
    origin_[f] = Origin::kFromX;
    from_x_.push_back(f);
    walk(x_left ? node.left : node.right);
    from_x_.pop_back();
    origin_[f] = Origin::kFromB;
    from_b_.push_back(f);
    walk(b_left ? node.left : node.right);
    from_b_.pop_back();
    origin_[f] = Origin::kFree;
  }

  void credit(double value) {
    const auto a = from_x_.size();
    const auto c = from_b_.size();
    if (a + c == 0 || value == 0.0) return;
    if (a > 0) {
      const double w = value * weights_(a - 1, c);
      for (auto i : from_x_) phi_[i] += w;
    }
    if (c > 0) {
      const double w = value * weights_(a, c - 1);
      for (auto j : from_b_) phi_[j] -= w;
    }
  }

  const gbt::Tree& tree_;
  std::span<const double> x_;
  std::span<const double> b_;
  const ShapleyWeights& weights_;
  std::span<double> phi_;
  double scale_;
  std::vector<Origin> origin_;
  std::vector<std::size_t> from_x_;
  std::vector<std::size_t> from_b_;
};

inline std::size_t max_tree_depth(const gbt::GbtModel& model) {
  int d = 0;
  for (const auto& t : model.trees) d = std::max(d, t.depth());
  return static_cast<std::size_t>(d);
}

}  // namespace detail

inline Attribution shap_values(const gbt::GbtModel& model, std::span<const double> x,
                               const gbt::FeatureMatrix& background, std::string column_name = {}) {
  const auto width = model.num_features();
  if (x.size() != width) throw DimensionError("explained row has the wrong number of features");
  if (background.rows == 0) throw Error("background set is empty");
  if (background.cols != width) throw DimensionError("background has the wrong number of features");

  Attribution out;
  out.column_name = std::move(column_name);
  out.phi.assign(width, 0.0);
  out.margin = gbt::predict_margin(model, x);
  const detail::ShapleyWeights weights(std::max<std::size_t>(detail::max_tree_depth(model), 1));
  const double scale = model.eta / static_cast<double>(background.rows);
  double phi0 = 0.0;
  for (std::size_t r = 0; r < background.rows; ++r) {
    const auto b = background.row(r);
    phi0 += gbt::predict_margin(model, b);
    for (const auto& tree : model.trees) detail::TreeWalker(tree, x, b, weights, out.phi, scale).run();
  }
  out.phi0 = phi0 / static_cast<double>(background.rows);
  return out;
}

inline Attribution shap_values(const gbt::GbtModel& model, const MetaFeatureVector& x,
                               const gbt::FeatureMatrix& background) {
  return shap_values(model, std::span<const double>(x.values), background, x.column_name);
}

inline constexpr std::size_t kBackgroundRows = 100;

// Seeded subsample of at most `rows` training rows.
inline gbt::FeatureMatrix sample_background(const gbt::FeatureMatrix& training, std::uint64_t seed,
                                            std::size_t rows = kBackgroundRows) {
  std::vector<std::size_t> idx(training.rows);
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > rows) {
    random::Rng rng(seed);
    random::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(rows);
    std::sort(idx.begin(), idx.end());
  }
  return training.select_rows(idx);
}

struct SlotImportance {
  std::size_t slot = 0;
  std::string name;
  double importance = 0.0;  // normalized to [0, 1]
  double stddev = 0.0;      // across folds; 0 without fold models
};

struct ImportanceReport {
  std::vector<double> importance;  // per slot, normalized so the max is 1
  std::vector<double> stddev;      // per slot, same scale
  std::vector<SlotImportance> ranking;  // descending importance, ties by slot

  std::vector<SlotImportance> top(std::size_t k) const {
    return {ranking.begin(), ranking.begin() + std::min(k, ranking.size())};
  }
};

// Mean |phi| per slot over the rows, before normalization.
inline std::vector<double> mean_abs_shap(const gbt::GbtModel& model, const gbt::FeatureMatrix& rows,
                                         const gbt::FeatureMatrix& background, unsigned threads = 0) {
  std::vector<std::vector<double>> per_row(rows.rows);
  parallel_for(rows.rows, threads, [&](std::size_t r) {
    per_row[r] = shap_values(model, rows.row(r), background).phi;
  });
  std::vector<double> total(model.num_features(), 0.0);
  for (const auto& phi : per_row)
    for (std::size_t j = 0; j < phi.size(); ++j) total[j] += std::fabs(phi[j]);
  for (auto& v : total) v /= static_cast<double>(std::max<std::size_t>(rows.rows, 1));
  return total;
}

namespace detail {

inline void normalize_by_max(std::vector<double>& v, std::vector<double>* companion = nullptr) {
  const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  if (peak <= 0.0) return;
  for (auto& x : v) x /= peak;
  if (companion)
    for (auto& x : *companion) x /= peak;
}

inline std::vector<SlotImportance> rank(const std::vector<double>& importance,
                                        const std::vector<double>& stddev,
                                        const std::vector<std::string>& names) {
  std::vector<SlotImportance> out;
  for (std::size_t j = 0; j < importance.size(); ++j)
    out.push_back({j, j < names.size() ? names[j] : std::to_string(j), importance[j], stddev[j]});
  std::stable_sort(out.begin(), out.end(),
                   [](const SlotImportance& a, const SlotImportance& b) { return a.importance > b.importance; });
  return out;
}

}  // namespace detail

inline ImportanceReport importance_report(const gbt::GbtModel& model, const gbt::FeatureMatrix& rows,
                                          const gbt::FeatureMatrix& background, unsigned threads = 0) {
  if (rows.rows == 0) throw Error("importance report needs at least one row");
  ImportanceReport report;
  report.importance = mean_abs_shap(model, rows, background, threads);
  report.stddev.assign(report.importance.size(), 0.0);
  detail::normalize_by_max(report.importance);
  report.ranking = detail::rank(report.importance, report.stddev, model.slot_names);
  return report;
}

// Cross-fold form: each fold model's importances are normalized on their own,
// then averaged; the mean is renormalized and the spread scaled to match.
inline ImportanceReport importance_report(std::span<const gbt::GbtModel> fold_models,
                                          const gbt::FeatureMatrix& rows,
                                          const gbt::FeatureMatrix& background, unsigned threads = 0) {
  if (rows.rows == 0) throw Error("importance report needs at least one row");
  if (fold_models.empty()) throw Error("no fold models given");
  const auto width = fold_models.front().num_features();
  std::vector<std::vector<double>> folds;
  for (const auto& m : fold_models) {
    auto imp = mean_abs_shap(m, rows, background, threads);
    detail::normalize_by_max(imp);
    folds.push_back(std::move(imp));
  }
  ImportanceReport report;
  report.importance.assign(width, 0.0);
  report.stddev.assign(width, 0.0);
  const auto n = static_cast<double>(folds.size());
  for (const auto& f : folds)
    for (std::size_t j = 0; j < width; ++j) report.importance[j] += f[j] / n;
  for (const auto& f : folds)
    for (std::size_t j = 0; j < width; ++j)
      report.stddev[j] += (f[j] - report.importance[j]) * (f[j] - report.importance[j]) / n;
  for (auto& s : report.stddev) s = std::sqrt(s);
  detail::normalize_by_max(report.importance, &report.stddev);
  report.ranking = detail::rank(report.importance, report.stddev, fold_models.front().slot_names);
  return report;
}

}  // namespace phi_sentinel::explain
