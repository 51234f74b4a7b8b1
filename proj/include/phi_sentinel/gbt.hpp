#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/folds.hpp"
#include "phi_sentinel/metafeatures.hpp"
#include "phi_sentinel/parallel.hpp"
#include "phi_sentinel/version.hpp"

// Gradient-boosted decision trees for binary classification under logistic
// loss: exact greedy split search, second-order leaf weights, learned default
// directions for missing values, and Platt calibration of the raw margin.
namespace phi_sentinel::gbt {

inline double sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

// Row-major dense matrix; NaN marks a missing value.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  static FeatureMatrix from_vectors(std::span<const MetaFeatureVector> vectors) {
    FeatureMatrix m(vectors.size(), kNumSlots);
    for (std::size_t r = 0; r < vectors.size(); ++r)
      std::copy(vectors[r].values.begin(), vectors[r].values.end(), m.row(r).begin());
    return m;
  }

  FeatureMatrix select_rows(std::span<const std::size_t> indices) const {
    FeatureMatrix m(indices.size(), cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = row(indices[i]);
      std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    return m;
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x < threshold goes left
  bool default_left = true;  // route for missing values
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

// Nodes are stored in creation order; node 0 is the root and children always
// have larger indices than their parent.
struct Tree {
  std::vector<TreeNode> nodes;

  int leaf_index(std::span<const double> x) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      const double v = x[n.feature];
      const bool go_left = std::isnan(v) ? n.default_left : v < n.threshold;
      i = go_left ? n.left : n.right;
    }
    return i;
  }

  double predict(std::span<const double> x) const { return nodes[leaf_index(x)].leaf_value; }

  int depth() const {
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].is_leaf()) continue;
      d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
      deepest = std::max(deepest, d[i] + 1);
    }
    return deepest;
  }

  std::vector<int> used_features() const {
    std::vector<int> out;
    for (const auto& n : nodes)
      if (!n.is_leaf()) out.push_back(n.feature);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

inline constexpr double kDefaultEta = 0.09;

struct GbtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;
  double eta = kDefaultEta;
  // calibrated = 1 / (1 + exp(platt_a * margin + platt_b)); (-1, 0) is the
  // identity calibration.
  double platt_a = -1.0;
  double platt_b = 0.0;
  std::vector<std::string> slot_names = std::vector<std::string>(kSlotNames.begin(), kSlotNames.end());

  std::size_t num_features() const { return slot_names.size(); }
};

struct TrainParams {
  std::size_t rounds = 100;
  int max_depth = 6;
  double eta = kDefaultEta;
  double lambda = 1.0;
  double min_hessian = 1e-6;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct TrainingLog {
  // Mean logistic loss of the training set; entry 0 is the base score,
  // entry t is after round t.
  std::vector<double> loss;
};

inline double predict_margin(const GbtModel& model, std::span<const double> x) {
  if (x.size() != model.num_features())
    throw DimensionError("expected " + std::to_string(model.num_features()) + " features, got " +
                         std::to_string(x.size()));
  double sum = 0.0;
  for (const auto& t : model.trees) sum += t.predict(x);
  return model.base_score + model.eta * sum;
}

inline double predict_margin(const GbtModel& model, const MetaFeatureVector& x) {
  return predict_margin(model, std::span<const double>(x.values));
}

inline double predict_proba_raw(const GbtModel& model, std::span<const double> x) {
  return sigmoid(predict_margin(model, x));
}

inline double calibrate(const GbtModel& model, double margin) {
  return sigmoid(-(model.platt_a * margin + model.platt_b));
}

inline double predict_proba_calibrated(const GbtModel& model, std::span<const double> x) {
  return calibrate(model, predict_margin(model, x));
}

inline double mean_log_loss(std::span<const double> margins, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    // log(1 + exp(-m)) for y = 1, log(1 + exp(m)) for y = 0, computed stably
    const double z = labels[i] ? -margins[i] : margins[i];
    total += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return total / static_cast<double>(margins.size());
}

namespace detail {

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;

  bool valid() const { return feature >= 0; }
};

inline double score(double g, double h, double lambda) { return g * g / (h + lambda); }

inline double midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return m > a ? m : b;
}

// Level-wise exact greedy builder. Every feature is pre-sorted once; each
// level makes one pass per feature over the sorted rows, scanning all active
// nodes at the same time.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const TrainParams& params)
      : x_(x), params_(params), sorted_(x.cols) {
    for (std::size_t f = 0; f < x.cols; ++f) {
      auto& order = sorted_[f];
      for (std::size_t r = 0; r < x.rows; ++r)
        if (!std::isnan(x.at(r, f))) order.push_back(static_cast<std::uint32_t>(r));
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
    }
  }

  Tree build(std::span<const double> grad, std::span<const double> hess) const {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of_row(x_.rows, 0);
    std::vector<int> active = {0};
    for (int depth = 0; !active.empty(); ++depth) {
      std::vector<NodeStats> totals(tree.nodes.size());
      for (std::size_t r = 0; r < x_.rows; ++r) {
        if (node_of_row[r] < 0) continue;
        totals[node_of_row[r]].grad += grad[r];
        totals[node_of_row[r]].hess += hess[r];
      }
      std::vector<SplitCandidate> best(tree.nodes.size());
      if (depth < params_.max_depth) best = find_splits(tree.nodes.size(), active, node_of_row, totals, grad, hess);

      std::vector<int> next_active;
      for (int n : active) {
        const auto& split = best[n];
        if (split.valid() && split.gain > 0.0) {
          const int left = static_cast<int>(tree.nodes.size());
          tree.nodes.emplace_back();
          tree.nodes.emplace_back();
          auto& node = tree.nodes[n];
          node.feature = split.feature;
          node.threshold = split.threshold;
          node.default_left = split.default_left;
          node.left = left;
          node.right = left + 1;
          next_active.push_back(left);
          next_active.push_back(left + 1);
        } else {
          tree.nodes[n].leaf_value = -totals[n].grad / (totals[n].hess + params_.lambda);
        }
      }
      for (std::size_t r = 0; r < x_.rows; ++r) {
        const int n = node_of_row[r];
        if (n < 0) continue;
        const auto& node = tree.nodes[n];
        if (node.is_leaf()) {
          node_of_row[r] = -1;
          continue;
        }
        const double v = x_.at(r, node.feature);
        const bool go_left = std::isnan(v) ? node.default_left : v < node.threshold;
        node_of_row[r] = go_left ? node.left : node.right;
      }
      active = std::move(next_active);
    }
    return tree;
  }

 private:
  std::vector<SplitCandidate> find_splits(std::size_t node_count, const std::vector<int>& active,
                                          const std::vector<int>& node_of_row,
                                          const std::vector<NodeStats>& totals,
                                          std::span<const double> grad,
                                          std::span<const double> hess) const {
    // per_feature[f][n]: best split of node n on feature f
    std::vector<std::vector<SplitCandidate>> per_feature(x_.cols);
    parallel_for(x_.cols, params_.threads, [&](std::size_t f) {
      per_feature[f] = scan_feature(f, node_count, node_of_row, totals, grad, hess);
    });
    std::vector<SplitCandidate> best(node_count);
    for (int n : active) {
      if (totals[n].hess < params_.min_hessian) continue;
      for (std::size_t f = 0; f < x_.cols; ++f) {
        const auto& c = per_feature[f][n];
        if (c.valid() && c.gain > best[n].gain) best[n] = c;
      }
    }
    return best;
  }

  std::vector<SplitCandidate> scan_feature(std::size_t f, std::size_t node_count,
                                           const std::vector<int>& node_of_row,
                                           const std::vector<NodeStats>& totals,
                                           std::span<const double> grad,
                                           std::span<const double> hess) const {
    const auto& order = sorted_[f];
    const double lambda = params_.lambda;
    std::vector<NodeStats> present(node_count);
    for (auto r : order) {
      const int n = node_of_row[r];
      if (n < 0) continue;
      present[n].grad += grad[r];
      present[n].hess += hess[r];
    }
    struct ScanState {
      NodeStats left;
      double last = 0.0;
      bool started = false;
    };
    std::vector<ScanState> state(node_count);
    std::vector<SplitCandidate> best(node_count);
    for (auto r : order) {
      const int n = node_of_row[r];
      if (n < 0) continue;
      const double v = x_.at(r, f);
      auto& s = state[n];
      if (s.started && v > s.last) {
        const NodeStats total = totals[n];
        const NodeStats missing{total.grad - present[n].grad, total.hess - present[n].hess};
        const NodeStats right{present[n].grad - s.left.grad, present[n].hess - s.left.hess};
        const double parent = score(total.grad, total.hess, lambda);
        // missing values to the left child
        const double hl_a = s.left.hess + missing.hess;
        const double gain_a =
            0.5 * (score(s.left.grad + missing.grad, hl_a, lambda) + score(right.grad, right.hess, lambda) - parent);
        // missing values to the right child
        const double hr_b = right.hess + missing.hess;
        const double gain_b =
            0.5 * (score(s.left.grad, s.left.hess, lambda) + score(right.grad + missing.grad, hr_b, lambda) - parent);
        const bool left_default = !(gain_b > gain_a);
        const double gain = left_default ? gain_a : gain_b;
        const double h_left = left_default ? hl_a : s.left.hess;
        const double h_right = left_default ? right.hess : hr_b;
        if (h_left >= params_.min_hessian && h_right >= params_.min_hessian && gain > best[n].gain) {
          best[n] = {gain, static_cast<int>(f), midpoint(s.last, v), left_default};
        }
      }
      s.left.grad += grad[r];
      s.left.hess += hess[r];
      s.last = v;
      s.started = true;
    }
    return best;
  }

  const FeatureMatrix& x_;
  TrainParams params_;
  std::vector<std::vector<std::uint32_t>> sorted_;
};

inline void check_training_data(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows != y.size())
    throw DimensionError("feature rows (" + std::to_string(x.rows) + ") and labels (" +
                         std::to_string(y.size()) + ") differ");
  if (x.rows < 2) throw DimensionError("need at least two training rows");
  const auto pos = std::count_if(y.begin(), y.end(), [](int v) { return v != 0; });
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
    throw DegenerateModelError("training labels contain a single class");
}

}  // namespace detail

// Fits `rounds` trees to the logistic loss. Results are bit-identical for
// any thread count.
inline GbtModel train(const FeatureMatrix& x, std::span<const int> y, const TrainParams& params = {},
                      TrainingLog* log = nullptr) {
  detail::check_training_data(x, y);
  GbtModel model;
  model.eta = params.eta;
  if (x.cols != kNumSlots) {
    model.slot_names.clear();
    for (std::size_t i = 0; i < x.cols; ++i) model.slot_names.push_back("f" + std::to_string(i));
  }
  const double positives = static_cast<double>(std::count_if(y.begin(), y.end(), [](int v) { return v != 0; }));
  const double prior = positives / static_cast<double>(y.size());
  model.base_score = std::log(prior / (1.0 - prior));

  std::vector<double> margin(x.rows, model.base_score);
  std::vector<double> grad(x.rows), hess(x.rows);
  if (log) {
    log->loss.clear();
    log->loss.push_back(mean_log_loss(margin, y));
  }
  const detail::TreeBuilder builder(x, params);
  for (std::size_t round = 0; round < params.rounds; ++round) {
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double p = sigmoid(margin[r]);
      grad[r] = p - (y[r] ? 1.0 : 0.0);
      hess[r] = p * (1.0 - p);
    }
    model.trees.push_back(builder.build(grad, hess));
    const auto& tree = model.trees.back();
    for (std::size_t r = 0; r < x.rows; ++r) margin[r] += model.eta * tree.predict(x.row(r));
    if (log) log->loss.push_back(mean_log_loss(margin, y));
  }
  return model;
}

// ---- Platt scaling ----

struct PlattParams {
  double a = -1.0;
  double b = 0.0;
};

// Fits p(y=1|s) = 1 / (1 + exp(a*s + b)) by Newton's method with backtracking
// on the smoothed targets (N+ + 1)/(N+ + 2) and 1/(N- + 2).
inline PlattParams fit_platt(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  const double prior1 = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int v) { return v != 0; }));
  const double prior0 = static_cast<double>(labels.size()) - prior1;
  if (prior1 == 0 || prior0 == 0) throw CalibrationError("calibration needs both classes");

  constexpr int kMaxIterations = 200;
  constexpr double kMinStep = 1e-12;
  constexpr double kSigma = 1e-12;
  constexpr double kGradientTolerance = 1e-10;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  const std::size_t n = scores.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] ? hi_target : lo_target;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int it = 0; it < kMaxIterations; ++it) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::hypot(g1, g2) < kGradientTolerance) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  return {a, b};
}

struct CalibratedTraining {
  GbtModel model;
  TrainingLog log;
  std::vector<double> out_of_fold_margins;
  bool calibrated = false;  // false: identity calibration was kept
  std::string calibration_note;
};

inline constexpr std::size_t kCalibrationFolds = 5;

// Trains the final model on everything and fits Platt parameters on margins
// from an internal stratified k-fold split, so the calibrator never sees
// in-sample margins.
inline CalibratedTraining train_calibrated(const FeatureMatrix& x, std::span<const int> y,
                                           const TrainParams& params = {},
                                           std::size_t folds = kCalibrationFolds) {
  CalibratedTraining out;
  out.model = train(x, y, params, &out.log);
  const auto positives = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](int v) { return v != 0; }));
  const auto k = std::min({folds, positives, y.size() - positives});
  if (k < 2) {
    out.calibration_note = "too few examples per class for out-of-fold calibration; identity calibration kept";
    return out;
  }
  const auto assignment = stratified_folds(y, k, random::mix_seed(params.seed, 0xCA11B));
  out.out_of_fold_margins.assign(y.size(), 0.0);
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < y.size(); ++i) (assignment[i] == fold ? held_rows : train_rows).push_back(i);
    std::vector<int> train_labels;
    for (auto i : train_rows) train_labels.push_back(y[i]);
    const auto fold_model = train(x.select_rows(train_rows), train_labels, params);
    for (auto i : held_rows) out.out_of_fold_margins[i] = predict_margin(fold_model, x.row(i));
  }
  try {
    const auto platt = fit_platt(out.out_of_fold_margins, y);
    out.model.platt_a = platt.a;
    out.model.platt_b = platt.b;
    out.calibrated = true;
  } catch (const CalibrationError& e) {
    out.calibration_note = std::string(e.what()) + "; identity calibration kept";
  }
  return out;
}

// ---- serialization ----

inline nlohmann::ordered_json model_to_json(const GbtModel& model) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["base_score"] = model.base_score;
  doc["eta"] = model.eta;
  doc["platt"] = {{"a", model.platt_a}, {"b", model.platt_b}};
  doc["slot_names"] = model.slot_names;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : model.trees) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({{"feat", n.feature},
                       {"thr", n.threshold},
                       {"default_left", n.default_left},
                       {"left", n.left},
                       {"right", n.right},
                       {"leaf", n.leaf_value}});
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc;
}

inline GbtModel model_from_json(const nlohmann::json& doc) {
  GbtModel model;
  try {
    if (!doc.is_object()) throw ModelFormatError("model document must be a JSON object");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelFormatError("unsupported model format_version " + std::to_string(version) +
                             " (expected " + std::to_string(kModelFormatVersion) + ")");
    model.base_score = doc.at("base_score").get<double>();
    model.eta = doc.at("eta").get<double>();
    model.platt_a = doc.at("platt").at("a").get<double>();
    model.platt_b = doc.at("platt").at("b").get<double>();
    model.slot_names = doc.at("slot_names").get<std::vector<std::string>>();
    const auto width = static_cast<int>(model.slot_names.size());
    for (const auto& jt : doc.at("trees")) {
      Tree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        n.feature = jn.at("feat").get<int>();
        n.threshold = jn.at("thr").get<double>();
        n.default_left = jn.at("default_left").get<bool>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.leaf_value = jn.at("leaf").get<double>();
        tree.nodes.push_back(n);
      }
      const auto size = static_cast<int>(tree.nodes.size());
      if (size == 0) throw ModelFormatError("tree with no nodes");
      for (int i = 0; i < size; ++i) {
        const auto& n = tree.nodes[i];
        if (n.is_leaf()) continue;
        if (n.feature >= width || n.left <= i || n.right <= i || n.left >= size || n.right >= size)
          throw ModelFormatError("malformed tree node " + std::to_string(i));
      }
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model document: ") + e.what());
  }
  return model;
}

inline std::string model_to_string(const GbtModel& model) { return model_to_json(model).dump(); }

inline void save_model(const GbtModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

inline GbtModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

// FNV-1a over the compact serialization; identifies a model in reports.
inline std::string model_hash(const GbtModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : model_to_string(model)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace phi_sentinel::gbt
