#include "glovenet/decision_tree.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "glovenet/error.hpp"

namespace glovenet {

namespace {

constexpr double kMinImpurityDecrease = 1e-12;

int majority(std::span<const std::size_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct SplitChoice {
  int feature = -1;
  float threshold = 0.0f;
  double decrease = 0.0;
};

}  // namespace

double gini_impurity(std::span<const std::size_t> class_counts) {
  std::size_t total = 0;
  for (std::size_t c : class_counts) total += c;
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

DecisionTree DecisionTree::fit(const FeatureMatrix& features, std::span<const int> labels, std::size_t num_classes,
                               TreeParams params) {
  if (features.rows == 0 || labels.empty()) throw UsageError("decision tree needs at least one training sample");
  if (features.rows != labels.size() || features.values.size() != features.rows * features.cols) {
    throw ShapeError("feature table has " + std::to_string(features.rows) + " rows for " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw IndexError("label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  DecisionTree tree;
  tree.num_features_ = features.cols;
  tree.num_classes_ = num_classes;
  tree.params_ = params;
  std::vector<std::size_t> all(features.rows);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  tree.build(features, labels, std::move(all), 0);
  return tree;
}

int DecisionTree::build(const FeatureMatrix& features, std::span<const int> labels, std::vector<std::size_t> indices,
                        std::size_t depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  std::vector<std::size_t> counts(num_classes_, 0);
  for (std::size_t i : indices) ++counts[static_cast<std::size_t>(labels[i])];
  nodes_[id].class_counts = counts;
  nodes_[id].label = majority(counts);

  const double parent_impurity = gini_impurity(counts);
  const std::size_t n = indices.size();
  if (depth >= params_.max_depth || n < params_.min_samples_split || parent_impurity == 0.0) return id;

  SplitChoice best;
  std::vector<std::pair<float, int>> column(n);
  std::vector<std::size_t> left(num_classes_);
  std::vector<std::size_t> right(num_classes_);
  for (std::size_t f = 0; f < features.cols; ++f) {
    for (std::size_t k = 0; k < n; ++k) column[k] = {features.at(indices[k], f), labels[indices[k]]};
    std::sort(column.begin(), column.end());
    std::fill(left.begin(), left.end(), 0);
    right = counts;
    double left_sq = 0.0;
    double right_sq = 0.0;
    for (std::size_t c : counts) right_sq += static_cast<double>(c) * static_cast<double>(c);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const auto y = static_cast<std::size_t>(column[k].second);
      left_sq += 2.0 * static_cast<double>(left[y]) + 1.0;
      right_sq -= 2.0 * static_cast<double>(right[y]) - 1.0;
      ++left[y];
      --right[y];
      const float lo = column[k].first;
      const float hi = column[k + 1].first;
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(k + 1);
      const double nr = static_cast<double>(n - k - 1);
      const double weighted = (nl - left_sq / nl + nr - right_sq / nr) / static_cast<double>(n);
      const double decrease = parent_impurity - weighted;
      if (decrease > best.decrease + kMinImpurityDecrease) {
        float mid = lo + (hi - lo) / 2.0f;
        if (!(mid < hi)) mid = lo;
        best = {static_cast<int>(f), mid, decrease};
      }
    }
  }
  if (best.feature < 0) return id;

  std::vector<std::size_t> left_idx;
  std::vector<std::size_t> right_idx;
  for (std::size_t i : indices) {
    (features.at(i, static_cast<std::size_t>(best.feature)) <= best.threshold ? left_idx : right_idx).push_back(i);
  }
  indices.clear();
  indices.shrink_to_fit();
  nodes_[id].feature = best.feature;
  nodes_[id].threshold = best.threshold;
  const int l = build(features, labels, std::move(left_idx), depth + 1);
  const int r = build(features, labels, std::move(right_idx), depth + 1);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

int DecisionTree::predict_one(std::span<const float> features) const {
  if (nodes_.empty()) throw ContractError("decision tree has not been fitted");
  if (features.size() != num_features_) {
    throw ShapeError("decision tree expects " + std::to_string(num_features_) + " features, got " +
                     std::to_string(features.size()));
  }
  const TreeNode* node = &nodes_[0];
  while (!node->is_leaf()) {
    node = &nodes_[static_cast<std::size_t>(
        features[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  return node->label;
}

std::vector<int> DecisionTree::predict(const FeatureMatrix& features) const {
  if (features.cols != num_features_) {
    throw ShapeError("decision tree expects " + std::to_string(num_features_) + " features, got " +
                     std::to_string(features.cols));
  }
  std::vector<int> out(features.rows);
  for (std::size_t r = 0; r < features.rows; ++r) out[r] = predict_one(features.row(r));
  return out;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : nodes_) {
    if (node.is_leaf()) {
      nodes.push_back({{"class", node.label}, {"class_distribution", node.class_counts}});
    } else {
      nodes.push_back({{"feature_index", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"class", node.label},
                       {"class_distribution", node.class_counts}});
    }
  }
  return {{"max_depth", params_.max_depth},
          {"min_samples_split", params_.min_samples_split},
          {"num_features", num_features_},
          {"num_classes", num_classes_},
          {"nodes", nodes}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree tree;
  try {
    tree.params_.max_depth = j.at("max_depth").get<std::size_t>();
    tree.params_.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    tree.num_features_ = j.at("num_features").get<std::size_t>();
    tree.num_classes_ = j.at("num_classes").get<std::size_t>();
    for (const auto& entry : j.at("nodes")) {
      TreeNode node;
      node.label = entry.at("class").get<int>();
      node.class_counts = entry.at("class_distribution").get<std::vector<std::size_t>>();
      if (entry.contains("feature_index")) {
        node.feature = entry.at("feature_index").get<int>();
        node.threshold = entry.at("threshold").get<float>();
        node.left = entry.at("left").get<int>();
        node.right = entry.at("right").get<int>();
      }
      tree.nodes_.push_back(std::move(node));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed decision tree: ") + e.what());
  }
  const auto count = static_cast<int>(tree.nodes_.size());
  if (count == 0) throw FormatError("decision tree has no nodes");
  for (const auto& node : tree.nodes_) {
    if (node.is_leaf()) continue;
    if (node.left <= 0 || node.left >= count || node.right <= 0 || node.right >= count ||
        static_cast<std::size_t>(node.feature) >= tree.num_features_) {
      throw FormatError("decision tree node references a missing child or feature");
    }
  }
  return tree;
}

}  // namespace glovenet
