#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "glovenet/features.hpp"

namespace glovenet {

struct TreeParams {
  std::size_t max_depth = 12;
  std::size_t min_samples_split = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  float threshold = 0.0f;
  int left = -1;   // x[feature] <= threshold
  int right = -1;  // x[feature] > threshold
  int label = 0;   // majority class of the training samples reaching this node
  std::vector<std::size_t> class_counts;

  bool is_leaf() const { return feature < 0; }
};

// 1 - sum(p_c^2); zero for an empty node.
double gini_impurity(std::span<const std::size_t> class_counts);

// CART classifier with Gini splits and no pruning.
//
// Candidate thresholds are midpoints between consecutive distinct feature
// values. Among equally good splits the lowest feature index wins, then
// the lowest threshold. A node becomes a leaf at max_depth, below
// min_samples_split samples, when pure, or when no split lowers impurity.
class DecisionTree {
 public:
  static DecisionTree fit(const FeatureMatrix& features, std::span<const int> labels, std::size_t num_classes,
                          TreeParams params = {});

  int predict_one(std::span<const float> features) const;
  std::vector<int> predict(const FeatureMatrix& features) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t num_features() const { return num_features_; }
  std::size_t num_classes() const { return num_classes_; }
  const TreeParams& params() const { return params_; }

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

 private:
  int build(const FeatureMatrix& features, std::span<const int> labels, std::vector<std::size_t> indices,
            std::size_t depth);

  std::vector<TreeNode> nodes_;
  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
  TreeParams params_;
};

}  // namespace glovenet
