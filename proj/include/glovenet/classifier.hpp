#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include "glovenet/dataset.hpp"
#include "glovenet/decision_tree.hpp"
#include "glovenet/metrics.hpp"
#include "glovenet/training.hpp"
#include "glovenet/transformer.hpp"

namespace glovenet {

enum class ModelKind { transformer, tree };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);

// Common face of the two gesture classifiers so that training, evaluation,
// cross-validation and ablation can treat them alike.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t window_length() const = 0;
  virtual std::size_t channels() const = 0;
  virtual std::size_t num_classes() const = 0;

  virtual TrainLog fit(const GestureDataset& train_set, const TrainConfig& cfg) = 0;
  // Throws ShapeError when the dataset's T or S differ from the model's.
  virtual std::vector<int> predict(const GestureDataset& dataset) const = 0;

  // Writes checkpoint.json (plus params.f32 for the transformer) into dir.
  virtual void save(const std::filesystem::path& dir) const = 0;
};

class TransformerModel final : public Classifier {
 public:
  TransformerModel(ModelConfig config, std::uint64_t seed);
  explicit TransformerModel(TransformerClassifier<float> network);

  ModelKind kind() const override { return ModelKind::transformer; }
  std::size_t window_length() const override { return network_.config().window_length; }
  std::size_t channels() const override { return network_.config().channels; }
  std::size_t num_classes() const override { return network_.config().classes; }

  TrainLog fit(const GestureDataset& train_set, const TrainConfig& cfg) override;
  std::vector<int> predict(const GestureDataset& dataset) const override;
  void save(const std::filesystem::path& dir) const override;

  const TransformerClassifier<float>& network() const { return network_; }
  TransformerClassifier<float>& network() { return network_; }

 private:
  TransformerClassifier<float> network_;
};

// Decision tree over per-channel summary statistics.
class TreeModel final : public Classifier {
 public:
  TreeModel(std::size_t window_length, std::size_t channels, std::size_t num_classes, TreeParams params = {});

  ModelKind kind() const override { return ModelKind::tree; }
  std::size_t window_length() const override { return window_length_; }
  std::size_t channels() const override { return channels_; }
  std::size_t num_classes() const override { return num_classes_; }

  // The log holds one epoch: loss is the training misclassification rate.
  TrainLog fit(const GestureDataset& train_set, const TrainConfig& cfg) override;
  std::vector<int> predict(const GestureDataset& dataset) const override;
  void save(const std::filesystem::path& dir) const override;

  const DecisionTree& tree() const { return tree_; }

  static TreeModel from_json(const nlohmann::json& j);

 private:
  std::size_t window_length_;
  std::size_t channels_;
  std::size_t num_classes_;
  TreeParams params_;
  DecisionTree tree_;
};

struct ModelOptions {
  ModelKind kind = ModelKind::transformer;
  // Architecture knobs; T, S and C are taken from the training data.
  ModelConfig transformer;
  TreeParams tree;
};

std::unique_ptr<Classifier> make_classifier(const ModelOptions& options, const GestureDataset& shape_source,
                                            std::uint64_t seed);

// Reads a directory written by Classifier::save.
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& dir);

// Predicts every sample of test_set and tallies a confusion matrix.
Evaluation evaluate(const Classifier& model, const GestureDataset& test_set);

}  // namespace glovenet
