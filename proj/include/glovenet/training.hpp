#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "glovenet/dataset.hpp"
#include "glovenet/transformer.hpp"

namespace glovenet {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean training loss over the epoch
  double accuracy = 0.0;  // training accuracy over the epoch

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainLog {
  // Mean loss over the training set before the first update.
  double initial_loss = 0.0;
  std::vector<EpochRecord> epochs;

  std::string to_csv() const;
  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

// Mini-batch Adam on cross-entropy. The batch order is drawn from cfg.seed.
// Throws UsageError on an empty set and NumericError if the loss stops
// being finite.
TrainLog train(TransformerClassifier<float>& model, const GestureDataset& train_set, const TrainConfig& cfg);

std::vector<int> predict(const TransformerClassifier<float>& model, const GestureDataset& dataset,
                         std::size_t batch_size = 64);

}  // namespace glovenet
