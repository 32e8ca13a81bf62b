#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "glovenet/classifier.hpp"
#include "glovenet/dataset.hpp"
#include "glovenet/metrics.hpp"
#include "glovenet/training.hpp"

namespace glovenet {

// Builds an untrained model for one fold's (standardized) training set.
using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const GestureDataset& train_set)>;

enum class StatsScope {
  train_only,
  // Fits standardization on every sample, test folds included. Leaks test
  // information; only used to demonstrate that the leak is observable.
  all_samples,
};

struct CrossvalOptions {
  std::size_t jobs = 1;
  StatsScope stats_scope = StatsScope::train_only;
};

struct FoldResult {
  std::size_t fold = 0;
  int held_out_trial = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

struct CrossvalResult {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;     // sample standard deviation over folds
  double pooled_accuracy = 0.0;  // over all test predictions together
  ConfusionMatrix pooled;

  std::string folds_csv() const;
  std::string summary_csv() const;
};

// Trains a fresh model per fold after refitting standardization on that
// fold's training samples, then evaluates on its test samples.
CrossvalResult crossval(const ClassifierFactory& factory, const GestureDataset& dataset, const FoldSpec& folds,
                        const TrainConfig& cfg, const CrossvalOptions& options = {});

}  // namespace glovenet
