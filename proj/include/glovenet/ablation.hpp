#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glovenet/classifier.hpp"
#include "glovenet/dataset.hpp"
#include "glovenet/metrics.hpp"
#include "glovenet/training.hpp"

namespace glovenet {

// All C(n_sensors, k) subsets in lexicographic order.
std::vector<SensorMask> enumerate_sensor_subsets(std::size_t n_sensors, std::size_t k);

struct AblationConfig {
  std::vector<std::size_t> k_values{1, 2, 3, 4, 5};
  std::vector<double> train_fractions{1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  ModelOptions model;
  TrainConfig train;
  // Held-out trials shared by every cell of the sweep.
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::size_t jobs = 1;
};

struct AblationRow {
  SensorMask subset;
  std::string subset_label;
  std::size_t k = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  double accuracy = 0.0;
};

// Statistics over the sensor subsets of one (k, fraction) cell; each
// subset contributes its accuracy averaged over seeds.
struct AblationAggregate {
  std::size_t k = 0;
  double fraction = 0.0;
  std::size_t subsets = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<AblationAggregate> aggregates;
  std::vector<std::size_t> test_indices;

  const AblationAggregate& aggregate(std::size_t k, double fraction) const;

  std::string rows_csv() const;
  std::string aggregate_csv() const;
  // Mean accuracy against sensor count, one line per training fraction
  // with a min/max band.
  std::string to_svg() const;
};

// For each (subset, fraction, seed): keep whole training trials, mask the
// channels, standardize on the kept training samples, train a fresh model
// and score it on the shared test split.
AblationResult ablation_sweep(const GestureDataset& dataset, const AblationConfig& config);

struct SensorAttribution {
  std::string sensor;
  ConfusionMatrix confusion;
};

// One single-sensor model per sensor, evaluated on the shared test split.
std::vector<SensorAttribution> finger_attribution(const GestureDataset& dataset, const AblationConfig& config);

}  // namespace glovenet
