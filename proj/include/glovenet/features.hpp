#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "glovenet/dataset.hpp"

namespace glovenet {

// Per-channel statistics, in this order for every channel.
inline constexpr std::size_t kFeaturesPerChannel = 6;
inline constexpr const char* kFeatureStatNames[kFeaturesPerChannel] = {"mean", "std",  "min",
                                                                        "max",  "rms", "mad1"};

struct FeatureVector {
  std::vector<float> values;  // channel-major: [c0.mean, c0.std, ..., c1.mean, ...]
  std::vector<std::string> feature_names;
};

// Row-major [rows x cols] feature table.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values).subspan(r * cols, cols);
  }
  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Mean, population standard deviation, min, max, root mean square and mean
// absolute first difference of each channel of a [T x S] sample (T >= 2).
FeatureVector extract_features(std::span<const float> sample, std::size_t window_length, std::size_t channels,
                               const std::vector<SensorSpec>& layout = {});

std::vector<std::string> feature_names(std::size_t channels, const std::vector<SensorSpec>& layout);

FeatureMatrix extract_feature_matrix(const GestureDataset& dataset);

}  // namespace glovenet
