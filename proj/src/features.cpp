#include "glovenet/features.hpp"

#include <algorithm>
#include <cmath>

#include "glovenet/error.hpp"

namespace glovenet {

namespace {

void channel_features(std::span<const float> sample, std::size_t window_length, std::size_t channels,
                      std::size_t c, float* out) {
  double total = 0.0;
  double sq_total = 0.0;
  double lo = sample[c];
  double hi = sample[c];
  double diff_total = 0.0;
  for (std::size_t t = 0; t < window_length; ++t) {
    const double v = sample[t * channels + c];
    total += v;
    sq_total += v * v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (t > 0) diff_total += std::abs(v - static_cast<double>(sample[(t - 1) * channels + c]));
  }
  const double n = static_cast<double>(window_length);
  const double mu = total / n;
  double var = 0.0;
  for (std::size_t t = 0; t < window_length; ++t) {
    const double d = sample[t * channels + c] - mu;
    var += d * d;
  }
  out[0] = static_cast<float>(mu);
  out[1] = static_cast<float>(std::sqrt(var / n));
  out[2] = static_cast<float>(lo);
  out[3] = static_cast<float>(hi);
  out[4] = static_cast<float>(std::sqrt(sq_total / n));
  out[5] = static_cast<float>(diff_total / (n - 1.0));
}

}  // namespace

std::vector<std::string> feature_names(std::size_t channels, const std::vector<SensorSpec>& layout) {
  std::vector<std::string> channel_names;
  for (const auto& sensor : layout) {
    for (std::size_t k = 0; k < sensor.channels; ++k) channel_names.push_back(sensor.name + "[" + std::to_string(k) + "]");
  }
  if (channel_names.size() != channels) {
    channel_names.clear();
    for (std::size_t c = 0; c < channels; ++c) channel_names.push_back("ch" + std::to_string(c));
  }
  std::vector<std::string> names;
  names.reserve(channels * kFeaturesPerChannel);
  for (const auto& channel : channel_names) {
    for (const char* stat : kFeatureStatNames) names.push_back(channel + "." + stat);
  }
  return names;
}

FeatureVector extract_features(std::span<const float> sample, std::size_t window_length, std::size_t channels,
                               const std::vector<SensorSpec>& layout) {
  if (window_length < 2) throw UsageError("feature extraction needs at least 2 timesteps");
  if (sample.size() != window_length * channels) {
    throw ShapeError("sample holds " + std::to_string(sample.size()) + " values, expected " +
                     std::to_string(window_length) + " x " + std::to_string(channels));
  }
  FeatureVector fv;
  fv.values.resize(channels * kFeaturesPerChannel);
  for (std::size_t c = 0; c < channels; ++c) {
    channel_features(sample, window_length, channels, c, fv.values.data() + c * kFeaturesPerChannel);
  }
  fv.feature_names = feature_names(channels, layout);
  return fv;
}

FeatureMatrix extract_feature_matrix(const GestureDataset& dataset) {
  if (dataset.window_length < 2) throw UsageError("feature extraction needs at least 2 timesteps");
  FeatureMatrix m;
  m.rows = dataset.size();
  m.cols = dataset.channels * kFeaturesPerChannel;
  m.values.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto sample = dataset.sample(i);
    for (std::size_t c = 0; c < dataset.channels; ++c) {
      channel_features(sample, dataset.window_length, dataset.channels, c,
                       m.values.data() + i * m.cols + c * kFeaturesPerChannel);
    }
  }
  return m;
}

}  // namespace glovenet
