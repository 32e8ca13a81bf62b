#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glovenet/error.hpp"
#include "glovenet/features.hpp"

using namespace glovenet;

namespace {

// Straightforward double-precision reference for one channel.
std::vector<double> reference_stats(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0, lo = x[0], hi = x[0], sq = 0, mad = 0;
  for (double v : x) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sq += v * v;
  }
  mean /= n;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  for (std::size_t i = 1; i < x.size(); ++i) mad += std::abs(x[i] - x[i - 1]);
  return {mean, std::sqrt(var / n), lo, hi, std::sqrt(sq / n), mad / (n - 1)};
}

}  // namespace

TEST(Features, HandComputedSingleChannel) {
  const std::vector<float> x{1.0f, 3.0f, 2.0f, 6.0f};
  const auto fv = extract_features(x, 4, 1);
  ASSERT_EQ(fv.values.size(), kFeaturesPerChannel);
  EXPECT_FLOAT_EQ(fv.values[0], 3.0f);                      // mean
  EXPECT_FLOAT_EQ(fv.values[1], std::sqrt(3.5f));           // (4+0+1+9)/4
  EXPECT_FLOAT_EQ(fv.values[2], 1.0f);                      // min
  EXPECT_FLOAT_EQ(fv.values[3], 6.0f);                      // max
  EXPECT_FLOAT_EQ(fv.values[4], std::sqrt(50.0f / 4.0f));   // rms
  EXPECT_FLOAT_EQ(fv.values[5], 7.0f / 3.0f);               // |2|+|-1|+|4| over 3
}

TEST(Features, ConstantChannelHasZeroSpread) {
  const std::vector<float> x(10, -2.0f);
  const auto fv = extract_features(x, 10, 1);
  EXPECT_EQ(fv.values[1], 0.0f);
  EXPECT_EQ(fv.values[5], 0.0f);
  EXPECT_FLOAT_EQ(fv.values[4], 2.0f);
}

TEST(Features, ChannelMajorLayoutMatchesReference) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.5, 2.0);
  const std::size_t T = 32, S = 7;
  std::vector<float> sample(T * S);
  for (auto& v : sample) v = static_cast<float>(dist(rng));
  const auto fv = extract_features(sample, T, S);
  ASSERT_EQ(fv.values.size(), S * kFeaturesPerChannel);
  for (std::size_t c = 0; c < S; ++c) {
    std::vector<double> channel;
    for (std::size_t t = 0; t < T; ++t) channel.push_back(sample[t * S + c]);
    const auto ref = reference_stats(channel);
    for (std::size_t k = 0; k < kFeaturesPerChannel; ++k) {
      EXPECT_NEAR(fv.values[c * kFeaturesPerChannel + k], ref[k], 1e-5 * (1 + std::abs(ref[k])))
          << "channel " << c << " " << kFeatureStatNames[k];
    }
  }
}

TEST(Features, NamesFollowSensorLayout) {
  const std::vector<SensorSpec> layout{{"thumb", 2}, {"index", 1}};
  const auto names = feature_names(3, layout);
  ASSERT_EQ(names.size(), 18u);
  EXPECT_EQ(names[0], "thumb[0].mean");
  EXPECT_EQ(names[7], "thumb[1].std");
  EXPECT_EQ(names[17], "index[0].mad1");
  EXPECT_EQ(feature_names(2, {})[6], "ch1.mean");
}

TEST(Features, MatrixRowsMatchPerSampleExtraction) {
  GestureDataset ds;
  ds.window_length = 4;
  ds.channels = 2;
  for (int i = 0; i < 24; ++i) ds.samples.push_back(static_cast<float>((i * 7) % 5));
  ds.labels = {0, 1, 0};
  const auto m = extract_feature_matrix(ds);
  EXPECT_EQ(m.rows, 3u);
  EXPECT_EQ(m.cols, 12u);
  for (std::size_t r = 0; r < 3; ++r) {
    const auto fv = extract_features(ds.sample(r), 4, 2);
    for (std::size_t c = 0; c < 12; ++c) EXPECT_EQ(m.at(r, c), fv.values[c]);
  }
}

TEST(Features, RejectsBadShapes) {
  const std::vector<float> x(6, 0.0f);
  EXPECT_THROW(extract_features(x, 1, 6), UsageError);
  EXPECT_THROW(extract_features(x, 4, 2), ShapeError);
}
