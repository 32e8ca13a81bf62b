#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glovenet/tensor.hpp"

namespace glovenet {

struct SensorSpec {
  std::string name;
  std::size_t channels = 0;

  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

// Fixed-length multichannel gesture samples, row-major [N x T x S].
//
// Class 0 is always the null (no gesture) class. Trials group samples that
// were recorded together and must never be split between train and test.
struct GestureDataset {
  std::string name;
  std::size_t window_length = 0;  // T
  std::size_t channels = 0;       // S
  double sample_rate_hz = 50.0;
  std::vector<float> samples;
  std::vector<int> labels;
  std::vector<int> trial_ids;
  std::vector<int> subject_ids;
  std::vector<std::string> class_names;
  std::vector<SensorSpec> sensor_layout;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return class_names.size(); }
  std::size_t sample_stride() const { return window_length * channels; }
  std::span<const float> sample(std::size_t index) const;
  std::span<float> sample(std::size_t index);

  // Throws ValidationError naming the first violated invariant.
  void validate() const;

  GestureDataset subset(std::span<const std::size_t> indices) const;

  // [B x T x S] tensor of the selected samples.
  Tensor<float> batch(std::span<const std::size_t> indices) const;
  std::vector<int> batch_labels(std::span<const std::size_t> indices) const;

  // Bit-exact equality, sample values compared by representation.
  friend bool operator==(const GestureDataset& a, const GestureDataset& b);
};

// --- synthetic generator ----------------------------------------------------

enum class Vocabulary { single, multi };

Vocabulary parse_vocabulary(std::string_view name);
std::string_view to_string(Vocabulary vocabulary);

// Five finger-mounted IMUs (thumb..pinky), accelerometer xyz + gyroscope xyz.
std::vector<SensorSpec> default_sensor_layout();

std::vector<std::string> vocabulary_class_names(Vocabulary vocabulary);

// Balanced synthetic five-finger IMU gesture dataset. Deterministic in all
// arguments; every sample draws from its own seed derived from (seed, index).
GestureDataset generate_synthetic(Vocabulary vocabulary, std::size_t n_samples, std::size_t window_length,
                                  std::uint64_t seed);

// --- storage ----------------------------------------------------------------

// Writes manifest.json and data.f32 (little-endian float32) into `dir`.
void save_dataset(const GestureDataset& dataset, const std::filesystem::path& dir);
GestureDataset load_dataset(const std::filesystem::path& dir);

// --- windowing --------------------------------------------------------------

// Slices a [L x S] series into [T x S] windows starting at 0, stride,
// 2*stride, ... Returns an empty list when L < T.
std::vector<Tensor<float>> window_semioverlap(const Tensor<float>& series, std::size_t window_length,
                                              std::size_t stride);
std::vector<Tensor<float>> window_nonoverlap(const Tensor<float>& series, std::size_t window_length);
std::size_t window_count(std::size_t series_length, std::size_t window_length, std::size_t stride);

// --- folds and splits -------------------------------------------------------

struct Fold {
  int held_out_trial = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldSpec {
  std::vector<Fold> folds;

  // Checks disjointness, trial integrity and leave-one-trial-out coverage.
  void validate(std::span<const int> trial_ids) const;
};

// One fold per distinct trial id, in ascending trial order.
FoldSpec make_loto_folds(std::span<const int> trial_ids);
FoldSpec make_loto_folds(const GestureDataset& dataset);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Holds out round(test_fraction * trials) whole trials (at least one,
// never all) chosen by a seeded shuffle.
Split holdout_split(std::span<const int> trial_ids, double test_fraction, std::uint64_t seed);

// Keeps floor(fraction * trials) of the trials present in `indices`. The
// kept set for a smaller fraction is a subset of the set for a larger one
// under the same seed. Throws UsageError when nothing would be kept.
std::vector<std::size_t> subsample_trials(std::span<const std::size_t> indices, std::span<const int> trial_ids,
                                          double fraction, std::uint64_t seed);

// --- standardization --------------------------------------------------------

struct ChannelStats {
  std::vector<float> mean;
  std::vector<float> stddev;
};

inline constexpr float kStdFloor = 1e-8f;

// Per-channel statistics over the given samples only.
ChannelStats fit_channel_stats(const GestureDataset& dataset, std::span<const std::size_t> indices);
GestureDataset apply_channel_stats(const GestureDataset& dataset, const ChannelStats& stats);

// Fits on `fit_indices` and applies the result to every sample.
std::pair<GestureDataset, ChannelStats> standardize(const GestureDataset& dataset,
                                                     std::span<const std::size_t> fit_indices);

// --- sensor masks -----------------------------------------------------------

struct SensorMask {
  std::vector<std::size_t> selected;  // indices into sensor_layout, ascending
};

std::string mask_label(const SensorMask& mask, const std::vector<SensorSpec>& layout);
GestureDataset apply_sensor_mask(const GestureDataset& dataset, const SensorMask& mask);

}  // namespace glovenet
