#include "glovenet/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "glovenet/error.hpp"

namespace glovenet {

namespace fs = std::filesystem;
using nlohmann::json;

std::span<const float> GestureDataset::sample(std::size_t index) const {
  return std::span<const float>(samples).subspan(index * sample_stride(), sample_stride());
}

std::span<float> GestureDataset::sample(std::size_t index) {
  return std::span<float>(samples).subspan(index * sample_stride(), sample_stride());
}

void GestureDataset::validate() const {
  const std::size_t n = labels.size();
  if (window_length == 0 || channels == 0) throw ValidationError("window_length and channels must be positive");
  if (!(sample_rate_hz > 0.0)) throw ValidationError("sample_rate_hz must be positive");
  if (samples.size() != n * window_length * channels) {
    throw ValidationError("sample buffer holds " + std::to_string(samples.size()) + " values, expected " +
                          std::to_string(n * window_length * channels));
  }
  if (trial_ids.size() != n || subject_ids.size() != n) {
    throw ValidationError("labels, trial_ids and subject_ids must all have " + std::to_string(n) + " entries");
  }
  if (class_names.empty()) throw ValidationError("dataset declares no classes");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_names.size()) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at sample " + std::to_string(i) +
                            " outside [0, " + std::to_string(class_names.size()) + ")");
    }
  }
  std::size_t layout_channels = 0;
  for (const auto& sensor : sensor_layout) layout_channels += sensor.channels;
  if (layout_channels != channels) {
    throw ValidationError("sensor layout covers " + std::to_string(layout_channels) + " channels, dataset has " +
                          std::to_string(channels));
  }
}

GestureDataset GestureDataset::subset(std::span<const std::size_t> indices) const {
  GestureDataset out;
  out.name = name;
  out.window_length = window_length;
  out.channels = channels;
  out.sample_rate_hz = sample_rate_hz;
  out.class_names = class_names;
  out.sensor_layout = sensor_layout;
  out.samples.reserve(indices.size() * sample_stride());
  for (std::size_t i : indices) {
    if (i >= size()) throw IndexError("sample index " + std::to_string(i) + " out of range");
    const auto s = sample(i);
    out.samples.insert(out.samples.end(), s.begin(), s.end());
    out.labels.push_back(labels[i]);
    out.trial_ids.push_back(trial_ids[i]);
    out.subject_ids.push_back(subject_ids[i]);
  }
  return out;
}

Tensor<float> GestureDataset::batch(std::span<const std::size_t> indices) const {
  std::vector<float> values;
  values.reserve(indices.size() * sample_stride());
  for (std::size_t i : indices) {
    const auto s = sample(i);
    values.insert(values.end(), s.begin(), s.end());
  }
  return Tensor<float>({indices.size(), window_length, channels}, std::move(values));
}

std::vector<int> GestureDataset::batch_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels[i]);
  return out;
}

bool operator==(const GestureDataset& a, const GestureDataset& b) {
  return a.name == b.name && a.window_length == b.window_length && a.channels == b.channels &&
         std::bit_cast<std::uint64_t>(a.sample_rate_hz) == std::bit_cast<std::uint64_t>(b.sample_rate_hz) &&
         a.labels == b.labels && a.trial_ids == b.trial_ids && a.subject_ids == b.subject_ids &&
         a.class_names == b.class_names && a.sensor_layout == b.sensor_layout &&
         a.samples.size() == b.samples.size() &&
         (a.samples.empty() ||
          std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(float)) == 0);
}

// --- storage ----------------------------------------------------------------

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kDataFile = "data.f32";

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}

template <typename T>
T required(const json& manifest, const char* key) {
  if (!manifest.contains(key)) throw FormatError(std::string("manifest is missing field '") + key + "'");
  try {
    return manifest.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest field '") + key + "' has the wrong type: " + e.what());
  }
}

}  // namespace

void save_dataset(const GestureDataset& dataset, const fs::path& dir) {
  dataset.validate();
  fs::create_directories(dir);

  json layout = json::array();
  for (const auto& sensor : dataset.sensor_layout) {
    layout.push_back({{"name", sensor.name}, {"channels", sensor.channels}});
  }
  const json manifest = {
      {"name", dataset.name},
      {"n_samples", dataset.size()},
      {"window_length", dataset.window_length},
      {"channels", dataset.channels},
      {"sample_rate_hz", dataset.sample_rate_hz},
      {"class_names", dataset.class_names},
      {"sensor_layout", layout},
      {"labels", dataset.labels},
      {"trial_ids", dataset.trial_ids},
      {"subject_ids", dataset.subject_ids},
  };
  {
    std::ofstream out(dir / kManifestFile, std::ios::binary);
    if (!out) throw FormatError("cannot write " + (dir / kManifestFile).string());
    out << manifest.dump(2) << '\n';
  }

  std::ofstream out(dir / kDataFile, std::ios::binary);
  if (!out) throw FormatError("cannot write " + (dir / kDataFile).string());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(dataset.samples.data()),
              static_cast<std::streamsize>(dataset.samples.size() * sizeof(float)));
  } else {
    for (float v : dataset.samples) {
      const std::uint32_t le = byteswap32(std::bit_cast<std::uint32_t>(v));
      out.write(reinterpret_cast<const char*>(&le), sizeof(le));
    }
  }
  if (!out) throw FormatError("failed while writing " + (dir / kDataFile).string());
}

GestureDataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  if (!fs::exists(manifest_path)) throw FormatError("no " + std::string(kManifestFile) + " in " + dir.string());
  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("corrupt " + manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object()) throw FormatError(manifest_path.string() + " is not a JSON object");

  GestureDataset ds;
  ds.name = required<std::string>(manifest, "name");
  const auto n = required<std::size_t>(manifest, "n_samples");
  ds.window_length = required<std::size_t>(manifest, "window_length");
  ds.channels = required<std::size_t>(manifest, "channels");
  ds.sample_rate_hz = required<double>(manifest, "sample_rate_hz");
  ds.class_names = required<std::vector<std::string>>(manifest, "class_names");
  ds.labels = required<std::vector<int>>(manifest, "labels");
  ds.trial_ids = required<std::vector<int>>(manifest, "trial_ids");
  ds.subject_ids = required<std::vector<int>>(manifest, "subject_ids");
  const auto layout = required<json>(manifest, "sensor_layout");
  if (!layout.is_array()) throw FormatError("manifest field 'sensor_layout' must be an array");
  for (const auto& entry : layout) {
    ds.sensor_layout.push_back({required<std::string>(entry, "name"), required<std::size_t>(entry, "channels")});
  }
  if (ds.labels.size() != n) {
    throw ValidationError("manifest declares " + std::to_string(n) + " samples but lists " +
                          std::to_string(ds.labels.size()) + " labels");
  }

  const fs::path data_path = dir / kDataFile;
  if (!fs::exists(data_path)) throw FormatError("no " + std::string(kDataFile) + " in " + dir.string());
  const std::uintmax_t expected = static_cast<std::uintmax_t>(n) * ds.window_length * ds.channels * sizeof(float);
  const std::uintmax_t actual = fs::file_size(data_path);
  if (actual != expected) {
    throw FormatError(data_path.string() + " holds " + std::to_string(actual) + " bytes, expected " +
                      std::to_string(expected) + " (" + std::to_string(n) + " x " +
                      std::to_string(ds.window_length) + " x " + std::to_string(ds.channels) + " x 4)");
  }
  ds.samples.resize(n * ds.window_length * ds.channels);
  std::ifstream in(data_path, std::ios::binary);
  in.read(reinterpret_cast<char*>(ds.samples.data()), static_cast<std::streamsize>(expected));
  if (!in) throw FormatError("failed while reading " + data_path.string());
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : ds.samples) v = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(v)));
  }
  ds.validate();
  return ds;
}

// --- windowing --------------------------------------------------------------

std::size_t window_count(std::size_t series_length, std::size_t window_length, std::size_t stride) {
  if (window_length == 0 || stride == 0) throw UsageError("window length and stride must be at least 1");
  if (series_length < window_length) return 0;
  return (series_length - window_length) / stride + 1;
}

std::vector<Tensor<float>> window_semioverlap(const Tensor<float>& series, std::size_t window_length,
                                              std::size_t stride) {
  if (series.rank() != 2) throw ShapeError("windowing expects an [L x S] series, got " + shape_str(series.shape()));
  const std::size_t length = series.dim(0);
  const std::size_t channels = series.dim(1);
  const std::size_t count = window_count(length, window_length, stride);
  std::vector<Tensor<float>> windows;
  windows.reserve(count);
  const auto data = series.data();
  for (std::size_t w = 0; w < count; ++w) {
    const auto first = data.begin() + static_cast<std::ptrdiff_t>(w * stride * channels);
    windows.emplace_back(Shape{window_length, channels},
                         std::vector<float>(first, first + static_cast<std::ptrdiff_t>(window_length * channels)));
  }
  return windows;
}

std::vector<Tensor<float>> window_nonoverlap(const Tensor<float>& series, std::size_t window_length) {
  return window_semioverlap(series, window_length, window_length);
}

// --- folds and splits -------------------------------------------------------

namespace {

std::vector<int> distinct_trials(std::span<const int> trial_ids) {
  std::set<int> unique(trial_ids.begin(), trial_ids.end());
  return {unique.begin(), unique.end()};
}

}  // namespace

void FoldSpec::validate(std::span<const int> trial_ids) const {
  const std::size_t n = trial_ids.size();
  std::map<int, std::size_t> times_held_out;
  for (int trial : trial_ids) times_held_out[trial] = 0;
  std::vector<std::size_t> test_hits(n, 0);

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    std::vector<int> side(n, -1);  // 0 train, 1 test
    auto mark = [&](const std::vector<std::size_t>& indices, int value) {
      for (std::size_t i : indices) {
        if (i >= n) throw ContractError("fold " + std::to_string(f) + " references sample " + std::to_string(i));
        if (side[i] != -1) {
          throw ContractError("fold " + std::to_string(f) + " lists sample " + std::to_string(i) + " twice");
        }
        side[i] = value;
      }
    };
    mark(fold.train, 0);
    mark(fold.test, 1);
    std::map<int, int> trial_side;
    for (std::size_t i = 0; i < n; ++i) {
      if (side[i] == -1) continue;
      auto [it, inserted] = trial_side.emplace(trial_ids[i], side[i]);
      if (!inserted && it->second != side[i]) {
        throw ContractError("fold " + std::to_string(f) + " splits trial " + std::to_string(trial_ids[i]) +
                            " across train and test");
      }
    }
    for (std::size_t i : fold.test) ++test_hits[i];
    for (const auto& [trial, s] : trial_side) {
      if (s == 1) ++times_held_out[trial];
    }
  }
  for (const auto& [trial, count] : times_held_out) {
    if (count != 1) {
      throw ContractError("trial " + std::to_string(trial) + " is held out by " + std::to_string(count) +
                          " folds, expected exactly one");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (test_hits[i] != 1) throw ContractError("sample " + std::to_string(i) + " is not tested exactly once");
  }
}

FoldSpec make_loto_folds(std::span<const int> trial_ids) {
  const auto trials = distinct_trials(trial_ids);
  if (trials.size() < 2) {
    throw ContractError("leave-one-trial-out needs at least 2 distinct trials, found " +
                        std::to_string(trials.size()));
  }
  FoldSpec spec;
  for (int trial : trials) {
    Fold fold;
    fold.held_out_trial = trial;
    for (std::size_t i = 0; i < trial_ids.size(); ++i) {
      (trial_ids[i] == trial ? fold.test : fold.train).push_back(i);
    }
    spec.folds.push_back(std::move(fold));
  }
  return spec;
}

FoldSpec make_loto_folds(const GestureDataset& dataset) { return make_loto_folds(dataset.trial_ids); }

Split holdout_split(std::span<const int> trial_ids, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1), got " + std::to_string(test_fraction));
  }
  auto trials = distinct_trials(trial_ids);
  if (trials.size() < 2) throw ContractError("a held-out split needs at least 2 distinct trials");
  std::mt19937_64 rng(seed);
  std::shuffle(trials.begin(), trials.end(), rng);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(trials.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, trials.size() - 1);
  const std::set<int> test_trials(trials.begin(), trials.begin() + static_cast<std::ptrdiff_t>(n_test));
  Split split;
  for (std::size_t i = 0; i < trial_ids.size(); ++i) {
    (test_trials.count(trial_ids[i]) ? split.test : split.train).push_back(i);
  }
  return split;
}

std::vector<std::size_t> subsample_trials(std::span<const std::size_t> indices, std::span<const int> trial_ids,
                                          double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw UsageError("training fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  std::set<int> present;
  for (std::size_t i : indices) present.insert(trial_ids[i]);
  std::vector<int> trials(present.begin(), present.end());
  std::mt19937_64 rng(seed);
  std::shuffle(trials.begin(), trials.end(), rng);
  const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(trials.size()) + 1e-9));
  if (keep == 0) {
    throw UsageError("training fraction " + std::to_string(fraction) + " of " + std::to_string(trials.size()) +
                     " trials leaves no training data");
  }
  const std::set<int> kept(trials.begin(), trials.begin() + static_cast<std::ptrdiff_t>(keep));
  std::vector<std::size_t> out;
  for (std::size_t i : indices) {
    if (kept.count(trial_ids[i])) out.push_back(i);
  }
  return out;
}

// --- standardization --------------------------------------------------------

ChannelStats fit_channel_stats(const GestureDataset& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("channel statistics need at least one sample");
  const std::size_t s = dataset.channels;
  const std::size_t t_len = dataset.window_length;
  std::vector<double> total(s, 0.0);
  for (std::size_t i : indices) {
    const auto x = dataset.sample(i);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t c = 0; c < s; ++c) total[c] += x[t * s + c];
    }
  }
  const double count = static_cast<double>(indices.size() * t_len);
  std::vector<double> mu(s);
  for (std::size_t c = 0; c < s; ++c) mu[c] = total[c] / count;
  std::vector<double> sq(s, 0.0);
  for (std::size_t i : indices) {
    const auto x = dataset.sample(i);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t c = 0; c < s; ++c) {
        const double d = x[t * s + c] - mu[c];
        sq[c] += d * d;
      }
    }
  }
  ChannelStats stats;
  for (std::size_t c = 0; c < s; ++c) {
    stats.mean.push_back(static_cast<float>(mu[c]));
    stats.stddev.push_back(std::max(static_cast<float>(std::sqrt(sq[c] / count)), kStdFloor));
  }
  return stats;
}

GestureDataset apply_channel_stats(const GestureDataset& dataset, const ChannelStats& stats) {
  const std::size_t s = dataset.channels;
  if (stats.mean.size() != s || stats.stddev.size() != s) {
    throw ShapeError("channel statistics cover " + std::to_string(stats.mean.size()) + " channels, dataset has " +
                     std::to_string(s));
  }
  GestureDataset out = dataset;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const std::size_t c = i % s;
    out.samples[i] = static_cast<float>((static_cast<double>(out.samples[i]) - stats.mean[c]) /
                                        static_cast<double>(stats.stddev[c]));
  }
  return out;
}

std::pair<GestureDataset, ChannelStats> standardize(const GestureDataset& dataset,
                                                     std::span<const std::size_t> fit_indices) {
  ChannelStats stats = fit_channel_stats(dataset, fit_indices);
  return {apply_channel_stats(dataset, stats), std::move(stats)};
}

// --- sensor masks -----------------------------------------------------------

std::string mask_label(const SensorMask& mask, const std::vector<SensorSpec>& layout) {
  std::string label;
  for (std::size_t i : mask.selected) {
    if (!label.empty()) label += '+';
    label += i < layout.size() ? layout[i].name : std::to_string(i);
  }
  return label;
}

GestureDataset apply_sensor_mask(const GestureDataset& dataset, const SensorMask& mask) {
  if (mask.selected.empty()) throw UsageError("sensor mask selects no sensors");
  std::vector<std::size_t> selected = mask.selected;
  std::sort(selected.begin(), selected.end());
  if (std::adjacent_find(selected.begin(), selected.end()) != selected.end()) {
    throw UsageError("sensor mask lists a sensor twice");
  }
  if (selected.back() >= dataset.sensor_layout.size()) {
    throw UsageError("sensor index " + std::to_string(selected.back()) + " out of range for a " +
                     std::to_string(dataset.sensor_layout.size()) + "-sensor layout");
  }

  std::vector<std::size_t> offsets(dataset.sensor_layout.size(), 0);
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] = offsets[i - 1] + dataset.sensor_layout[i - 1].channels;
  std::vector<std::size_t> kept_channels;
  std::vector<SensorSpec> layout;
  for (std::size_t sensor : selected) {
    layout.push_back(dataset.sensor_layout[sensor]);
    for (std::size_t c = 0; c < dataset.sensor_layout[sensor].channels; ++c) kept_channels.push_back(offsets[sensor] + c);
  }

  GestureDataset out;
  out.name = dataset.name;
  out.window_length = dataset.window_length;
  out.channels = kept_channels.size();
  out.sample_rate_hz = dataset.sample_rate_hz;
  out.labels = dataset.labels;
  out.trial_ids = dataset.trial_ids;
  out.subject_ids = dataset.subject_ids;
  out.class_names = dataset.class_names;
  out.sensor_layout = std::move(layout);
  out.samples.reserve(dataset.size() * dataset.window_length * out.channels);
  const std::size_t rows = dataset.size() * dataset.window_length;
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = dataset.samples.data() + r * dataset.channels;
    for (std::size_t c : kept_channels) out.samples.push_back(row[c]);
  }
  return out;
}

}  // namespace glovenet
