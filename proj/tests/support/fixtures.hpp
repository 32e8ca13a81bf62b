#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "glovenet/dataset.hpp"
#include "glovenet/transformer.hpp"
#include "gradcheck.hpp"

namespace glovenet::testing {

// Batch 2, T = 8, S = 6, C = 3 with a deliberately small network.
inline ModelConfig toy_config() {
  ModelConfig c;
  c.d_model = 8;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_ff = 16;
  c.window_length = 8;
  c.channels = 6;
  c.classes = 3;
  return c;
}

// The head starts at zero, which would make every upstream gradient
// vanish; overwrite it so the whole network is exercised.
template <typename T>
TransformerClassifier<T> toy_model(std::uint64_t seed, ModelConfig config = toy_config()) {
  TransformerClassifier<T> model(config, seed);
  auto params = model.parameter_tensors();
  Tensor<T> head = params[params.size() - 2];
  const Tensor<T> values = random_tensor<T>(head.shape(), seed + 100, -0.5, 0.5, false);
  std::copy(values.data().begin(), values.data().end(), head.data().begin());
  return model;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("glovenet_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary);
  out << contents;
}

// Tiny hand-made dataset: every trial holds one sample per class.
inline GestureDataset tiny_dataset(std::size_t trials, std::size_t classes, std::size_t window_length,
                                   std::size_t sensors, std::uint64_t seed = 1) {
  GestureDataset ds;
  ds.name = "tiny";
  ds.window_length = window_length;
  ds.channels = sensors * 6;
  for (std::size_t s = 0; s < sensors; ++s) ds.sensor_layout.push_back({"s" + std::to_string(s), 6});
  for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back(c == 0 ? "null" : "g" + std::to_string(c));
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.1f);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < ds.sample_stride(); ++i) {
        ds.samples.push_back(static_cast<float>(c) * 0.5f + noise(rng));
      }
      ds.labels.push_back(static_cast<int>(c));
      ds.trial_ids.push_back(static_cast<int>(t));
      ds.subject_ids.push_back(0);
    }
  }
  return ds;
}

}  // namespace glovenet::testing
