#include "glovenet/classifier.hpp"

#include <bit>
#include <fstream>
#include <string>

#include "glovenet/error.hpp"
#include "glovenet/features.hpp"

namespace glovenet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFile = "checkpoint.json";
constexpr const char* kParamsFile = "params.f32";

void check_shape(const Classifier& model, const GestureDataset& data) {
  if (data.window_length != model.window_length() || data.channels != model.channels()) {
    throw ShapeError("checkpoint expects T=" + std::to_string(model.window_length()) + ", S=" +
                     std::to_string(model.channels()) + " but dataset has T=" + std::to_string(data.window_length) +
                     ", S=" + std::to_string(data.channels));
  }
  if (data.num_classes() > model.num_classes()) {
    throw ShapeError("dataset has " + std::to_string(data.num_classes()) + " classes, model knows " +
                     std::to_string(model.num_classes()));
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError("no " + path.filename().string() + " in " + path.parent_path().string());
  try {
    std::ifstream in(path);
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("corrupt " + path.string() + ": " + e.what());
  }
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
  }
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  if (name == "transformer") return ModelKind::transformer;
  if (name == "tree") return ModelKind::tree;
  throw UsageError("unknown model '" + std::string(name) + "' (expected transformer or tree)");
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::transformer ? "transformer" : "tree"; }

// --- transformer ------------------------------------------------------------

TransformerModel::TransformerModel(ModelConfig config, std::uint64_t seed) : network_(config, seed) {}

TransformerModel::TransformerModel(TransformerClassifier<float> network) : network_(std::move(network)) {}

TrainLog TransformerModel::fit(const GestureDataset& train_set, const TrainConfig& cfg) {
  check_shape(*this, train_set);
  return train(network_, train_set, cfg);
}

std::vector<int> TransformerModel::predict(const GestureDataset& dataset) const {
  check_shape(*this, dataset);
  return glovenet::predict(network_, dataset);
}

void TransformerModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  json params = json::array();
  std::size_t offset = 0;
  std::ofstream blob(dir / kParamsFile, std::ios::binary);
  if (!blob) throw FormatError("cannot write " + (dir / kParamsFile).string());
  for (const auto& p : network_.parameters()) {
    params.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", offset}});
    offset += p.tensor.numel();
    for (float v : p.tensor.data()) {
      const std::uint32_t le = to_little_endian(std::bit_cast<std::uint32_t>(v));
      blob.write(reinterpret_cast<const char*>(&le), sizeof(le));
    }
  }
  if (!blob) throw FormatError("failed while writing " + (dir / kParamsFile).string());
  write_json(dir / kCheckpointFile, {{"model", "transformer"},
                                     {"config", network_.config().to_json()},
                                     {"dtype", "float32"},
                                     {"byte_order", "little"},
                                     {"blob", kParamsFile},
                                     {"parameter_count", offset},
                                     {"parameters", params}});
}

// --- tree -------------------------------------------------------------------

TreeModel::TreeModel(std::size_t window_length, std::size_t channels, std::size_t num_classes, TreeParams params)
    : window_length_(window_length), channels_(channels), num_classes_(num_classes), params_(params) {}

TrainLog TreeModel::fit(const GestureDataset& train_set, const TrainConfig& /*cfg*/) {
  check_shape(*this, train_set);
  if (train_set.size() == 0) throw UsageError("training set is empty");
  const FeatureMatrix features = extract_feature_matrix(train_set);
  tree_ = DecisionTree::fit(features, train_set.labels, num_classes_, params_);

  TrainLog log;
  std::vector<std::size_t> counts(num_classes_, 0);
  for (int y : train_set.labels) ++counts[static_cast<std::size_t>(y)];
  const double n = static_cast<double>(train_set.size());
  log.initial_loss = 1.0 - static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n;
  const auto predicted = tree_.predict(features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == train_set.labels[i] ? 1 : 0;
  const double accuracy = static_cast<double>(correct) / n;
  log.epochs.push_back({1, 1.0 - accuracy, accuracy});
  return log;
}

std::vector<int> TreeModel::predict(const GestureDataset& dataset) const {
  check_shape(*this, dataset);
  return tree_.predict(extract_feature_matrix(dataset));
}

void TreeModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  write_json(dir / kCheckpointFile, {{"model", "tree"},
                                     {"window_length", window_length_},
                                     {"channels", channels_},
                                     {"classes", num_classes_},
                                     {"tree", tree_.to_json()}});
}

TreeModel TreeModel::from_json(const json& j) {
  try {
    TreeModel model(j.at("window_length").get<std::size_t>(), j.at("channels").get<std::size_t>(),
                    j.at("classes").get<std::size_t>());
    model.tree_ = DecisionTree::from_json(j.at("tree"));
    model.params_ = model.tree_.params();
    if (model.tree_.num_features() != model.channels_ * kFeaturesPerChannel) {
      throw FormatError("tree checkpoint feature count does not match its channel count");
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed tree checkpoint: ") + e.what());
  }
}

// --- factories --------------------------------------------------------------

std::unique_ptr<Classifier> make_classifier(const ModelOptions& options, const GestureDataset& shape_source,
                                            std::uint64_t seed) {
  if (options.kind == ModelKind::tree) {
    return std::make_unique<TreeModel>(shape_source.window_length, shape_source.channels, shape_source.num_classes(),
                                       options.tree);
  }
  ModelConfig config = options.transformer;
  config.window_length = shape_source.window_length;
  config.channels = shape_source.channels;
  config.classes = shape_source.num_classes();
  return std::make_unique<TransformerModel>(config, seed);
}

std::unique_ptr<Classifier> load_classifier(const fs::path& dir) {
  const json checkpoint = read_json(dir / kCheckpointFile);
  const std::string kind = checkpoint.value("model", "");
  if (kind == "tree") return std::make_unique<TreeModel>(TreeModel::from_json(checkpoint));
  if (kind != "transformer") throw FormatError("checkpoint names unknown model '" + kind + "'");

  if (!checkpoint.contains("config")) throw FormatError("transformer checkpoint has no config");
  TransformerClassifier<float> network(ModelConfig::from_json(checkpoint.at("config")), 0);
  auto params = network.parameters();

  const fs::path blob_path = dir / kParamsFile;
  if (!fs::exists(blob_path)) throw FormatError("no " + std::string(kParamsFile) + " in " + dir.string());
  const std::uintmax_t expected = network.parameter_count() * sizeof(float);
  const std::uintmax_t actual = fs::file_size(blob_path);
  if (actual != expected) {
    throw FormatError(blob_path.string() + " holds " + std::to_string(actual) + " bytes, expected " +
                      std::to_string(expected));
  }
  const auto& listed = checkpoint.at("parameters");
  if (!listed.is_array() || listed.size() != params.size()) {
    throw FormatError("checkpoint lists a different parameter set than its config implies");
  }
  std::ifstream blob(blob_path, std::ios::binary);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (listed[i].value("name", "") != params[i].name ||
        listed[i].value("shape", Shape{}) != params[i].tensor.shape()) {
      throw FormatError("checkpoint parameter " + std::to_string(i) + " does not match '" + params[i].name + "'");
    }
    for (float& v : params[i].tensor.data()) {
      std::uint32_t raw = 0;
      blob.read(reinterpret_cast<char*>(&raw), sizeof(raw));
      v = std::bit_cast<float>(to_little_endian(raw));
    }
  }
  if (!blob) throw FormatError("failed while reading " + blob_path.string());
  return std::make_unique<TransformerModel>(std::move(network));
}

Evaluation evaluate(const Classifier& model, const GestureDataset& test_set) {
  if (test_set.size() == 0) throw UsageError("test set is empty");
  const auto predicted = model.predict(test_set);
  return evaluate_predictions(test_set.class_names, test_set.labels, predicted);
}

}  // namespace glovenet
