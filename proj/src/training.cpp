#include "glovenet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "glovenet/adam.hpp"
#include "glovenet/error.hpp"
#include "glovenet/metrics.hpp"
#include "glovenet/ops.hpp"

namespace glovenet {

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw UsageError("epochs and batch size must be positive");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
}

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,loss,accuracy\n";
  out << 0 << ',' << format_number(initial_loss) << ",\n";
  for (const auto& e : epochs) out << e.epoch << ',' << format_number(e.loss) << ',' << format_number(e.accuracy) << '\n';
  return out.str();
}

namespace {

std::vector<int> argmax_rows(const Tensor<float>& logits) {
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  const auto d = logits.data();
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto first = d.begin() + static_cast<std::ptrdiff_t>(r * cols);
    out[r] = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(cols)) - first);
  }
  return out;
}

void check_compatible(const ModelConfig& config, const GestureDataset& data) {
  if (data.window_length != config.window_length || data.channels != config.channels) {
    throw ShapeError("model expects T=" + std::to_string(config.window_length) + ", S=" +
                     std::to_string(config.channels) + " but dataset has T=" + std::to_string(data.window_length) +
                     ", S=" + std::to_string(data.channels));
  }
  if (data.num_classes() > config.classes) {
    throw ShapeError("dataset has " + std::to_string(data.num_classes()) + " classes, model outputs " +
                     std::to_string(config.classes));
  }
}

}  // namespace

TrainLog train(TransformerClassifier<float>& model, const GestureDataset& train_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0) throw UsageError("training set is empty");
  check_compatible(model.config(), train_set);

  std::vector<Tensor<float>> params = model.parameter_tensors();
  AdamOptions options;
  options.learning_rate = cfg.learning_rate;
  auto state = AdamState<float>::init(params, options);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainLog log;
  {
    NoGradGuard no_grad;
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      const auto labels = train_set.batch_labels(idx);
      total += static_cast<double>(cross_entropy(model.forward(train_set.batch(idx)), labels).item()) *
               static_cast<double>(idx.size());
    }
    log.initial_loss = total / static_cast<double>(order.size());
    if (!std::isfinite(log.initial_loss)) throw NumericError("initial training loss is not finite");
  }

  std::mt19937_64 rng(cfg.seed);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double total_loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      const auto labels = train_set.batch_labels(idx);
      const Tensor<float> logits = model.forward(train_set.batch(idx));
      const Tensor<float> loss = cross_entropy(logits, labels);
      if (!std::isfinite(loss.item())) {
        throw NumericError("training loss became non-finite in epoch " + std::to_string(epoch));
      }
      loss.backward();
      adam_step(std::span<Tensor<float>>(params), state);
      for (auto& p : params) p.zero_grad();

      total_loss += static_cast<double>(loss.item()) * static_cast<double>(idx.size());
      const auto predicted = argmax_rows(logits);
      for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
    }
    const double n = static_cast<double>(order.size());
    log.epochs.push_back({epoch, total_loss / n, static_cast<double>(correct) / n});
  }
  return log;
}

std::vector<int> predict(const TransformerClassifier<float>& model, const GestureDataset& dataset,
                         std::size_t batch_size) {
  if (batch_size == 0) throw UsageError("batch size must be positive");
  check_compatible(model.config(), dataset);
  NoGradGuard no_grad;
  std::vector<int> out;
  out.reserve(dataset.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(dataset.size(), start + batch_size); ++i) idx.push_back(i);
    const auto predicted = argmax_rows(model.forward(dataset.batch(idx)));
    out.insert(out.end(), predicted.begin(), predicted.end());
  }
  return out;
}

}  // namespace glovenet
