#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glovenet/tensor.hpp"

namespace glovenet {

struct ModelConfig {
  std::size_t d_model = 32;
  std::size_t n_layers = 4;
  std::size_t n_heads = 4;
  std::size_t d_ff = 64;
  std::size_t window_length = 32;  // T
  std::size_t channels = 30;       // S
  std::size_t classes = 9;         // C
  // Divide the pooling scores by sqrt(d_model).
  bool attention_scaling = true;
  // Learned linear map applied to the pooling query.
  bool query_projection = false;
  double layer_norm_eps = 1e-5;

  // Throws UsageError for non-positive sizes, odd d_model, or d_model not
  // divisible by n_heads.
  void validate() const;
  std::size_t parameter_count() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Sinusoidal table: PE[pos][2i] = sin(pos / 10000^(2i/d)),
// PE[pos][2i+1] = cos(pos / 10000^(2i/d)). d must be even.
template <typename T>
Tensor<T> positional_encoding(std::size_t length, std::size_t d);

template <typename T>
struct PoolResult {
  Tensor<T> output;   // [B x d_model]
  Tensor<T> weights;  // [B x T]
};

// Sensor-embedding transformer classifier:
//   linear S -> d_model, + sinusoidal positions, n_layers post-norm encoder
//   layers (bidirectional multi-head self-attention, ReLU feed-forward),
//   dot-product attention pooling queried by the last timestep, linear
//   head d_model -> C.
//
// Linear weights are stored [in x out] and applied as x . W + b.
template <typename T>
class TransformerClassifier {
 public:
  struct Parameter {
    std::string name;
    Tensor<T> tensor;
  };

  explicit TransformerClassifier(ModelConfig config, std::uint64_t seed = 0);

  const ModelConfig& config() const { return config_; }

  Tensor<T> embed(const Tensor<T>& x) const;
  // Self-attention sublayer of `layer`; per-head weights [B x H x T x T]
  // are written to *weights when given.
  Tensor<T> multi_head_attention(std::size_t layer, const Tensor<T>& x, Tensor<T>* weights = nullptr) const;
  Tensor<T> encoder_layer(std::size_t layer, const Tensor<T>& x, Tensor<T>* attention_weights = nullptr) const;
  PoolResult<T> attention_pool(const Tensor<T>& h) const;
  Tensor<T> forward(const Tensor<T>& x) const;

  const Tensor<T>& positional_table() const { return positions_; }

  // Fixed order: embed, layers 0..n-1 (q, k, v, o, ff1, ff2, ln1, ln2),
  // optional pooling query, head.
  std::vector<Parameter> parameters() const;
  std::vector<Tensor<T>> parameter_tensors() const;
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  struct Linear {
    Tensor<T> weight;
    Tensor<T> bias;
  };
  struct Norm {
    Tensor<T> gamma;
    Tensor<T> beta;
  };
  struct Layer {
    Linear q, k, v, o, ff1, ff2;
    Norm ln1, ln2;
  };

  void check_input(const Tensor<T>& x) const;

  ModelConfig config_;
  Linear embed_;
  Tensor<T> positions_;
  std::vector<Layer> layers_;
  Linear query_;
  Linear head_;
};

extern template class TransformerClassifier<float>;
extern template class TransformerClassifier<double>;

}  // namespace glovenet
