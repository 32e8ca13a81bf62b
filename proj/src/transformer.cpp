#include "glovenet/transformer.hpp"

#include <cmath>
#include <random>

#include "glovenet/error.hpp"
#include "glovenet/ops.hpp"

namespace glovenet {

void ModelConfig::validate() const {
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || d_ff == 0 || window_length == 0 || channels == 0 ||
      classes == 0) {
    throw UsageError("model config sizes must all be positive");
  }
  if (d_model % 2 != 0) throw UsageError("d_model must be even for sinusoidal positions, got " + std::to_string(d_model));
  if (d_model % n_heads != 0) {
    throw UsageError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " + std::to_string(n_heads));
  }
  if (!(layer_norm_eps > 0.0)) throw UsageError("layer_norm_eps must be positive");
}

std::size_t ModelConfig::parameter_count() const {
  const std::size_t d = d_model;
  const std::size_t per_layer = 4 * (d * d + d) + (d * d_ff + d_ff) + (d_ff * d + d) + 2 * (2 * d);
  return (channels * d + d) + n_layers * per_layer + (query_projection ? d * d + d : 0) + (d * classes + classes);
}

nlohmann::json ModelConfig::to_json() const {
  return {{"d_model", d_model},
          {"n_layers", n_layers},
          {"n_heads", n_heads},
          {"d_ff", d_ff},
          {"window_length", window_length},
          {"channels", channels},
          {"classes", classes},
          {"attention_scaling", attention_scaling},
          {"query_projection", query_projection},
          {"layer_norm_eps", layer_norm_eps}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.d_ff = j.at("d_ff").get<std::size_t>();
    c.window_length = j.at("window_length").get<std::size_t>();
    c.channels = j.at("channels").get<std::size_t>();
    c.classes = j.at("classes").get<std::size_t>();
    c.attention_scaling = j.at("attention_scaling").get<bool>();
    c.query_projection = j.at("query_projection").get<bool>();
    c.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
  c.validate();
  return c;
}

template <typename T>
Tensor<T> positional_encoding(std::size_t length, std::size_t d) {
  if (d == 0 || d % 2 != 0) throw UsageError("positional encoding needs an even width, got " + std::to_string(d));
  if (length == 0) throw UsageError("positional encoding needs a positive length");
  std::vector<T> table(length * d);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double divisor = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) / divisor;
      table[pos * d + 2 * i] = static_cast<T>(std::sin(angle));
      table[pos * d + 2 * i + 1] = static_cast<T>(std::cos(angle));
    }
  }
  return Tensor<T>({length, d}, std::move(table));
}

template <typename T>
TransformerClassifier<T>::TransformerClassifier(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  auto uniform_linear = [&](std::size_t in, std::size_t out) {
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> w(in * out);
    for (auto& v : w) v = static_cast<T>(dist(rng));
    return Linear{Tensor<T>({in, out}, std::move(w), true), Tensor<T>::zeros({out}, true)};
  };
  auto norm = [](std::size_t d) { return Norm{Tensor<T>::full({d}, T{1}, true), Tensor<T>::zeros({d}, true)}; };

  const std::size_t d = config_.d_model;
  embed_ = uniform_linear(config_.channels, d);
  positions_ = positional_encoding<T>(config_.window_length, d);
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    Layer layer;
    layer.q = uniform_linear(d, d);
    layer.k = uniform_linear(d, d);
    layer.v = uniform_linear(d, d);
    layer.o = uniform_linear(d, d);
    layer.ff1 = uniform_linear(d, config_.d_ff);
    layer.ff2 = uniform_linear(config_.d_ff, d);
    layer.ln1 = norm(d);
    layer.ln2 = norm(d);
    layers_.push_back(std::move(layer));
  }
  if (config_.query_projection) query_ = uniform_linear(d, d);
  head_ = Linear{Tensor<T>::zeros({d, config_.classes}, true), Tensor<T>::zeros({config_.classes}, true)};
}

template <typename T>
void TransformerClassifier<T>::check_input(const Tensor<T>& x) const {
  if (x.rank() != 3 || x.dim(1) != config_.window_length || x.dim(2) != config_.channels) {
    throw ShapeError("model expects input [B x " + std::to_string(config_.window_length) + " x " +
                     std::to_string(config_.channels) + "], got " + shape_str(x.shape()));
  }
}

template <typename T>
Tensor<T> TransformerClassifier<T>::embed(const Tensor<T>& x) const {
  if (x.rank() != 3 || x.dim(2) != config_.channels) {
    throw ShapeError("embedding expects " + std::to_string(config_.channels) + " channels, got input " +
                     shape_str(x.shape()));
  }
  return linear(x, embed_.weight, embed_.bias);
}

template <typename T>
Tensor<T> TransformerClassifier<T>::multi_head_attention(std::size_t layer, const Tensor<T>& x,
                                                         Tensor<T>* weights) const {
  const Layer& p = layers_.at(layer);
  const std::size_t batch = x.dim(0);
  const std::size_t steps = x.dim(1);
  const std::size_t heads = config_.n_heads;
  const std::size_t head_dim = config_.d_model / heads;
  auto split_heads = [&](const Tensor<T>& t) {
    return permute(reshape(t, {batch, steps, heads, head_dim}), {0, 2, 1, 3});
  };
  const Tensor<T> q = split_heads(linear(x, p.q.weight, p.q.bias));
  const Tensor<T> k = split_heads(linear(x, p.k.weight, p.k.bias));
  const Tensor<T> v = split_heads(linear(x, p.v.weight, p.v.bias));
  const T inv_sqrt = T{1} / static_cast<T>(std::sqrt(static_cast<double>(head_dim)));
  const Tensor<T> attn = softmax(scale(bmm(q, k, true), inv_sqrt), 3);
  if (weights) *weights = attn;
  const Tensor<T> context = reshape(permute(bmm(attn, v), {0, 2, 1, 3}), {batch, steps, config_.d_model});
  return linear(context, p.o.weight, p.o.bias);
}

template <typename T>
Tensor<T> TransformerClassifier<T>::encoder_layer(std::size_t layer, const Tensor<T>& x,
                                                  Tensor<T>* attention_weights) const {
  if (x.rank() != 3 || x.dim(2) != config_.d_model) {
    throw ShapeError("encoder layer expects [B x T x " + std::to_string(config_.d_model) + "], got " +
                     shape_str(x.shape()));
  }
  const Layer& p = layers_.at(layer);
  const T eps = static_cast<T>(config_.layer_norm_eps);
  const Tensor<T> h = layer_norm(add(x, multi_head_attention(layer, x, attention_weights)), p.ln1.gamma, p.ln1.beta, eps);
  const Tensor<T> ff = linear(relu(linear(h, p.ff1.weight, p.ff1.bias)), p.ff2.weight, p.ff2.bias);
  return layer_norm(add(h, ff), p.ln2.gamma, p.ln2.beta, eps);
}

template <typename T>
PoolResult<T> TransformerClassifier<T>::attention_pool(const Tensor<T>& h) const {
  if (h.rank() != 3 || h.dim(2) != config_.d_model) {
    throw ShapeError("attention pooling expects [B x T x " + std::to_string(config_.d_model) + "], got " +
                     shape_str(h.shape()));
  }
  const std::size_t batch = h.dim(0);
  const std::size_t steps = h.dim(1);
  const std::size_t d = config_.d_model;
  Tensor<T> query = select(h, 1, steps - 1);
  if (config_.query_projection) query = linear(query, query_.weight, query_.bias);
  Tensor<T> scores = bmm(reshape(query, {batch, 1, d}), h, true);
  if (config_.attention_scaling) scores = scale(scores, T{1} / static_cast<T>(std::sqrt(static_cast<double>(d))));
  const Tensor<T> weights = softmax(scores, 2);
  return {reshape(bmm(weights, h), {batch, d}), reshape(weights, {batch, steps})};
}

template <typename T>
Tensor<T> TransformerClassifier<T>::forward(const Tensor<T>& x) const {
  check_input(x);
  Tensor<T> h = add(embed(x), positions_);
  for (std::size_t l = 0; l < layers_.size(); ++l) h = encoder_layer(l, h);
  return linear(attention_pool(h).output, head_.weight, head_.bias);
}

template <typename T>
std::vector<typename TransformerClassifier<T>::Parameter> TransformerClassifier<T>::parameters() const {
  std::vector<Parameter> out;
  auto push_linear = [&](const std::string& name, const Linear& l) {
    out.push_back({name + ".weight", l.weight});
    out.push_back({name + ".bias", l.bias});
  };
  auto push_norm = [&](const std::string& name, const Norm& n) {
    out.push_back({name + ".gamma", n.gamma});
    out.push_back({name + ".beta", n.beta});
  };
  push_linear("embed", embed_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string prefix = "layers." + std::to_string(l) + ".";
    push_linear(prefix + "attn.q", layers_[l].q);
    push_linear(prefix + "attn.k", layers_[l].k);
    push_linear(prefix + "attn.v", layers_[l].v);
    push_linear(prefix + "attn.o", layers_[l].o);
    push_linear(prefix + "ff1", layers_[l].ff1);
    push_linear(prefix + "ff2", layers_[l].ff2);
    push_norm(prefix + "ln1", layers_[l].ln1);
    push_norm(prefix + "ln2", layers_[l].ln2);
  }
  if (config_.query_projection) push_linear("pool.query", query_);
  push_linear("head", head_);
  return out;
}

template <typename T>
std::vector<Tensor<T>> TransformerClassifier<T>::parameter_tensors() const {
  std::vector<Tensor<T>> out;
  for (auto& p : parameters()) out.push_back(p.tensor);
  return out;
}

template <typename T>
std::size_t TransformerClassifier<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.tensor.numel();
  return total;
}

template <typename T>
void TransformerClassifier<T>::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

template Tensor<float> positional_encoding<float>(std::size_t, std::size_t);
template Tensor<double> positional_encoding<double>(std::size_t, std::size_t);
template class TransformerClassifier<float>;
template class TransformerClassifier<double>;

}  // namespace glovenet
