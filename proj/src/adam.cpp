#include "glovenet/adam.hpp"

#include <cmath>
#include <string>

#include "glovenet/error.hpp"

namespace glovenet {

template <typename T>
AdamState<T> AdamState<T>::init(std::span<const Tensor<T>> params, AdamOptions options) {
  AdamState state;
  state.options = options;
  for (const auto& p : params) {
    state.m.emplace_back(p.numel(), T{0});
    state.v.emplace_back(p.numel(), T{0});
  }
  return state;
}

namespace {

template <typename T>
void update_one(Tensor<T>& param, std::span<const T> grad, std::vector<T>& m, std::vector<T>& v,
                const AdamOptions& o, double correction1, double correction2) {
  auto values = param.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grad.empty() ? 0.0 : static_cast<double>(grad[i]);
    const double mi = o.beta1 * static_cast<double>(m[i]) + (1.0 - o.beta1) * g;
    const double vi = o.beta2 * static_cast<double>(v[i]) + (1.0 - o.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / correction1;
    const double v_hat = vi / correction2;
    values[i] = static_cast<T>(static_cast<double>(values[i]) -
                               o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon));
  }
}

template <typename T>
void check_state(std::span<Tensor<T>> params, const AdamState<T>& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].numel() || state.v[i].size() != params[i].numel()) {
      throw ShapeError("adam_step: moment buffers of parameter " + std::to_string(i) + " do not match " +
                       shape_str(params[i].shape()));
    }
  }
}

}  // namespace

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const std::vector<T>> grads, AdamState<T>& state) {
  check_state(params, state);
  if (grads.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].numel()) {
      throw ShapeError("adam_step: gradient " + std::to_string(i) + " has " + std::to_string(grads[i].size()) +
                       " values for parameter " + shape_str(params[i].shape()));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.options.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.options.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    update_one(params[i], std::span<const T>(grads[i]), state.m[i], state.v[i], state.options, c1, c2);
  }
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
  check_state(params, state);
  ++state.step;
  const double c1 = 1.0 - std::pow(state.options.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.options.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    update_one(params[i], params[i].grad(), state.m[i], state.v[i], state.options, c1, c2);
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(std::span<Tensor<float>>, std::span<const std::vector<float>>, AdamState<float>&);
template void adam_step(std::span<Tensor<double>>, std::span<const std::vector<double>>, AdamState<double>&);
template void adam_step(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace glovenet
