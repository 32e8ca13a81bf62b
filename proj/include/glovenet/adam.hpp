#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glovenet/tensor.hpp"

namespace glovenet {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment estimates for a fixed list of parameters.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::uint64_t step = 0;
  AdamOptions options;

  static AdamState init(std::span<const Tensor<T>> params, AdamOptions options = {});
};

// One bias-corrected Adam update of every parameter from the matching
// gradient buffer. Increments state.step.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const std::vector<T>> grads, AdamState<T>& state);

// Same update using each parameter's accumulated gradient; parameters
// without a gradient are treated as having a zero gradient.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state);

}  // namespace glovenet
