#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace glovenet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents.
  std::function<void(const Node&)> backward;

  bool is_leaf() const { return !backward; }
  std::span<T> ensure_grad();
};

}  // namespace detail

// Thread-local switch for graph recording. Disabled inside a NoGradGuard.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool enabled);
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Dense row-major tensor. Copies share storage and graph position, so a
// Tensor behaves like a handle; use clone() for an independent copy.
//
// Operations on tensors with requires_grad record a node in the graph;
// backward() on a scalar result walks that graph in reverse topological
// order. Leaf gradients accumulate across calls until zero_grad().
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<T> data();
  std::span<const T> data() const;
  T item() const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const T> grad() const;
  // Drops the gradient; has_grad() is false until the next backward().
  void zero_grad();

  // Reverse-mode sweep from this scalar. Throws ContractError otherwise.
  void backward() const;

  // Same values, no graph history.
  Tensor detach() const;
  Tensor clone() const;
  bool all_finite() const;

  // Builds the result of a differentiable operation. The closure receives
  // the output node; inputs are reachable through out.parents in the order
  // given here.
  static Tensor from_op(Shape shape, std::vector<T> values, const std::vector<Tensor>& inputs,
                        std::function<void(const detail::Node<T>&)> backward);

  const std::shared_ptr<detail::Node<T>>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node<T>> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node<T>> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace glovenet
