#include "glovenet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glovenet/error.hpp"

namespace glovenet {

namespace {

template <typename T>
void require_defined(const Tensor<T>& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined input tensor");
}

// c[m x n] += a[m x k] . b[k x n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x n] += a[m x k] . b[n x k]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc{0};
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * n + j] += acc;
    }
  }
}

// c[m x n] += a[k x m]^T . b[k x n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = a[p * m + i];
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  }
  return bmm(a, b, false);
}

template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b) {
  require_defined(a, "bmm");
  require_defined(b, "bmm");
  const auto& as = a.shape();
  const auto& bs = b.shape();
  const bool leading_match =
      as.size() >= 2 && as.size() == bs.size() && std::equal(as.begin(), as.end() - 2, bs.begin());
  const std::size_t m = as.size() >= 2 ? as[as.size() - 2] : 0;
  const std::size_t k = as.size() >= 2 ? as.back() : 0;
  const std::size_t bk = bs.size() >= 2 ? (transpose_b ? bs.back() : bs[bs.size() - 2]) : 0;
  const std::size_t n = bs.size() >= 2 ? (transpose_b ? bs[bs.size() - 2] : bs.back()) : 0;
  if (!leading_match || k != bk) {
    throw ShapeError("bmm: cannot multiply " + shape_str(as) + " by " + shape_str(bs) +
                     (transpose_b ? " (transposed)" : ""));
  }
  const std::size_t batch = a.numel() / (m * k);
  Shape out_shape(as.begin(), as.end() - 2);
  out_shape.push_back(m);
  out_shape.push_back(n);

  std::vector<T> out(batch * m * n, T{0});
  const T* ad = a.data().data();
  const T* bd = b.data().data();
  for (std::size_t s = 0; s < batch; ++s) {
    if (transpose_b) {
      gemm_nt(ad + s * m * k, bd + s * n * k, out.data() + s * m * n, m, k, n);
    } else {
      gemm_nn(ad + s * m * k, bd + s * k * n, out.data() + s * m * n, m, k, n);
    }
  }

  return Tensor<T>::from_op(std::move(out_shape), std::move(out), {a, b},
                            [batch, m, k, n, transpose_b](const detail::Node<T>& self) {
    auto& na = *self.parents[0];
    auto& nb = *self.parents[1];
    const T* g = self.grad.data();
    if (na.requires_grad) {
      T* ga = na.ensure_grad().data();
      for (std::size_t s = 0; s < batch; ++s) {
        if (transpose_b) {
          gemm_nn(g + s * m * n, nb.data.data() + s * n * k, ga + s * m * k, m, n, k);
        } else {
          gemm_nt(g + s * m * n, nb.data.data() + s * k * n, ga + s * m * k, m, n, k);
        }
      }
    }
    if (nb.requires_grad) {
      T* gb = nb.ensure_grad().data();
      for (std::size_t s = 0; s < batch; ++s) {
        if (transpose_b) {
          gemm_tn(g + s * m * n, na.data.data() + s * m * k, gb + s * n * k, n, m, k);
        } else {
          gemm_tn(na.data.data() + s * m * k, g + s * m * n, gb + s * k * n, k, m, n);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_defined(x, "linear");
  require_defined(weight, "linear");
  if (weight.rank() != 2 || x.rank() < 1 || x.shape().back() != weight.dim(0)) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  const std::size_t in = weight.dim(0);
  const std::size_t out_dim = weight.dim(1);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != out_dim)) {
    throw ShapeError("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  const std::size_t rows = x.numel() / in;
  Shape out_shape = x.shape();
  out_shape.back() = out_dim;

  std::vector<T> out(rows * out_dim, T{0});
  gemm_nn(x.data().data(), weight.data().data(), out.data(), rows, in, out_dim);
  if (bias.defined()) {
    const auto b = bias.data();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < out_dim; ++j) out[r * out_dim + j] += b[j];
    }
  }

  std::vector<Tensor<T>> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor<T>::from_op(std::move(out_shape), std::move(out), inputs,
                            [rows, in, out_dim](const detail::Node<T>& self) {
    auto& nx = *self.parents[0];
    auto& nw = *self.parents[1];
    const T* g = self.grad.data();
    if (nx.requires_grad) gemm_nt(g, nw.data.data(), nx.ensure_grad().data(), rows, out_dim, in);
    if (nw.requires_grad) gemm_tn(nx.data.data(), g, nw.ensure_grad().data(), in, rows, out_dim);
    if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
      auto gb = self.parents[2]->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < out_dim; ++j) gb[j] += g[r * out_dim + j];
      }
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.rbegin(), bs.rend(), as.rbegin())) {
    throw ShapeError("add: cannot broadcast " + shape_str(bs) + " onto " + shape_str(as));
  }
  const std::size_t inner = b.numel();
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<T> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i % inner];
  return Tensor<T>::from_op(as, std::move(out), {a, b}, [inner](const detail::Node<T>& self) {
    const auto& g = self.grad;
    if (self.parents[0]->requires_grad) {
      auto ga = self.parents[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (self.parents[1]->requires_grad) {
      auto gb = self.parents[1]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % inner] += g[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  if (a.shape() != b.shape()) {
    throw ShapeError("mul: shapes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<T> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [](const detail::Node<T>& self) {
    auto& na = *self.parents[0];
    auto& nb = *self.parents[1];
    const auto& g = self.grad;
    if (na.requires_grad) {
      auto ga = na.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * nb.data[i];
    }
    if (nb.requires_grad) {
      auto gb = nb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * na.data[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  require_defined(x, "scale");
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [factor](const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  require_defined(x, "sum");
  T total{0};
  for (T v : x.data()) total += v;
  return Tensor<T>::from_op(Shape{1}, {total}, {x}, [](const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    for (auto& v : gx) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  require_defined(x, "mean");
  return scale(sum(x), T{1} / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  require_defined(x, "relu");
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v > T{0} ? v : T{0};
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [](const detail::Node<T>& self) {
    auto& nx = *self.parents[0];
    auto gx = nx.ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (nx.data[i] > T{0}) gx[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  require_defined(x, "softmax");
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " + shape_str(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  const auto xd = x.data();
  std::vector<T> out(xd.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      T peak = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < s.extent; ++i) peak = std::max(peak, xd[base + i * s.inner]);
      T total{0};
      for (std::size_t i = 0; i < s.extent; ++i) {
        const T e = std::exp(xd[base + i * s.inner] - peak);
        out[base + i * s.inner] = e;
        total += e;
      }
      for (std::size_t i = 0; i < s.extent; ++i) out[base + i * s.inner] /= total;
    }
  }
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [s](const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    const auto& y = self.data;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.extent * s.inner + in;
        T dot{0};
        for (std::size_t i = 0; i < s.extent; ++i) dot += g[base + i * s.inner] * y[base + i * s.inner];
        for (std::size_t i = 0; i < s.extent; ++i) {
          const std::size_t idx = base + i * s.inner;
          gx[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  require_defined(x, "layer_norm");
  require_defined(gamma, "layer_norm");
  require_defined(beta, "layer_norm");
  if (x.rank() < 1) throw ShapeError("layer_norm: input has no axes");
  const std::size_t d = x.shape().back();
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gamma " + shape_str(gamma.shape()) + " / beta " + shape_str(beta.shape()) +
                     " do not match last axis of " + shape_str(x.shape()));
  }
  if (!(eps > T{0})) throw UsageError("layer_norm: eps must be positive");

  const std::size_t rows = x.numel() / d;
  const auto xd = x.data();
  const auto gd = gamma.data();
  const auto bd = beta.data();
  std::vector<T> out(xd.size());
  std::vector<T> x_hat(xd.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xd.data() + r * d;
    T mu{0};
    for (std::size_t i = 0; i < d; ++i) mu += row[i];
    mu /= static_cast<T>(d);
    T var{0};
    for (std::size_t i = 0; i < d; ++i) var += (row[i] - mu) * (row[i] - mu);
    var /= static_cast<T>(d);
    const T inv = T{1} / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t i = 0; i < d; ++i) {
      const T h = (row[i] - mu) * inv;
      x_hat[r * d + i] = h;
      out[r * d + i] = gd[i] * h + bd[i];
    }
  }

  return Tensor<T>::from_op(x.shape(), std::move(out), {x, gamma, beta},
                            [rows, d, x_hat = std::move(x_hat), inv_std = std::move(inv_std)](
                                const detail::Node<T>& self) {
    auto& nx = *self.parents[0];
    auto& ng = *self.parents[1];
    auto& nb = *self.parents[2];
    const auto& g = self.grad;
    if (ng.requires_grad) {
      auto gg = ng.ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < d; ++i) gg[i] += g[r * d + i] * x_hat[r * d + i];
      }
    }
    if (nb.requires_grad) {
      auto gb = nb.ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < d; ++i) gb[i] += g[r * d + i];
      }
    }
    if (nx.requires_grad) {
      auto gx = nx.ensure_grad();
      const T inv_d = T{1} / static_cast<T>(d);
      for (std::size_t r = 0; r < rows; ++r) {
        T mean_dh{0};
        T mean_dh_h{0};
        for (std::size_t i = 0; i < d; ++i) {
          const T dh = g[r * d + i] * ng.data[i];
          mean_dh += dh;
          mean_dh_h += dh * x_hat[r * d + i];
        }
        mean_dh *= inv_d;
        mean_dh_h *= inv_d;
        for (std::size_t i = 0; i < d; ++i) {
          const T dh = g[r * d + i] * ng.data[i];
          gx[r * d + i] += inv_std[r] * (dh - mean_dh - x_hat[r * d + i] * mean_dh_h);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  require_defined(logits, "cross_entropy");
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw IndexError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
  const auto xd = logits.data();
  std::vector<T> probs(xd.size());
  T total{0};
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = xd.data() + b * classes;
    T peak = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < classes; ++c) peak = std::max(peak, row[c]);
    T z{0};
    for (std::size_t c = 0; c < classes; ++c) {
      const T e = std::exp(row[c] - peak);
      probs[b * classes + c] = e;
      z += e;
    }
    for (std::size_t c = 0; c < classes; ++c) probs[b * classes + c] /= z;
    total += peak + std::log(z) - row[labels[b]];
  }
  const T loss = total / static_cast<T>(batch);
  std::vector<int> targets(labels.begin(), labels.end());
  return Tensor<T>::from_op(Shape{1}, {loss}, {logits},
                            [batch, classes, probs = std::move(probs), targets = std::move(targets)](
                                const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    const T g = self.grad[0] / static_cast<T>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < classes; ++c) {
        const T onehot = static_cast<std::size_t>(targets[b]) == c ? T{1} : T{0};
        gx[b * classes + c] += g * (probs[b * classes + c] - onehot);
      }
    }
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  require_defined(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return Tensor<T>::from_op(std::move(shape), std::move(out), {x}, [](const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& axes) {
  require_defined(x, "permute");
  const auto& in_shape = x.shape();
  const std::size_t rank = in_shape.size();
  std::vector<bool> seen(rank, false);
  bool valid = axes.size() == rank;
  for (std::size_t a : axes) {
    if (!valid || a >= rank || seen[a]) {
      valid = false;
      break;
    }
    seen[a] = true;
  }
  if (!valid) throw ShapeError("permute: invalid axis order for " + shape_str(in_shape));

  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[axes[i]];

  const std::size_t count = x.numel();
  std::vector<std::size_t> source(count);
  std::vector<std::size_t> counter(rank, 0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < rank; ++i) offset += counter[i] * in_strides[axes[i]];
    source[flat] = offset;
    for (std::size_t i = rank; i-- > 0;) {
      if (++counter[i] < out_shape[i]) break;
      counter[i] = 0;
    }
  }
  const auto xd = x.data();
  std::vector<T> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = xd[source[i]];
  return Tensor<T>::from_op(std::move(out_shape), std::move(out), {x},
                            [source = std::move(source)](const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < source.size(); ++i) gx[source[i]] += self.grad[i];
  });
}

template <typename T>
Tensor<T> select(const Tensor<T>& x, std::size_t axis, std::size_t index) {
  require_defined(x, "select");
  if (axis >= x.rank()) throw ShapeError("select: axis " + std::to_string(axis) + " out of range for " + shape_str(x.shape()));
  if (index >= x.dim(axis)) {
    throw IndexError("select: index " + std::to_string(index) + " on axis " + std::to_string(axis) +
                     " out of range for " + shape_str(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape.push_back(1);
  const auto xd = x.data();
  std::vector<T> out(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) out[o * s.inner + in] = xd[(o * s.extent + index) * s.inner + in];
  }
  return Tensor<T>::from_op(std::move(out_shape), std::move(out), {x}, [s, index](const detail::Node<T>& self) {
    auto gx = self.parents[0]->ensure_grad();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        gx[(o * s.extent + index) * s.inner + in] += self.grad[o * s.inner + in];
      }
    }
  });
}

#define GLOVENET_INSTANTIATE_OPS(T)                                                        \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> bmm(const Tensor<T>&, const Tensor<T>&, bool);                        \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);         \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> scale(const Tensor<T>&, T);                                           \
  template Tensor<T> sum(const Tensor<T>&);                                                \
  template Tensor<T> mean(const Tensor<T>&);                                               \
  template Tensor<T> relu(const Tensor<T>&);                                               \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                               \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);  \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);                \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                     \
  template Tensor<T> permute(const Tensor<T>&, const std::vector<std::size_t>&);           \
  template Tensor<T> select(const Tensor<T>&, std::size_t, std::size_t);

GLOVENET_INSTANTIATE_OPS(float)
GLOVENET_INSTANTIATE_OPS(double)

#undef GLOVENET_INSTANTIATE_OPS

}  // namespace glovenet
