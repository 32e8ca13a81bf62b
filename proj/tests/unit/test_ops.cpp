#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "glovenet/error.hpp"
#include "glovenet/ops.hpp"
#include "support/gradcheck.hpp"

using namespace glovenet;
using glovenet::testing::gradcheck;
using glovenet::testing::project;
using glovenet::testing::random_tensor;

namespace {

template <typename T>
std::vector<T> naive_matmul(const std::vector<T>& a, const std::vector<T>& b, std::size_t m, std::size_t k,
                            std::size_t n) {
  std::vector<T> c(m * n, T{0});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc{0};
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
  return c;
}

std::vector<float> values_of(const Tensor<float>& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Tensor<float> eye({2, 2}, {1, 0, 0, 1});
  Tensor<float> b({2, 2}, {5, 6, 7, 8});
  EXPECT_EQ(values_of(matmul(eye, b)), (std::vector<float>{5, 6, 7, 8}));
}

TEST(Matmul, ZeroTimesAnythingIsZero) {
  auto b = random_tensor<float>({3, 4}, 1, -1, 1, false);
  auto c = matmul(Tensor<float>::zeros({2, 3}), b);
  EXPECT_EQ(c.shape(), (Shape{2, 4}));
  for (float v : c.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Matmul, SmallProduct) {
  Tensor<float> a({2, 2}, {1, 2, 3, 4});
  Tensor<float> b({2, 2}, {5, 6, 7, 8});
  EXPECT_EQ(values_of(matmul(a, b)), (std::vector<float>{19, 22, 43, 50}));
}

TEST(Matmul, MatchesNaiveTripleLoopBitForBit) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 7, k = 1 + rng() % 9, n = 1 + rng() % 6;
    auto a = random_tensor<float>({m, k}, rng(), -3, 3, false);
    auto b = random_tensor<float>({k, n}, rng(), -3, 3, false);
    const auto c = matmul(a, b);
    const auto oracle = naive_matmul(values_of(a), values_of(b), m, k, n);
    ASSERT_EQ(values_of(c), oracle) << m << "x" << k << "x" << n;
  }
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  auto a = Tensor<float>::zeros({2, 3});
  auto b = Tensor<float>::zeros({4, 2});
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

TEST(Bmm, TransposedMatchesExplicitTranspose) {
  auto a = random_tensor<double>({2, 3, 4}, 1, -1, 1, false);
  auto b = random_tensor<double>({2, 5, 4}, 2, -1, 1, false);
  const auto c = bmm(a, b, true);
  const auto c2 = bmm(a, permute(b, {0, 2, 1}));
  ASSERT_EQ(c.shape(), (Shape{2, 3, 5}));
  for (std::size_t i = 0; i < c.numel(); ++i) EXPECT_NEAR(c.data()[i], c2.data()[i], 1e-12);
}

TEST(Softmax, UniformInputGivesUniformOutput) {
  auto y = softmax(Tensor<double>({3}, {0, 0, 0}), 0);
  for (double v : y.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Softmax, ShiftInvariant) {
  auto x = random_tensor<double>({4, 5}, 3, -2, 2, false);
  auto shifted = x.clone();
  for (auto& v : shifted.data()) v += 123.5;
  auto a = softmax(x, 1);
  auto b = softmax(shifted, 1);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);
}

TEST(Softmax, LogThreeGivesQuarterAndThreeQuarters) {
  auto y = softmax(Tensor<double>({2}, {0.0, std::log(3.0)}), 0);
  EXPECT_NEAR(y.data()[0], 0.25, 1e-15);
  EXPECT_NEAR(y.data()[1], 0.75, 1e-15);
}

TEST(Softmax, RowsSumToOneAndStayInOpenInterval) {
  auto x = random_tensor<float>({6, 3, 7}, 4, -20, 20, false);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    auto y = softmax(x, axis);
    const auto& s = y.shape();
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < 3; ++d) inner *= s[d];
    std::size_t outer = y.numel() / (s[axis] * inner);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        double total = 0.0;
        for (std::size_t j = 0; j < s[axis]; ++j) {
          const float v = y.data()[(o * s[axis] + j) * inner + in];
          EXPECT_GT(v, 0.0f);
          EXPECT_LE(v, 1.0f);
          total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-5);
      }
    }
  }
}

TEST(Softmax, LargeInputsStayFinite) {
  auto y = softmax(Tensor<float>({3}, {1000.0f, 999.0f, -1000.0f}), 0);
  EXPECT_TRUE(y.all_finite());
  EXPECT_NEAR(y.data()[0], 1.0f / (1.0f + std::exp(-1.0f)), 1e-6);
}

TEST(Softmax, AxisOutOfRangeIsShapeError) {
  EXPECT_THROW(softmax(Tensor<float>::zeros({2, 2}), 2), ShapeError);
}

TEST(LayerNorm, ConstantVectorMapsToZero) {
  auto y = layer_norm(Tensor<double>::full({1, 4}, 3.0), Tensor<double>::full({4}, 1.0), Tensor<double>::zeros({4}),
                      1e-5);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, AlreadyNormalizedPairIsUnchanged) {
  auto y = layer_norm(Tensor<double>({2}, {1.0, -1.0}), Tensor<double>::full({2}, 1.0), Tensor<double>::zeros({2}),
                      1e-12);
  EXPECT_NEAR(y.data()[0], 1.0, 1e-10);
  EXPECT_NEAR(y.data()[1], -1.0, 1e-10);
}

TEST(LayerNorm, RandomRowsHaveZeroMeanUnitVariance) {
  auto x = random_tensor<float>({5, 16}, 8, -4, 4, false);
  auto y = layer_norm(x, Tensor<float>::full({16}, 1.0f), Tensor<float>::zeros({16}), 1e-5f);
  for (std::size_t r = 0; r < 5; ++r) {
    double mu = 0, var = 0;
    for (std::size_t c = 0; c < 16; ++c) mu += y.data()[r * 16 + c];
    mu /= 16;
    for (std::size_t c = 0; c < 16; ++c) var += (y.data()[r * 16 + c] - mu) * (y.data()[r * 16 + c] - mu);
    var /= 16;
    EXPECT_LT(std::abs(mu), 1e-6);
    EXPECT_LT(std::abs(var - 1.0), 1e-3);
  }
}

TEST(LayerNorm, GammaShapeMismatchThrows) {
  EXPECT_THROW(layer_norm(Tensor<float>::zeros({2, 4}), Tensor<float>::zeros({3}), Tensor<float>::zeros({4}), 1e-5f),
               ShapeError);
}

TEST(CrossEntropy, PeakedLogitsGiveNearZeroLoss) {
  Tensor<double> logits({1, 3}, {50.0, 0.0, 0.0});
  const int label = 0;
  EXPECT_LT(cross_entropy(logits, std::span<const int>(&label, 1)).item(), 1e-20);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const std::vector<int> labels{0, 4, 2};
  auto loss = cross_entropy(Tensor<double>::zeros({3, 5}), labels);
  EXPECT_NEAR(loss.item(), std::log(5.0), 1e-15);
}

TEST(CrossEntropy, LogThreeExample) {
  const std::vector<int> labels{1};
  auto loss = cross_entropy(Tensor<double>({1, 2}, {0.0, std::log(3.0)}), labels);
  EXPECT_NEAR(loss.item(), -std::log(0.75), 1e-15);
  EXPECT_NEAR(loss.item(), 0.28768, 1e-5);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHotOverBatch) {
  auto logits = random_tensor<double>({3, 4}, 12);
  const std::vector<int> labels{2, 0, 3};
  cross_entropy(logits, labels).backward();
  auto p = softmax(logits.detach(), 1);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double expected = (p.data()[b * 4 + c] - (static_cast<int>(c) == labels[b] ? 1.0 : 0.0)) / 3.0;
      EXPECT_NEAR(logits.grad()[b * 4 + c], expected, 1e-15);
    }
  }
}

TEST(CrossEntropy, LabelOutOfRangeIsIndexError) {
  const std::vector<int> too_big{0, 3};
  const std::vector<int> negative{-1, 0};
  EXPECT_THROW(cross_entropy(Tensor<float>::zeros({2, 3}), too_big), IndexError);
  EXPECT_THROW(cross_entropy(Tensor<float>::zeros({2, 3}), negative), IndexError);
}

TEST(Relu, ZerosNegativesAndPassesGradientOnPositives) {
  Tensor<double> x({4}, {-2.0, -0.5, 0.5, 3.0}, true);
  auto y = relu(x);
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{0, 0, 0.5, 3.0}));
  sum(y).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{0, 0, 1, 1}));
}

TEST(Select, DropsTheAxis) {
  Tensor<float> x({2, 3, 2}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  auto y = select(x, 1, 2);
  EXPECT_EQ(y.shape(), (Shape{2, 2}));
  EXPECT_EQ(values_of(y), (std::vector<float>{4, 5, 10, 11}));
  EXPECT_THROW(select(x, 1, 3), IndexError);
}

TEST(Permute, MovesAxes) {
  Tensor<float> x({2, 3}, {0, 1, 2, 3, 4, 5});
  auto y = permute(x, {1, 0});
  EXPECT_EQ(y.shape(), (Shape{3, 2}));
  EXPECT_EQ(values_of(y), (std::vector<float>{0, 3, 1, 4, 2, 5}));
}

TEST(Reshape, RejectsWrongElementCount) {
  EXPECT_THROW(reshape(Tensor<float>::zeros({2, 3}), {4, 2}), ShapeError);
}

TEST(Add, BroadcastsTrailingSuffix) {
  Tensor<float> a({2, 2}, {1, 2, 3, 4});
  Tensor<float> b({2}, {10, 20});
  EXPECT_EQ(values_of(add(a, b)), (std::vector<float>{11, 22, 13, 24}));
  EXPECT_THROW(add(a, Tensor<float>::zeros({3})), ShapeError);
}

TEST(Determinism, RepeatedEvaluationIsBitIdentical) {
  auto a = random_tensor<float>({4, 8, 16}, 1, -1, 1, false);
  auto w = random_tensor<float>({16, 16}, 2, -1, 1, false);
  auto b = random_tensor<float>({16}, 3, -1, 1, false);
  auto run = [&] { return values_of(softmax(bmm(linear(a, w, b), linear(a, w, b), true), 2)); };
  EXPECT_EQ(run(), run());
}

// Finite-difference checks of every differentiable op, on both precisions.
template <typename T>
class OpGradients : public ::testing::Test {
 protected:
  static double tolerance() { return sizeof(T) == 4 ? 1e-3 : 1e-6; }

  void check(const std::function<Tensor<T>()>& f, std::vector<Tensor<T>> inputs) {
    const auto r = gradcheck<T>(f, std::move(inputs));
    EXPECT_LE(r.relative_error, tolerance()) << "checked " << r.checked << ", skipped " << r.skipped;
    EXPECT_GT(r.checked, 0u);
    EXPECT_LE(r.skipped * 20, r.checked + r.skipped);
  }
};

using Precisions = ::testing::Types<float, double>;
TYPED_TEST_SUITE(OpGradients, Precisions);

TYPED_TEST(OpGradients, Matmul) {
  using T = TypeParam;
  auto a = random_tensor<T>({3, 4}, 1);
  auto b = random_tensor<T>({4, 2}, 2);
  this->check([&] { return project(matmul(a, b)); }, {a, b});
}

TYPED_TEST(OpGradients, Bmm) {
  using T = TypeParam;
  auto a = random_tensor<T>({2, 3, 4}, 3);
  auto b = random_tensor<T>({2, 4, 3}, 4);
  auto bt = random_tensor<T>({2, 3, 4}, 5);
  this->check([&] { return project(bmm(a, b)); }, {a, b});
  this->check([&] { return project(bmm(a, bt, true)); }, {a, bt});
}

TYPED_TEST(OpGradients, Linear) {
  using T = TypeParam;
  auto x = random_tensor<T>({2, 3, 4}, 6);
  auto w = random_tensor<T>({4, 3}, 7);
  auto b = random_tensor<T>({3}, 8);
  this->check([&] { return project(linear(x, w, b)); }, {x, w, b});
}

TYPED_TEST(OpGradients, AddMulScale) {
  using T = TypeParam;
  auto a = random_tensor<T>({3, 4}, 9);
  auto b = random_tensor<T>({3, 4}, 10);
  auto row = random_tensor<T>({4}, 11);
  this->check([&] { return project(add(a, b)); }, {a, b});
  this->check([&] { return project(add(a, row)); }, {a, row});
  this->check([&] { return project(mul(a, b)); }, {a, b});
  this->check([&] { return project(scale(a, static_cast<T>(-2.5))); }, {a});
}

TYPED_TEST(OpGradients, SumAndMean) {
  using T = TypeParam;
  auto a = random_tensor<T>({2, 3, 4}, 12);
  this->check([&] { return sum(mul(a, a)); }, {a});
  this->check([&] { return mean(mul(a, a)); }, {a});
}

TYPED_TEST(OpGradients, Relu) {
  using T = TypeParam;
  // Keep inputs clear of the kink so the difference quotient is meaningful.
  auto a = random_tensor<T>({4, 4}, 13, 0.1, 1.0);
  for (std::size_t i = 0; i < a.numel(); i += 2) a.data()[i] = -a.data()[i];
  this->check([&] { return project(relu(a)); }, {a});
}

TYPED_TEST(OpGradients, Softmax) {
  using T = TypeParam;
  auto a = random_tensor<T>({2, 3, 4}, 14, -2, 2);
  for (std::size_t axis = 0; axis < 3; ++axis) this->check([&] { return project(softmax(a, axis)); }, {a});
}

TYPED_TEST(OpGradients, LayerNorm) {
  using T = TypeParam;
  auto x = random_tensor<T>({3, 4}, 15, -2, 2);
  auto g = random_tensor<T>({4}, 16, 0.5, 1.5);
  auto b = random_tensor<T>({4}, 17);
  this->check([&] { return project(layer_norm(x, g, b, static_cast<T>(1e-5))); }, {x, g, b});
}

TYPED_TEST(OpGradients, CrossEntropy) {
  using T = TypeParam;
  auto logits = random_tensor<T>({4, 3}, 18, -2, 2);
  const std::vector<int> labels{0, 2, 1, 2};
  this->check([&] { return cross_entropy(logits, labels); }, {logits});
}

TYPED_TEST(OpGradients, ShapeOps) {
  using T = TypeParam;
  auto a = random_tensor<T>({2, 3, 4}, 19);
  this->check([&] { return project(reshape(a, {4, 6})); }, {a});
  this->check([&] { return project(permute(a, {2, 0, 1})); }, {a});
  this->check([&] { return project(select(a, 1, 2)); }, {a});
}

TYPED_TEST(OpGradients, ReusedInputAccumulates) {
  using T = TypeParam;
  auto a = random_tensor<T>({3, 3}, 20);
  this->check([&] { return project(add(matmul(a, a), mul(a, a))); }, {a});
}
