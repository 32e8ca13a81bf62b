#include <gtest/gtest.h>

#include <cmath>

#include "glovenet/error.hpp"
#include "glovenet/metrics.hpp"
#include "glovenet/training.hpp"
#include "support/fixtures.hpp"

using namespace glovenet;
using glovenet::testing::tiny_dataset;

namespace {

ModelConfig small_config(const GestureDataset& ds) {
  ModelConfig c;
  c.d_model = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 32;
  c.window_length = ds.window_length;
  c.channels = ds.channels;
  c.classes = ds.num_classes();
  return c;
}

}  // namespace

TEST(TrainConfig, RejectsNonPositiveSettings) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(Train, InitialLossIsLogOfClassCount) {
  const auto ds = tiny_dataset(4, 3, 8, 1);
  TransformerClassifier<float> model(small_config(ds), 0);
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto log = train(model, ds, cfg);
  EXPECT_NEAR(log.initial_loss, std::log(3.0), 1e-6);
  ASSERT_EQ(log.epochs.size(), 1u);
  EXPECT_EQ(log.epochs[0].epoch, 1u);
}

TEST(Train, SeparableTwoClassSetReachesPerfectAccuracy) {
  const auto ds = tiny_dataset(10, 2, 8, 1, 3);
  TransformerClassifier<float> model(small_config(ds), 1);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  cfg.learning_rate = 3e-3;
  const auto log = train(model, ds, cfg);
  EXPECT_LT(log.epochs.back().loss, log.initial_loss);
  EXPECT_EQ(predict(model, ds), ds.labels);
}

TEST(Train, SameSeedGivesIdenticalLogAndWeights) {
  const auto ds = tiny_dataset(4, 3, 8, 1, 5);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 5;
  cfg.seed = 11;
  TransformerClassifier<float> a(small_config(ds), 2), b(small_config(ds), 2);
  EXPECT_EQ(train(a, ds, cfg), train(b, ds, cfg));
  const auto pa = a.parameter_tensors(), pb = b.parameter_tensors();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ASSERT_TRUE(std::equal(pa[i].data().begin(), pa[i].data().end(), pb[i].data().begin())) << i;
  }
  cfg.seed = 12;
  TransformerClassifier<float> c(small_config(ds), 2);
  EXPECT_FALSE(train(c, ds, cfg) == train(a, ds, cfg));
}

TEST(Train, LogCsvHasOneRowPerEpochPlusStart) {
  TrainLog log;
  log.initial_loss = 1.0986123;
  log.epochs = {{1, 0.5, 0.75}, {2, 0.25, 1.0}};
  EXPECT_EQ(log.to_csv(), "epoch,loss,accuracy\n0,1.098612,\n1,0.500000,0.750000\n2,0.250000,1.000000\n");
}

TEST(Train, RejectsEmptyOrMismatchedData) {
  const auto ds = tiny_dataset(2, 3, 8, 1);
  TransformerClassifier<float> model(small_config(ds), 0);
  EXPECT_THROW(train(model, ds.subset({}), TrainConfig{}), UsageError);
  const auto other = tiny_dataset(2, 3, 8, 2);
  EXPECT_THROW(train(model, other, TrainConfig{}), ShapeError);
  EXPECT_THROW(predict(model, other), ShapeError);
}

TEST(Train, PredictIsIndependentOfBatchSize) {
  const auto ds = tiny_dataset(5, 3, 8, 1, 9);
  auto model = glovenet::testing::toy_model<float>(4, small_config(ds));
  const auto reference = predict(model, ds, 1);
  EXPECT_EQ(predict(model, ds, 4), reference);
  EXPECT_EQ(predict(model, ds, 64), reference);
}

// --- metrics ----------------------------------------------------------------

TEST(Confusion, SmallExample) {
  const std::vector<int> truth{0, 0, 1}, pred{0, 1, 1};
  const auto eval = evaluate_predictions({"null", "wave"}, truth, pred);
  EXPECT_EQ(eval.confusion.count(0, 0), 1u);
  EXPECT_EQ(eval.confusion.count(0, 1), 1u);
  EXPECT_EQ(eval.confusion.count(1, 0), 0u);
  EXPECT_EQ(eval.confusion.count(1, 1), 1u);
  EXPECT_DOUBLE_EQ(eval.accuracy, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(eval.confusion.precision(1), 0.5);
  EXPECT_DOUBLE_EQ(eval.confusion.recall(0), 0.5);
  EXPECT_EQ(eval.confusion.to_csv(), "true\\predicted,null,wave\nnull,1,1\nwave,0,1\n");
}

TEST(Confusion, InvariantUnderJointReordering) {
  const std::vector<int> truth{2, 0, 1, 1, 2, 0, 2}, pred{2, 1, 1, 0, 2, 0, 1};
  const std::vector<std::string> names{"a", "b", "c"};
  const auto base = ConfusionMatrix::from_predictions(names, truth, pred);
  std::vector<int> rt(truth.rbegin(), truth.rend()), rp(pred.rbegin(), pred.rend());
  EXPECT_EQ(ConfusionMatrix::from_predictions(names, rt, rp), base);
  EXPECT_EQ(base.total(), 7u);
  EXPECT_EQ(base.correct(), 4u);
}

TEST(Confusion, MergeAddsCounts) {
  const std::vector<std::string> names{"a", "b"};
  auto m = ConfusionMatrix::from_predictions(names, std::vector<int>{0, 1}, std::vector<int>{0, 0});
  m.merge(ConfusionMatrix::from_predictions(names, std::vector<int>{1}, std::vector<int>{1}));
  EXPECT_EQ(m.count(1, 0), 1u);
  EXPECT_EQ(m.count(1, 1), 1u);
  EXPECT_THROW(m.merge(ConfusionMatrix({"x"})), ShapeError);
}

TEST(Confusion, ErrorsAndEmptyCases) {
  EXPECT_THROW(evaluate_predictions({"a"}, std::vector<int>{}, std::vector<int>{}), UsageError);
  EXPECT_THROW(evaluate_predictions({"a", "b"}, std::vector<int>{0}, std::vector<int>{0, 1}), ShapeError);
  EXPECT_THROW(evaluate_predictions({"a", "b"}, std::vector<int>{0}, std::vector<int>{2}), IndexError);
  const ConfusionMatrix empty({"a", "b"});
  EXPECT_EQ(empty.accuracy(), 0.0);
  EXPECT_EQ(empty.precision(0), 0.0);
}

TEST(Confusion, TextRenderingShowsCountsAndAccuracy) {
  const auto m = ConfusionMatrix::from_predictions({"null", "fist"}, std::vector<int>{0, 1, 1},
                                                   std::vector<int>{0, 1, 0});
  const auto text = m.render_text();
  EXPECT_NE(text.find("null"), std::string::npos);
  EXPECT_NE(text.find("accuracy 0.6667 (2/3)"), std::string::npos) << text;
}

TEST(FormatNumber, FixedDigits) {
  EXPECT_EQ(format_number(2.0 / 3.0), "0.666667");
  EXPECT_EQ(format_number(1.0, 2), "1.00");
}
