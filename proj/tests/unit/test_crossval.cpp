#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "glovenet/crossval.hpp"
#include "glovenet/error.hpp"
#include "support/fixtures.hpp"

using namespace glovenet;
using glovenet::testing::tiny_dataset;

namespace {

// Predicts 1 when a sample's standardized mean is positive. With no
// learned state its accuracy depends only on the standardization it sees.
class ThresholdProbe final : public Classifier {
 public:
  explicit ThresholdProbe(const GestureDataset& shape)
      : window_length_(shape.window_length), channels_(shape.channels), classes_(shape.num_classes()) {}

  ModelKind kind() const override { return ModelKind::tree; }
  std::size_t window_length() const override { return window_length_; }
  std::size_t channels() const override { return channels_; }
  std::size_t num_classes() const override { return classes_; }
  TrainLog fit(const GestureDataset&, const TrainConfig&) override { return {}; }
  std::vector<int> predict(const GestureDataset& dataset) const override {
    std::vector<int> out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto s = dataset.sample(i);
      out.push_back(std::accumulate(s.begin(), s.end(), 0.0) > 0.0 ? 1 : 0);
    }
    return out;
  }
  void save(const std::filesystem::path&) const override {}

 private:
  std::size_t window_length_, channels_, classes_;
};

// One channel, constant within each sample.
GestureDataset constant_samples(const std::vector<std::pair<float, int>>& values, const std::vector<int>& trials) {
  GestureDataset ds;
  ds.window_length = 2;
  ds.channels = 1;
  ds.class_names = {"null", "on"};
  for (std::size_t i = 0; i < values.size(); ++i) {
    ds.samples.push_back(values[i].first);
    ds.samples.push_back(values[i].first);
    ds.labels.push_back(values[i].second);
    ds.trial_ids.push_back(trials[i]);
    ds.subject_ids.push_back(0);
  }
  return ds;
}

ClassifierFactory tree_factory() {
  return [](const GestureDataset& train_set) {
    ModelOptions o;
    o.kind = ModelKind::tree;
    return make_classifier(o, train_set, 0);
  };
}

}  // namespace

TEST(Crossval, ThreeFoldsSummarizeByArithmeticMean) {
  const auto ds = tiny_dataset(3, 3, 4, 1, 7);
  const auto folds = make_loto_folds(ds);
  const auto r = crossval(tree_factory(), ds, folds, TrainConfig{});
  ASSERT_EQ(r.folds.size(), 3u);
  double sum = 0;
  std::size_t correct = 0, total = 0;
  for (const auto& f : r.folds) {
    sum += f.accuracy;
    correct += f.confusion.correct();
    total += f.confusion.total();
    EXPECT_EQ(f.n_test, 3u);
    EXPECT_EQ(f.n_train, 6u);
  }
  EXPECT_DOUBLE_EQ(r.mean_accuracy, sum / 3.0);
  EXPECT_DOUBLE_EQ(r.pooled_accuracy, static_cast<double>(correct) / static_cast<double>(total));
  double sq = 0;
  for (const auto& f : r.folds) sq += (f.accuracy - r.mean_accuracy) * (f.accuracy - r.mean_accuracy);
  EXPECT_NEAR(r.std_accuracy, std::sqrt(sq / 2.0), 1e-15);
  EXPECT_EQ(r.folds[1].held_out_trial, 1);
}

TEST(Crossval, CsvOutputs) {
  CrossvalResult r;
  r.folds.push_back({0, 4, 10, 2, 0.5, ConfusionMatrix({"a"})});
  r.mean_accuracy = 0.5;
  r.pooled_accuracy = 0.5;
  EXPECT_EQ(r.folds_csv(), "fold,held_out_trial,n_train,n_test,accuracy\n0,4,10,2,0.500000\n");
  EXPECT_EQ(r.summary_csv(), "folds,mean_accuracy,std_accuracy,pooled_accuracy\n1,0.500000,0.000000,0.500000\n");
}

TEST(Crossval, StandardizationIsRefitPerFold) {
  // Trials 0 and 1 put the decision point at 0.5; trial 2 sits far above
  // it. Statistics that include trial 2 drag the mean past its low samples.
  const auto ds = constant_samples({{0, 0}, {1, 1}, {0, 0}, {1, 1}, {3, 1}, {3, 1}, {3, 1}, {30, 1}},
                                   {0, 0, 1, 1, 2, 2, 2, 2});
  const auto folds = make_loto_folds(ds);
  ClassifierFactory probe = [](const GestureDataset& t) { return std::make_unique<ThresholdProbe>(t); };

  const auto clean = crossval(probe, ds, folds, TrainConfig{});
  CrossvalOptions leaky_options;
  leaky_options.stats_scope = StatsScope::all_samples;
  const auto leaky = crossval(probe, ds, folds, TrainConfig{}, leaky_options);
  ASSERT_EQ(clean.folds[2].held_out_trial, 2);
  EXPECT_DOUBLE_EQ(clean.folds[2].accuracy, 1.0);
  EXPECT_DOUBLE_EQ(leaky.folds[2].accuracy, 0.25);
}

TEST(Crossval, FoldOrderAndThreadCountDoNotMatter) {
  const auto ds = generate_synthetic(Vocabulary::single, 72, 16, 2);
  auto folds = make_loto_folds(ds);
  const auto forward = crossval(tree_factory(), ds, folds, TrainConfig{});
  std::reverse(folds.folds.begin(), folds.folds.end());
  CrossvalOptions two;
  two.jobs = 2;
  const auto backward = crossval(tree_factory(), ds, folds, TrainConfig{}, two);
  ASSERT_EQ(forward.folds.size(), backward.folds.size());
  const std::size_t n = forward.folds.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = forward.folds[i];
    const auto& b = backward.folds[n - 1 - i];
    EXPECT_EQ(a.held_out_trial, b.held_out_trial);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_EQ(a.confusion, b.confusion);
  }
  EXPECT_EQ(forward.pooled, backward.pooled);
  EXPECT_DOUBLE_EQ(forward.mean_accuracy, backward.mean_accuracy);
}

TEST(Crossval, RejectsBrokenFolds) {
  const auto ds = tiny_dataset(2, 2, 4, 1);
  EXPECT_THROW(crossval(tree_factory(), ds, FoldSpec{}, TrainConfig{}), UsageError);
  FoldSpec split_trial{{Fold{0, {1, 2, 3}, {0}}, Fold{1, {0, 1}, {2, 3}}}};
  EXPECT_THROW(crossval(tree_factory(), ds, split_trial, TrainConfig{}), ContractError);
}
