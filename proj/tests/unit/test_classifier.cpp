#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "glovenet/classifier.hpp"
#include "glovenet/error.hpp"
#include "support/fixtures.hpp"

using namespace glovenet;
using glovenet::testing::TempDir;
using glovenet::testing::tiny_dataset;

namespace fs = std::filesystem;

namespace {

ModelOptions small_transformer() {
  ModelOptions o;
  o.kind = ModelKind::transformer;
  o.transformer.d_model = 8;
  o.transformer.n_layers = 1;
  o.transformer.n_heads = 2;
  o.transformer.d_ff = 16;
  return o;
}

TrainConfig quick() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  return cfg;
}

}  // namespace

TEST(ModelKind, ParsesKnownNames) {
  EXPECT_EQ(parse_model_kind("tree"), ModelKind::tree);
  EXPECT_EQ(parse_model_kind("transformer"), ModelKind::transformer);
  EXPECT_EQ(to_string(ModelKind::tree), "tree");
  EXPECT_THROW(parse_model_kind("forest"), UsageError);
}

TEST(Classifier, FactoryTakesShapeFromData) {
  const auto ds = tiny_dataset(2, 4, 8, 2);
  const auto model = make_classifier(small_transformer(), ds, 0);
  EXPECT_EQ(model->window_length(), 8u);
  EXPECT_EQ(model->channels(), 12u);
  EXPECT_EQ(model->num_classes(), 4u);
}

TEST(Classifier, TransformerCheckpointRoundTripIsBitExact) {
  TempDir dir;
  const auto ds = tiny_dataset(3, 3, 8, 1);
  auto model = make_classifier(small_transformer(), ds, 3);
  model->fit(ds, quick());
  model->save(dir.path());
  EXPECT_TRUE(fs::exists(dir / "checkpoint.json"));
  EXPECT_TRUE(fs::exists(dir / "params.f32"));

  const auto loaded = load_classifier(dir.path());
  ASSERT_EQ(loaded->kind(), ModelKind::transformer);
  const auto& a = dynamic_cast<const TransformerModel&>(*model).network();
  const auto& b = dynamic_cast<const TransformerModel&>(*loaded).network();
  EXPECT_EQ(a.config(), b.config());
  const auto pa = a.parameter_tensors(), pb = b.parameter_tensors();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ASSERT_EQ(std::memcmp(pa[i].data().data(), pb[i].data().data(), pa[i].numel() * sizeof(float)), 0) << i;
  }
  EXPECT_EQ(loaded->predict(ds), model->predict(ds));

  // Saving the loaded model reproduces the same files byte for byte.
  TempDir again;
  loaded->save(again.path());
  EXPECT_EQ(glovenet::testing::read_file(again / "params.f32"), glovenet::testing::read_file(dir / "params.f32"));
  EXPECT_EQ(glovenet::testing::read_file(again / "checkpoint.json"),
            glovenet::testing::read_file(dir / "checkpoint.json"));
}

TEST(Classifier, TreeCheckpointRoundTrip) {
  TempDir dir;
  const auto ds = tiny_dataset(3, 3, 8, 1);
  ModelOptions o;
  o.kind = ModelKind::tree;
  auto model = make_classifier(o, ds, 0);
  const auto log = model->fit(ds, quick());
  ASSERT_EQ(log.epochs.size(), 1u);
  EXPECT_DOUBLE_EQ(log.epochs[0].accuracy, 1.0);
  model->save(dir.path());
  EXPECT_FALSE(fs::exists(dir / "params.f32"));
  const auto loaded = load_classifier(dir.path());
  EXPECT_EQ(loaded->kind(), ModelKind::tree);
  EXPECT_EQ(loaded->predict(ds), model->predict(ds));
}

TEST(Classifier, ShapeMismatchNamesCheckpointShape) {
  const auto ds = tiny_dataset(2, 3, 8, 1);
  const auto model = make_classifier(small_transformer(), ds, 0);
  const auto wider = tiny_dataset(2, 3, 8, 2);
  try {
    model->predict(wider);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("checkpoint expects T=8, S=6"), std::string::npos) << e.what();
  }
  EXPECT_THROW(model->predict(tiny_dataset(2, 4, 8, 1)), ShapeError);
}

TEST(Classifier, CorruptCheckpointsAreFormatErrors) {
  const auto ds = tiny_dataset(2, 3, 8, 1);
  const auto model = make_classifier(small_transformer(), ds, 0);
  TempDir empty;
  EXPECT_THROW(load_classifier(empty.path()), FormatError);

  TempDir truncated;
  model->save(truncated.path());
  fs::resize_file(truncated / "params.f32", fs::file_size(truncated / "params.f32") - 4);
  try {
    load_classifier(truncated.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bytes, expected"), std::string::npos) << e.what();
  }

  TempDir garbled;
  model->save(garbled.path());
  glovenet::testing::write_file(garbled / "checkpoint.json", "{\"model\": \"transformer\", ");
  EXPECT_THROW(load_classifier(garbled.path()), FormatError);

  TempDir unknown;
  model->save(unknown.path());
  glovenet::testing::write_file(unknown / "checkpoint.json", R"({"model": "svm"})");
  EXPECT_THROW(load_classifier(unknown.path()), FormatError);

  TempDir renamed;
  model->save(renamed.path());
  auto j = nlohmann::json::parse(glovenet::testing::read_file(renamed / "checkpoint.json"));
  j["parameters"][0]["name"] = "bogus";
  glovenet::testing::write_file(renamed / "checkpoint.json", j.dump());
  EXPECT_THROW(load_classifier(renamed.path()), FormatError);
}

TEST(Evaluate, EmptyTestSetIsUsageError) {
  const auto ds = tiny_dataset(2, 3, 8, 1);
  ModelOptions o;
  o.kind = ModelKind::tree;
  auto model = make_classifier(o, ds, 0);
  model->fit(ds, quick());
  EXPECT_THROW(evaluate(*model, ds.subset({})), UsageError);
  const auto e = evaluate(*model, ds);
  EXPECT_DOUBLE_EQ(e.accuracy, 1.0);
  EXPECT_EQ(e.confusion.total(), ds.size());
}
