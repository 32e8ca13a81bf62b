#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "glovenet/ablation.hpp"
#include "glovenet/classifier.hpp"
#include "glovenet/dataset.hpp"
#include "glovenet/error.hpp"
#include "glovenet/features.hpp"
#include "glovenet/metrics.hpp"

namespace py = pybind11;
using namespace glovenet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::array_t<float> samples_array(const GestureDataset& ds) {
  py::array_t<float> out({ds.size(), ds.window_length, ds.channels});
  std::copy(ds.samples.begin(), ds.samples.end(), out.mutable_data());
  return out;
}

GestureDataset dataset_from_arrays(const FloatArray& samples, std::vector<int> labels, std::vector<int> trial_ids,
                                   std::vector<std::string> class_names, std::vector<int> subject_ids,
                                   std::vector<std::pair<std::string, std::size_t>> sensors, std::string name) {
  if (samples.ndim() != 3) throw ShapeError("samples must be a [N, T, S] array");
  GestureDataset ds;
  ds.name = std::move(name);
  ds.window_length = static_cast<std::size_t>(samples.shape(1));
  ds.channels = static_cast<std::size_t>(samples.shape(2));
  ds.samples.assign(samples.data(), samples.data() + samples.size());
  ds.labels = std::move(labels);
  ds.trial_ids = std::move(trial_ids);
  ds.subject_ids = subject_ids.empty() ? std::vector<int>(ds.labels.size(), 0) : std::move(subject_ids);
  ds.class_names = std::move(class_names);
  for (auto& [sensor, width] : sensors) ds.sensor_layout.push_back({std::move(sensor), width});
  if (sensors.empty()) {
    ds.sensor_layout = default_sensor_layout();
    std::size_t width = 0;
    for (const auto& s : ds.sensor_layout) width += s.channels;
    if (width != ds.channels) ds.sensor_layout = {{"sensor", ds.channels}};
  }
  ds.validate();
  return ds;
}

ModelOptions model_options(const std::string& kind, std::size_t d_model, std::size_t n_layers, std::size_t n_heads,
                           std::size_t d_ff, std::size_t max_depth) {
  ModelOptions o;
  o.kind = parse_model_kind(kind);
  o.transformer.d_model = d_model;
  o.transformer.n_layers = n_layers;
  o.transformer.n_heads = n_heads;
  o.transformer.d_ff = d_ff;
  o.tree.max_depth = max_depth;
  return o;
}

py::array_t<std::size_t> confusion_array(const ConfusionMatrix& m) {
  const std::size_t c = m.num_classes();
  py::array_t<std::size_t> out({c, c});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) view(i, j) = m.count(i, j);
  }
  return out;
}

py::dict evaluation_dict(const Evaluation& e) {
  py::dict d;
  d["accuracy"] = e.accuracy;
  d["correct"] = e.confusion.correct();
  d["total"] = e.confusion.total();
  d["confusion"] = confusion_array(e.confusion);
  d["class_names"] = e.confusion.class_names();
  return d;
}

}  // namespace

PYBIND11_MODULE(_glovenet, m) {
  m.doc() = "Multi-IMU hand gesture classification";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ShapeError>(m, "ShapeError", error);
  py::register_exception<IndexError>(m, "IndexError", error);
  py::register_exception<UsageError>(m, "UsageError", error);
  py::register_exception<ContractError>(m, "ContractError", error);
  py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<ValidationError>(m, "ValidationError", error);
  py::register_exception<NumericError>(m, "NumericError", error);

  py::class_<GestureDataset>(m, "Dataset")
      .def(py::init(&dataset_from_arrays), py::arg("samples"), py::arg("labels"), py::arg("trial_ids"),
           py::arg("class_names"), py::arg("subject_ids") = std::vector<int>{},
           py::arg("sensors") = std::vector<std::pair<std::string, std::size_t>>{}, py::arg("name") = "")
      .def_readonly("name", &GestureDataset::name)
      .def_readonly("window_length", &GestureDataset::window_length)
      .def_readonly("channels", &GestureDataset::channels)
      .def_readonly("labels", &GestureDataset::labels)
      .def_readonly("trial_ids", &GestureDataset::trial_ids)
      .def_readonly("subject_ids", &GestureDataset::subject_ids)
      .def_readonly("class_names", &GestureDataset::class_names)
      .def_property_readonly("sensors",
                             [](const GestureDataset& ds) {
                               std::vector<std::string> names;
                               for (const auto& s : ds.sensor_layout) names.push_back(s.name);
                               return names;
                             })
      .def_property_readonly("samples", &samples_array)
      .def("__len__", &GestureDataset::size)
      .def("subset", [](const GestureDataset& ds, const std::vector<std::size_t>& idx) { return ds.subset(idx); })
      .def("__eq__", [](const GestureDataset& a, const GestureDataset& b) { return a == b; });

  m.def(
      "generate_synthetic",
      [](const std::string& vocab, std::size_t n, std::size_t length, std::uint64_t seed) {
        return generate_synthetic(parse_vocabulary(vocab), n, length, seed);
      },
      py::arg("vocab") = "single", py::arg("n") = 1000, py::arg("length") = 32, py::arg("seed") = 0);
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("dir"));
  m.def("load_dataset", &load_dataset, py::arg("dir"));

  m.def(
      "loto_folds",
      [](const std::vector<int>& trial_ids) {
        py::list out;
        for (const auto& f : make_loto_folds(trial_ids).folds) {
          py::dict d;
          d["held_out_trial"] = f.held_out_trial;
          d["train"] = f.train;
          d["test"] = f.test;
          out.append(d);
        }
        return out;
      },
      py::arg("trial_ids"));
  m.def(
      "holdout_split",
      [](const std::vector<int>& trial_ids, double test_fraction, std::uint64_t seed) {
        const auto s = holdout_split(trial_ids, test_fraction, seed);
        return py::make_tuple(s.train, s.test);
      },
      py::arg("trial_ids"), py::arg("test_fraction") = 0.1, py::arg("seed") = 0);
  m.def(
      "standardize",
      [](const GestureDataset& ds, const std::vector<std::size_t>& fit_indices) {
        auto [scaled, stats] = standardize(ds, fit_indices);
        return py::make_tuple(std::move(scaled), stats.mean, stats.stddev);
      },
      py::arg("dataset"), py::arg("fit_indices"));
  m.def(
      "window_count", &window_count, py::arg("length"), py::arg("window_length"), py::arg("stride"));
  m.def(
      "extract_features",
      [](const GestureDataset& ds) {
        const auto f = extract_feature_matrix(ds);
        py::array_t<float> out({f.rows, f.cols});
        std::copy(f.values.begin(), f.values.end(), out.mutable_data());
        return out;
      },
      py::arg("dataset"));

  py::class_<Classifier>(m, "Classifier")
      .def_property_readonly("kind", [](const Classifier& c) { return std::string(to_string(c.kind())); })
      .def_property_readonly("window_length", &Classifier::window_length)
      .def_property_readonly("channels", &Classifier::channels)
      .def_property_readonly("num_classes", &Classifier::num_classes)
      .def(
          "fit",
          [](Classifier& c, const GestureDataset& ds, std::size_t epochs, std::size_t batch_size, double lr,
             std::uint64_t seed) {
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.learning_rate = lr;
            cfg.seed = seed;
            cfg.validate();
            TrainLog log;
            {
              py::gil_scoped_release release;
              log = c.fit(ds, cfg);
            }
            py::list epochs_out;
            for (const auto& e : log.epochs) epochs_out.append(py::make_tuple(e.epoch, e.loss, e.accuracy));
            return epochs_out;
          },
          py::arg("dataset"), py::arg("epochs") = 30, py::arg("batch_size") = 32, py::arg("lr") = 1e-3,
          py::arg("seed") = 0, "Trains in place; returns (epoch, loss, accuracy) per epoch.")
      .def("predict", &Classifier::predict, py::arg("dataset"))
      .def("save", &Classifier::save, py::arg("dir"));

  m.def(
      "make_classifier",
      [](const std::string& kind, const GestureDataset& shape_source, std::uint64_t seed, std::size_t d_model,
         std::size_t n_layers, std::size_t n_heads, std::size_t d_ff, std::size_t max_depth) {
        return make_classifier(model_options(kind, d_model, n_layers, n_heads, d_ff, max_depth), shape_source, seed);
      },
      py::arg("kind"), py::arg("dataset"), py::arg("seed") = 0, py::arg("d_model") = 32, py::arg("n_layers") = 4,
      py::arg("n_heads") = 4, py::arg("d_ff") = 64, py::arg("max_depth") = 12);
  m.def("load_classifier", &load_classifier, py::arg("dir"));
  m.def(
      "evaluate", [](const Classifier& c, const GestureDataset& ds) { return evaluation_dict(evaluate(c, ds)); },
      py::arg("model"), py::arg("dataset"));

  m.def(
      "ablation_sweep",
      [](const GestureDataset& ds, const std::string& kind, std::vector<std::size_t> k_values,
         std::vector<double> fractions, std::vector<std::uint64_t> seeds, double test_fraction,
         std::uint64_t split_seed, std::size_t epochs, std::size_t jobs) {
        AblationConfig cfg;
        cfg.model = model_options(kind, 32, 4, 4, 64, 12);
        cfg.k_values = std::move(k_values);
        cfg.train_fractions = std::move(fractions);
        cfg.seeds = std::move(seeds);
        cfg.test_fraction = test_fraction;
        cfg.split_seed = split_seed;
        cfg.train.epochs = epochs;
        cfg.jobs = jobs;
        AblationResult r;
        {
          py::gil_scoped_release release;
          r = ablation_sweep(ds, cfg);
        }
        py::list rows, aggregates;
        for (const auto& row : r.rows) {
          rows.append(py::dict(py::arg("subset") = row.subset_label, py::arg("k") = row.k,
                               py::arg("fraction") = row.fraction, py::arg("seed") = row.seed,
                               py::arg("n_train") = row.n_train, py::arg("accuracy") = row.accuracy));
        }
        for (const auto& a : r.aggregates) {
          aggregates.append(py::dict(py::arg("k") = a.k, py::arg("fraction") = a.fraction,
                                     py::arg("subsets") = a.subsets, py::arg("mean") = a.mean,
                                     py::arg("min") = a.min, py::arg("max") = a.max));
        }
        return py::dict(py::arg("rows") = rows, py::arg("aggregates") = aggregates,
                        py::arg("test_indices") = r.test_indices);
      },
      py::arg("dataset"), py::arg("model") = "tree", py::arg("k_values") = std::vector<std::size_t>{1, 2, 3, 4, 5},
      py::arg("fractions") = std::vector<double>{1.0}, py::arg("seeds") = std::vector<std::uint64_t>{0},
      py::arg("test_fraction") = 0.2, py::arg("split_seed") = 0, py::arg("epochs") = 30, py::arg("jobs") = 1);
}
