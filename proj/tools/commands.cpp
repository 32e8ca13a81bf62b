#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glovenet/ablation.hpp"
#include "glovenet/crossval.hpp"
#include "glovenet/dataset.hpp"
#include "glovenet/error.hpp"
#include "glovenet/metrics.hpp"

#ifndef GLOVENET_GIT_DESCRIBE
#define GLOVENET_GIT_DESCRIBE "unknown"
#endif

namespace glovenet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunManifest = "run_manifest.json";

using Clock = std::chrono::steady_clock;

// Collects artifacts as they are written and finishes with the manifest.
class Run {
 public:
  Run(std::string command, fs::path out, json flags)
      : command_(std::move(command)), out_(std::move(out)), flags_(std::move(flags)), start_(Clock::now()) {
    if (out_.empty()) throw UsageError(command_ + ": --out is required");
    // A stale manifest would claim completeness for a run that has not
    // finished yet.
    fs::create_directories(out_);
    fs::remove(out_ / kRunManifest);
  }

  const fs::path& dir() const { return out_; }

  void write(const std::string& name, const std::string& contents) {
    std::ofstream f(out_ / name, std::ios::binary);
    f << contents;
    if (!f) throw FormatError("cannot write " + (out_ / name).string());
    record(name);
  }

  void record(const std::string& name) { artifacts_.push_back(name); }

  void finish(const json& seeds, const std::string& data_hash) {
    const double seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    json manifest = {{"command", command_},
                     {"flags", flags_},
                     {"seeds", seeds},
                     {"dataset_hash", data_hash},
                     {"artifacts", artifacts_},
                     {"wall_clock_seconds", seconds},
                     {"git_describe", GLOVENET_GIT_DESCRIBE}};
    const fs::path tmp = out_ / (std::string(kRunManifest) + ".tmp");
    {
      std::ofstream f(tmp);
      f << manifest.dump(2) << '\n';
      if (!f) throw FormatError("cannot write " + tmp.string());
    }
    fs::rename(tmp, out_ / kRunManifest);
  }

 private:
  std::string command_;
  fs::path out_;
  json flags_;
  Clock::time_point start_;
  std::vector<std::string> artifacts_;
};

void require_dir(const fs::path& dir, const std::string& flag) {
  if (dir.empty()) throw UsageError(flag + " is required");
  if (!fs::is_directory(dir)) throw FormatError(flag + " " + dir.string() + " is not a directory");
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(static_cast<T>(std::stod(item, &used)));
      } else {
        if (!item.empty() && item[0] == '-') throw std::invalid_argument(item);
        out.push_back(static_cast<T>(std::stoull(item, &used)));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(flag + ": cannot parse '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

json model_flags_json(const ModelFlags& m, std::uint64_t seed) {
  return {{"model", m.model},   {"epochs", m.epochs}, {"batch", m.batch},   {"lr", m.lr},
          {"seed", seed},       {"d_model", m.d_model}, {"layers", m.layers}, {"heads", m.heads},
          {"d_ff", m.d_ff},     {"max_depth", m.max_depth}};
}

ModelOptions model_options(const ModelFlags& m) {
  ModelOptions o;
  o.kind = parse_model_kind(m.model);
  o.transformer.d_model = m.d_model;
  o.transformer.n_layers = m.layers;
  o.transformer.n_heads = m.heads;
  o.transformer.d_ff = m.d_ff;
  o.tree.max_depth = m.max_depth;
  if (o.kind == ModelKind::transformer) {
    ModelConfig probe = o.transformer;
    probe.window_length = probe.channels = probe.classes = 1;
    probe.validate();
  } else if (m.max_depth == 0) {
    throw UsageError("--max-depth must be positive");
  }
  return o;
}

TrainConfig train_config(const ModelFlags& m, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = m.epochs;
  cfg.batch_size = m.batch;
  cfg.learning_rate = m.lr;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void check_fraction(double f, const std::string& flag) {
  if (!(f > 0.0 && f < 1.0)) throw UsageError(flag + " must be in (0, 1), got " + format_number(f));
}

std::string metrics_csv(const Evaluation& e) {
  std::ostringstream out;
  const auto& m = e.confusion;
  out << "metric,value\n";
  out << "samples," << m.total() << '\n';
  out << "correct," << m.correct() << '\n';
  out << "accuracy," << format_number(e.accuracy) << '\n';
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    out << "precision[" << m.class_names()[c] << "]," << format_number(m.precision(c)) << '\n';
    out << "recall[" << m.class_names()[c] << "]," << format_number(m.recall(c)) << '\n';
  }
  return out.str();
}

json stats_json(const ChannelStats& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("no " + path.filename().string() + " in " + path.parent_path().string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("corrupt " + path.string() + ": " + e.what());
  }
}

void print_accuracy(const std::string& what, const Evaluation& e) {
  std::cout << what << " accuracy " << format_number(e.accuracy, 4) << " (" << e.confusion.correct() << '/'
            << e.confusion.total() << ")\n";
}

}  // namespace

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("GLOVENET_SEED");
  if (!env || !*env) return 0;
  return parse_list<std::uint64_t>(env, "GLOVENET_SEED").front();
}

std::string dataset_hash(const fs::path& dataset_dir) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char* name : {"manifest.json", "data.f32"}) {
    std::ifstream in(dataset_dir / name, std::ios::binary);
    if (!in) throw FormatError("no " + std::string(name) + " in " + dataset_dir.string());
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
      for (std::streamsize i = 0; i < in.gcount(); ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 1099511628211ull;
      }
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void cmd_generate(const GenerateFlags& flags) {
  const Vocabulary vocab = parse_vocabulary(flags.vocab);
  const std::uint64_t seed = resolve_seed(flags.seed);
  Run run("generate", flags.out,
          {{"vocab", flags.vocab}, {"n", flags.n}, {"len", flags.len}, {"seed", seed}, {"out", flags.out.string()}});
  const auto ds = generate_synthetic(vocab, flags.n, flags.len, seed);
  save_dataset(ds, run.dir());
  run.record("manifest.json");
  run.record("data.f32");
  std::cout << "wrote " << ds.size() << " samples (" << ds.num_classes() << " classes, T=" << ds.window_length
            << ", S=" << ds.channels << ") to " << run.dir().string() << '\n';
  run.finish({{"generator", seed}}, dataset_hash(run.dir()));
}

void cmd_inspect(const InspectFlags& flags) {
  require_dir(flags.data, "--data");
  const auto ds = load_dataset(flags.data);
  std::map<int, std::size_t> per_class;
  for (int y : ds.labels) ++per_class[y];
  const std::set<int> trials(ds.trial_ids.begin(), ds.trial_ids.end());
  const std::set<int> subjects(ds.subject_ids.begin(), ds.subject_ids.end());
  std::cout << "dataset   " << ds.name << '\n'
            << "hash      " << dataset_hash(flags.data) << '\n'
            << "samples   " << ds.size() << '\n'
            << "window    T=" << ds.window_length << " at " << format_number(ds.sample_rate_hz, 1) << " Hz\n"
            << "channels  S=" << ds.channels << '\n'
            << "trials    " << trials.size() << '\n'
            << "subjects  " << subjects.size() << '\n'
            << "sensors  ";
  for (const auto& s : ds.sensor_layout) std::cout << ' ' << s.name << '(' << s.channels << ')';
  std::cout << "\nclasses   " << ds.num_classes() << '\n';
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    std::cout << "  " << c << ' ' << ds.class_names[c] << ' ' << per_class[static_cast<int>(c)] << '\n';
  }
}

void cmd_train(const TrainFlags& flags) {
  const std::uint64_t seed = resolve_seed(flags.model.seed);
  const ModelOptions options = model_options(flags.model);
  const TrainConfig cfg = train_config(flags.model, seed);
  check_fraction(flags.test_fraction, "--test-fraction");
  require_dir(flags.data, "--data");

  json flag_json = model_flags_json(flags.model, seed);
  flag_json["data"] = flags.data.string();
  flag_json["out"] = flags.out.string();
  flag_json["test_fraction"] = flags.test_fraction;
  flag_json["split_seed"] = flags.split_seed;

  const auto ds = load_dataset(flags.data);
  const std::string hash = dataset_hash(flags.data);
  Run run("train", flags.out, flag_json);

  const Split split = holdout_split(ds.trial_ids, flags.test_fraction, flags.split_seed);
  const auto [scaled, stats] = standardize(ds, split.train);
  const auto train_set = scaled.subset(split.train);
  auto model = make_classifier(options, train_set, seed);
  const TrainLog log = model->fit(train_set, cfg);
  const Evaluation e = evaluate(*model, scaled.subset(split.test));

  model->save(run.dir());
  run.record("checkpoint.json");
  if (model->kind() == ModelKind::transformer) run.record("params.f32");
  run.write("standardization.json", stats_json(stats).dump(2) + "\n");
  run.write("split.json", json{{"dataset_hash", hash},
                               {"test_fraction", flags.test_fraction},
                               {"split_seed", flags.split_seed},
                               {"train", split.train},
                               {"test", split.test}}
                              .dump() +
                              "\n");
  run.write("train_log.csv", log.to_csv());
  run.write("metrics.csv", metrics_csv(e));
  run.write("confusion.csv", e.confusion.to_csv());
  run.write("confusion.txt", e.confusion.render_text());
  print_accuracy("test", e);
  run.finish({{"model", seed}, {"split", flags.split_seed}}, hash);
}

void cmd_eval(const EvalFlags& flags) {
  if (flags.split != "test" && flags.split != "train" && flags.split != "all") {
    throw UsageError("--split must be test, train or all, got '" + flags.split + "'");
  }
  require_dir(flags.data, "--data");
  require_dir(flags.ckpt, "--ckpt");
  json flag_json = {{"data", flags.data.string()},
                    {"ckpt", flags.ckpt.string()},
                    {"out", flags.out.string()},
                    {"split", flags.split}};

  const auto ds = load_dataset(flags.data);
  const std::string hash = dataset_hash(flags.data);
  const auto model = load_classifier(flags.ckpt);
  if (ds.window_length != model->window_length() || ds.channels != model->channels()) {
    throw ShapeError("checkpoint expects T=" + std::to_string(model->window_length()) +
                     ", S=" + std::to_string(model->channels()) + " but dataset has T=" +
                     std::to_string(ds.window_length) + ", S=" + std::to_string(ds.channels));
  }

  const json stats_j = read_json_file(flags.ckpt / "standardization.json");
  ChannelStats stats;
  try {
    stats.mean = stats_j.at("mean").get<std::vector<float>>();
    stats.stddev = stats_j.at("stddev").get<std::vector<float>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed standardization.json: ") + e.what());
  }

  std::vector<std::size_t> indices;
  if (flags.split == "all") {
    indices.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) indices[i] = i;
  } else {
    const json split = read_json_file(flags.ckpt / "split.json");
    if (split.value("dataset_hash", "") != hash) {
      throw ValidationError("checkpoint split was made for dataset " + split.value("dataset_hash", "?") +
                            " but --data hashes to " + hash + "; use --split all for other data");
    }
    try {
      indices = split.at(flags.split).get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed split.json: ") + e.what());
    }
  }

  Run run("eval", flags.out, flag_json);
  const auto scaled = apply_channel_stats(ds, stats);
  const Evaluation e = evaluate(*model, scaled.subset(indices));
  run.write("metrics.csv", metrics_csv(e));
  run.write("confusion.csv", e.confusion.to_csv());
  run.write("confusion.txt", e.confusion.render_text());
  print_accuracy(flags.split, e);
  run.finish(json::object(), hash);
}

void cmd_crossval(const CrossvalFlags& flags) {
  const std::uint64_t seed = resolve_seed(flags.model.seed);
  const ModelOptions options = model_options(flags.model);
  const TrainConfig cfg = train_config(flags.model, seed);
  if (flags.jobs == 0) throw UsageError("--jobs must be positive");
  require_dir(flags.data, "--data");
  json flag_json = model_flags_json(flags.model, seed);
  flag_json["data"] = flags.data.string();
  flag_json["out"] = flags.out.string();
  flag_json["jobs"] = flags.jobs;

  const auto ds = load_dataset(flags.data);
  const std::string hash = dataset_hash(flags.data);
  Run run("crossval", flags.out, flag_json);
  const auto folds = make_loto_folds(ds);
  CrossvalOptions cv;
  cv.jobs = flags.jobs;
  const auto result = crossval(
      [&](const GestureDataset& train_set) { return make_classifier(options, train_set, seed); }, ds, folds, cfg,
      cv);
  run.write("folds.csv", result.folds_csv());
  run.write("summary.csv", result.summary_csv());
  run.write("confusion.csv", result.pooled.to_csv());
  std::cout << result.folds.size() << " folds, mean accuracy " << format_number(result.mean_accuracy, 4) << " +- "
            << format_number(result.std_accuracy, 4) << '\n';
  run.finish({{"model", seed}}, hash);
}

void cmd_ablate(const AblateFlags& flags) {
  AblationConfig config;
  config.model = model_options(flags.model);
  const std::uint64_t base_seed = resolve_seed(flags.model.seed);
  config.train = train_config(flags.model, base_seed);
  config.k_values = parse_list<std::size_t>(flags.k, "--k");
  config.train_fractions = parse_list<double>(flags.fractions, "--fractions");
  if (flags.seeds == 0) throw UsageError("--seeds must be positive");
  config.seeds.clear();
  for (std::size_t s = 0; s < flags.seeds; ++s) config.seeds.push_back(base_seed + s);
  check_fraction(flags.test_fraction, "--test-fraction");
  config.test_fraction = flags.test_fraction;
  config.split_seed = flags.split_seed;
  if (flags.jobs == 0) throw UsageError("--jobs must be positive");
  config.jobs = flags.jobs;
  require_dir(flags.data, "--data");

  json flag_json = model_flags_json(flags.model, base_seed);
  flag_json["data"] = flags.data.string();
  flag_json["out"] = flags.out.string();
  flag_json["k"] = config.k_values;
  flag_json["fractions"] = config.train_fractions;
  flag_json["seeds"] = flags.seeds;
  flag_json["test_fraction"] = flags.test_fraction;
  flag_json["split_seed"] = flags.split_seed;
  flag_json["jobs"] = flags.jobs;
  flag_json["attribution"] = flags.attribution;

  const auto ds = load_dataset(flags.data);
  const std::string hash = dataset_hash(flags.data);
  Run run("ablate", flags.out, flag_json);
  const auto result = ablation_sweep(ds, config);
  run.write("ablation_rows.csv", result.rows_csv());
  run.write("ablation_summary.csv", result.aggregate_csv());
  run.write("ablation.svg", result.to_svg());
  for (const auto& a : result.aggregates) {
    std::cout << "k=" << a.k << " fraction=" << format_number(a.fraction, 2) << " mean "
              << format_number(a.mean, 4) << " [" << format_number(a.min, 4) << ", " << format_number(a.max, 4)
              << "]\n";
  }
  if (flags.attribution) {
    fs::create_directories(run.dir() / "attribution");
    for (const auto& a : finger_attribution(ds, config)) {
      run.write("attribution/" + a.sensor + ".csv", a.confusion.to_csv());
      run.write("attribution/" + a.sensor + ".txt", a.confusion.render_text());
    }
  }
  run.finish({{"cells", config.seeds}, {"split", flags.split_seed}}, hash);
}

void cmd_report(const ReportFlags& flags) {
  require_dir(flags.run, "--run");
  const fs::path path = flags.run / kRunManifest;
  if (!fs::exists(path)) {
    throw FormatError("no " + std::string(kRunManifest) + " in " + flags.run.string() +
                      "; the run is incomplete or this is not a run directory");
  }
  const json m = read_json_file(path);
  try {
    std::cout << "command   " << m.at("command").get<std::string>() << '\n'
              << "dataset   " << m.at("dataset_hash").get<std::string>() << '\n'
              << "version   " << m.at("git_describe").get<std::string>() << '\n'
              << "seconds   " << format_number(m.at("wall_clock_seconds").get<double>(), 2) << '\n'
              << "flags     " << m.at("flags").dump() << '\n'
              << "seeds     " << m.at("seeds").dump() << '\n';
    const std::set<std::string> shown{"metrics.csv", "summary.csv", "ablation_summary.csv", "confusion.txt"};
    for (const auto& a : m.at("artifacts")) {
      const std::string name = a.get<std::string>();
      std::cout << "artifact  " << name << '\n';
    }
    for (const auto& a : m.at("artifacts")) {
      const std::string name = a.get<std::string>();
      if (!shown.count(name)) continue;
      std::ifstream in(flags.run / name);
      std::cout << "\n== " << name << '\n' << in.rdbuf();
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed " + path.string() + ": " + e.what());
  }
}

}  // namespace glovenet::cli
