#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glovenet/classifier.hpp"
#include "glovenet/training.hpp"

namespace glovenet::cli {

// Flags shared by every command that builds and trains models.
struct ModelFlags {
  std::string model = "transformer";
  std::size_t epochs = 30;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::optional<std::uint64_t> seed;
  std::size_t d_model = 32;
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t d_ff = 64;
  std::size_t max_depth = 12;
};

struct GenerateFlags {
  std::string vocab = "single";
  std::size_t n = 1000;
  std::size_t len = 32;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};

struct InspectFlags {
  std::filesystem::path data;
};

struct TrainFlags {
  std::filesystem::path data;
  std::filesystem::path out;
  ModelFlags model;
  double test_fraction = 0.1;
  std::uint64_t split_seed = 0;
};

struct EvalFlags {
  std::filesystem::path data;
  std::filesystem::path ckpt;
  std::filesystem::path out;
  std::string split = "test";
};

struct CrossvalFlags {
  std::filesystem::path data;
  std::filesystem::path out;
  ModelFlags model;
  std::size_t jobs = 1;
};

struct AblateFlags {
  std::filesystem::path data;
  std::filesystem::path out;
  ModelFlags model;
  std::string k = "1,2,3,4,5";
  std::string fractions = "1.0";
  std::size_t seeds = 3;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::size_t jobs = 1;
  bool attribution = false;
};

struct ReportFlags {
  std::filesystem::path run;
};

// Each command validates its flags before touching any data and writes
// run_manifest.json into --out as its last action. Errors surface as
// glovenet exceptions; main() maps them to exit codes.
void cmd_generate(const GenerateFlags& flags);
void cmd_inspect(const InspectFlags& flags);
void cmd_train(const TrainFlags& flags);
void cmd_eval(const EvalFlags& flags);
void cmd_crossval(const CrossvalFlags& flags);
void cmd_ablate(const AblateFlags& flags);
void cmd_report(const ReportFlags& flags);

// FNV-1a 64 over manifest.json followed by data.f32, as 16 hex digits.
std::string dataset_hash(const std::filesystem::path& dataset_dir);

// --seed if given, else GLOVENET_SEED, else 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag);

}  // namespace glovenet::cli
