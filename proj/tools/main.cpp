#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "glovenet/error.hpp"

namespace {

using namespace glovenet::cli;

void add_model_flags(CLI::App* cmd, ModelFlags& m, const std::string& default_model) {
  m.model = default_model;
  cmd->add_option("--model", m.model, "transformer or tree")->capture_default_str();
  cmd->add_option("--epochs", m.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--batch", m.batch, "mini-batch size")->capture_default_str();
  cmd->add_option("--lr", m.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--seed", m.seed, "model and shuffle seed (default: $GLOVENET_SEED or 0)");
  cmd->add_option("--d-model", m.d_model, "transformer width")->capture_default_str();
  cmd->add_option("--layers", m.layers, "encoder layers")->capture_default_str();
  cmd->add_option("--heads", m.heads, "attention heads")->capture_default_str();
  cmd->add_option("--d-ff", m.d_ff, "feed-forward width")->capture_default_str();
  cmd->add_option("--max-depth", m.max_depth, "decision tree depth limit")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glovenet: multi-IMU hand gesture classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GLOVENET_GIT_DESCRIBE);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic gesture dataset");
  generate->add_option("--vocab", gen.vocab, "single or multi")->capture_default_str();
  generate->add_option("--n", gen.n, "number of samples")->capture_default_str();
  generate->add_option("--len", gen.len, "window length T")->capture_default_str();
  generate->add_option("--seed", gen.seed, "generator seed (default: $GLOVENET_SEED or 0)");
  generate->add_option("--out", gen.out, "output directory")->required();
  generate->callback([&] { cmd_generate(gen); });

  InspectFlags insp;
  auto* inspect = app.add_subcommand("inspect", "summarize a dataset directory");
  inspect->add_option("--data", insp.data, "dataset directory")->required();
  inspect->callback([&] { cmd_inspect(insp); });

  TrainFlags tr;
  auto* train = app.add_subcommand("train", "train on a trial-level holdout split");
  train->add_option("--data", tr.data, "dataset directory")->required();
  train->add_option("--out", tr.out, "checkpoint directory")->required();
  add_model_flags(train, tr.model, "transformer");
  train->add_option("--test-fraction", tr.test_fraction, "fraction of trials held out")->capture_default_str();
  train->add_option("--split-seed", tr.split_seed, "holdout split seed")->capture_default_str();
  train->callback([&] { cmd_train(tr); });

  EvalFlags ev;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--data", ev.data, "dataset directory")->required();
  eval->add_option("--ckpt", ev.ckpt, "directory written by train")->required();
  eval->add_option("--out", ev.out, "output directory")->required();
  eval->add_option("--split", ev.split, "test, train or all")->capture_default_str();
  eval->callback([&] { cmd_eval(ev); });

  CrossvalFlags cv;
  auto* crossval = app.add_subcommand("crossval", "leave-one-trial-out cross-validation");
  crossval->add_option("--data", cv.data, "dataset directory")->required();
  crossval->add_option("--out", cv.out, "output directory")->required();
  add_model_flags(crossval, cv.model, "transformer");
  crossval->add_option("--jobs", cv.jobs, "folds trained in parallel")->capture_default_str();
  crossval->callback([&] { cmd_crossval(cv); });

  AblateFlags ab;
  auto* ablate = app.add_subcommand("ablate", "sensor-count and training-size ablation");
  ablate->add_option("--data", ab.data, "dataset directory")->required();
  ablate->add_option("--out", ab.out, "output directory")->required();
  add_model_flags(ablate, ab.model, "tree");
  ablate->add_option("--k", ab.k, "comma-separated sensor counts")->capture_default_str();
  ablate->add_option("--fractions", ab.fractions, "comma-separated training fractions")->capture_default_str();
  ablate->add_option("--seeds", ab.seeds, "seeds per cell, counting up from --seed")->capture_default_str();
  ablate->add_option("--test-fraction", ab.test_fraction, "fraction of trials held out")->capture_default_str();
  ablate->add_option("--split-seed", ab.split_seed, "holdout split seed")->capture_default_str();
  ablate->add_option("--jobs", ab.jobs, "cells trained in parallel")->capture_default_str();
  ablate->add_flag("--attribution", ab.attribution, "also train one single-sensor model per finger");
  ablate->callback([&] { cmd_ablate(ab); });

  ReportFlags rep;
  auto* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("--run", rep.run, "directory holding run_manifest.json")->required();
  report->callback([&] { cmd_report(rep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version land here too, with exit code 0.
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const glovenet::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const glovenet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
