#include "glovenet/crossval.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "glovenet/error.hpp"
#include "glovenet/parallel.hpp"

namespace glovenet {

std::string CrossvalResult::folds_csv() const {
  std::ostringstream out;
  out << "fold,held_out_trial,n_train,n_test,accuracy\n";
  for (const auto& f : folds) {
    out << f.fold << ',' << f.held_out_trial << ',' << f.n_train << ',' << f.n_test << ','
        << format_number(f.accuracy) << '\n';
  }
  return out.str();
}

std::string CrossvalResult::summary_csv() const {
  std::ostringstream out;
  out << "folds,mean_accuracy,std_accuracy,pooled_accuracy\n";
  out << folds.size() << ',' << format_number(mean_accuracy) << ',' << format_number(std_accuracy) << ','
      << format_number(pooled_accuracy) << '\n';
  return out.str();
}

CrossvalResult crossval(const ClassifierFactory& factory, const GestureDataset& dataset, const FoldSpec& folds,
                        const TrainConfig& cfg, const CrossvalOptions& options) {
  cfg.validate();
  if (folds.folds.empty()) throw UsageError("cross-validation needs at least one fold");
  folds.validate(dataset.trial_ids);

  std::vector<std::size_t> everything(dataset.size());
  std::iota(everything.begin(), everything.end(), std::size_t{0});

  CrossvalResult result;
  result.folds.resize(folds.folds.size());
  parallel_for(folds.folds.size(), options.jobs, [&](std::size_t f) {
    const Fold& fold = folds.folds[f];
    if (fold.train.empty() || fold.test.empty()) {
      throw ContractError("fold " + std::to_string(f) + " has an empty train or test set");
    }
    const auto& fit_on = options.stats_scope == StatsScope::train_only ? fold.train : everything;
    const GestureDataset scaled = standardize(dataset, fit_on).first;
    const GestureDataset train_set = scaled.subset(fold.train);
    const GestureDataset test_set = scaled.subset(fold.test);
    auto model = factory(train_set);
    model->fit(train_set, cfg);
    Evaluation e = evaluate(*model, test_set);
    result.folds[f] = {f, fold.held_out_trial, fold.train.size(), fold.test.size(), e.accuracy, std::move(e.confusion)};
  });

  result.pooled = ConfusionMatrix(dataset.class_names);
  double total = 0.0;
  for (const auto& f : result.folds) {
    total += f.accuracy;
    result.pooled.merge(f.confusion);
  }
  const double n = static_cast<double>(result.folds.size());
  result.mean_accuracy = total / n;
  double sq = 0.0;
  for (const auto& f : result.folds) sq += (f.accuracy - result.mean_accuracy) * (f.accuracy - result.mean_accuracy);
  result.std_accuracy = result.folds.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  result.pooled_accuracy = result.pooled.accuracy();
  return result;
}

}  // namespace glovenet
