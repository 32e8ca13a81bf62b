#include "glovenet/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "glovenet/error.hpp"
#include "glovenet/parallel.hpp"

namespace glovenet {

std::vector<SensorMask> enumerate_sensor_subsets(std::size_t n_sensors, std::size_t k) {
  if (k < 1 || k > n_sensors) {
    throw UsageError("subset size " + std::to_string(k) + " outside [1, " + std::to_string(n_sensors) + "]");
  }
  std::vector<SensorMask> out;
  std::vector<std::size_t> current(k);
  for (std::size_t i = 0; i < k; ++i) current[i] = i;
  while (true) {
    out.push_back({current});
    std::size_t i = k;
    while (i > 0 && current[i - 1] == n_sensors - k + (i - 1)) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

namespace {

void validate_config(const GestureDataset& dataset, const AblationConfig& config) {
  if (config.k_values.empty() || config.train_fractions.empty() || config.seeds.empty()) {
    throw UsageError("ablation needs at least one k, one training fraction and one seed");
  }
  for (double f : config.train_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("training fraction " + std::to_string(f) + " outside (0, 1]");
  }
  for (std::size_t k : config.k_values) {
    if (k < 1 || k > dataset.sensor_layout.size()) {
      throw UsageError("k=" + std::to_string(k) + " outside [1, " + std::to_string(dataset.sensor_layout.size()) + "]");
    }
  }
  config.train.validate();
}

Evaluation run_cell(const GestureDataset& masked, std::span<const std::size_t> train_idx,
                    std::span<const std::size_t> test_idx, const AblationConfig& config, std::uint64_t seed) {
  const auto [scaled, stats] = standardize(masked, train_idx);
  const GestureDataset train_set = scaled.subset(train_idx);
  const GestureDataset test_set = scaled.subset(test_idx);
  TrainConfig cfg = config.train;
  cfg.seed = seed;
  auto model = make_classifier(config.model, train_set, seed);
  model->fit(train_set, cfg);
  return evaluate(*model, test_set);
}

}  // namespace

const AblationAggregate& AblationResult::aggregate(std::size_t k, double fraction) const {
  for (const auto& a : aggregates) {
    if (a.k == k && a.fraction == fraction) return a;
  }
  throw UsageError("no ablation cell for k=" + std::to_string(k) + ", fraction=" + std::to_string(fraction));
}

std::string AblationResult::rows_csv() const {
  std::ostringstream out;
  out << "subset,k,fraction,seed,n_train,accuracy\n";
  for (const auto& r : rows) {
    out << r.subset_label << ',' << r.k << ',' << format_number(r.fraction, 4) << ',' << r.seed << ',' << r.n_train
        << ',' << format_number(r.accuracy) << '\n';
  }
  return out.str();
}

std::string AblationResult::aggregate_csv() const {
  std::ostringstream out;
  out << "k,fraction,subsets,mean,min,max\n";
  for (const auto& a : aggregates) {
    out << a.k << ',' << format_number(a.fraction, 4) << ',' << a.subsets << ',' << format_number(a.mean) << ','
        << format_number(a.min) << ',' << format_number(a.max) << '\n';
  }
  return out.str();
}

std::string AblationResult::to_svg() const {
  constexpr double width = 640.0;
  constexpr double height = 420.0;
  constexpr double left = 70.0;
  constexpr double right = 150.0;
  constexpr double top = 30.0;
  constexpr double bottom = 60.0;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  std::size_t k_min = 1;
  std::size_t k_max = 1;
  double acc_min = 1.0;
  if (!aggregates.empty()) {
    k_min = k_max = aggregates.front().k;
    for (const auto& a : aggregates) {
      k_min = std::min(k_min, a.k);
      k_max = std::max(k_max, a.k);
      acc_min = std::min(acc_min, a.min);
    }
  }
  const double y_low = std::max(0.0, std::floor(acc_min * 10.0) / 10.0 - 0.05);
  const double k_span = k_max > k_min ? static_cast<double>(k_max - k_min) : 1.0;
  auto x_of = [&](std::size_t k) {
    return left + (static_cast<double>(k - k_min) / k_span) * (width - left - right);
  };
  auto y_of = [&](double acc) { return top + (1.0 - (acc - y_low) / (1.0 - y_low)) * (height - top - bottom); };

  std::vector<double> fractions;
  for (const auto& a : aggregates) {
    if (std::find(fractions.begin(), fractions.end(), a.fraction) == fractions.end()) fractions.push_back(a.fraction);
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (std::size_t k = k_min; k <= k_max; ++k) {
    svg << "<text x=\"" << x_of(k) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">" << k
        << "</text>\n";
  }
  for (int step = 0; step <= 4; ++step) {
    const double acc = y_low + (1.0 - y_low) * step / 4.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y_of(acc) + 4 << "\" text-anchor=\"end\">"
        << format_number(acc * 100.0, 1) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << y_of(acc) << "\" x2=\"" << width - right << "\" y2=\"" << y_of(acc)
        << "\" stroke=\"#dddddd\"/>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\">number of sensors</text>\n";
  svg << "<text x=\"18\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + height - bottom) / 2 << ")\">accuracy (%)</text>\n";

  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    std::vector<const AblationAggregate*> cells;
    for (const auto& a : aggregates) {
      if (a.fraction == fractions[fi]) cells.push_back(&a);
    }
    std::sort(cells.begin(), cells.end(), [](const auto* a, const auto* b) { return a->k < b->k; });
    const char* color = palette[fi % std::size(palette)];
    std::ostringstream band;
    for (const auto* c : cells) band << x_of(c->k) << ',' << y_of(c->max) << ' ';
    for (auto it = cells.rbegin(); it != cells.rend(); ++it) band << x_of((*it)->k) << ',' << y_of((*it)->min) << ' ';
    svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    std::ostringstream line;
    for (const auto* c : cells) line << x_of(c->k) << ',' << y_of(c->mean) << ' ';
    svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    for (const auto* c : cells) {
      svg << "<circle cx=\"" << x_of(c->k) << "\" cy=\"" << y_of(c->mean) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double legend_y = top + 10 + 18.0 * static_cast<double>(fi);
    svg << "<line x1=\"" << width - right + 15 << "\" y1=\"" << legend_y << "\" x2=\"" << width - right + 35
        << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - right + 40 << "\" y=\"" << legend_y + 4 << "\">train "
        << format_number(fractions[fi] * 100.0, 0) << "%</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

AblationResult ablation_sweep(const GestureDataset& dataset, const AblationConfig& config) {
  validate_config(dataset, config);
  const Split split = holdout_split(dataset.trial_ids, config.test_fraction, config.split_seed);

  struct Cell {
    SensorMask subset;
    std::size_t k;
    double fraction;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t k : config.k_values) {
    for (const auto& subset : enumerate_sensor_subsets(dataset.sensor_layout.size(), k)) {
      for (double fraction : config.train_fractions) {
        for (std::uint64_t seed : config.seeds) cells.push_back({subset, k, fraction, seed});
      }
    }
  }
  // Resolve every training subset up front so an empty one fails before
  // any model is trained.
  std::vector<std::vector<std::size_t>> train_sets;
  for (const Cell& cell : cells) {
    train_sets.push_back(subsample_trials(split.train, dataset.trial_ids, cell.fraction, cell.seed));
  }

  AblationResult result;
  result.test_indices = split.test;
  result.rows.resize(cells.size());
  parallel_for(cells.size(), config.jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    const GestureDataset masked = apply_sensor_mask(dataset, cell.subset);
    const Evaluation e = run_cell(masked, train_sets[i], split.test, config, cell.seed);
    result.rows[i] = {cell.subset, mask_label(cell.subset, dataset.sensor_layout), cell.k, cell.fraction, cell.seed,
                      train_sets[i].size(), e.accuracy};
  });

  for (std::size_t k : config.k_values) {
    for (double fraction : config.train_fractions) {
      std::map<std::string, std::pair<double, std::size_t>> per_subset;
      std::vector<std::string> order;
      for (const auto& row : result.rows) {
        if (row.k != k || row.fraction != fraction) continue;
        auto [it, inserted] = per_subset.try_emplace(row.subset_label, 0.0, 0);
        if (inserted) order.push_back(row.subset_label);
        it->second.first += row.accuracy;
        ++it->second.second;
      }
      AblationAggregate agg{k, fraction, order.size(), 0.0, 1.0, 0.0};
      for (const auto& label : order) {
        const auto& [total, count] = per_subset.at(label);
        const double acc = total / static_cast<double>(count);
        agg.mean += acc;
        agg.min = std::min(agg.min, acc);
        agg.max = std::max(agg.max, acc);
      }
      agg.mean /= static_cast<double>(order.size());
      result.aggregates.push_back(agg);
    }
  }
  return result;
}

std::vector<SensorAttribution> finger_attribution(const GestureDataset& dataset, const AblationConfig& config) {
  config.train.validate();
  const Split split = holdout_split(dataset.trial_ids, config.test_fraction, config.split_seed);
  const std::size_t sensors = dataset.sensor_layout.size();
  std::vector<SensorAttribution> out(sensors);
  const std::uint64_t seed = config.seeds.empty() ? 0 : config.seeds.front();
  parallel_for(sensors, config.jobs, [&](std::size_t s) {
    const GestureDataset masked = apply_sensor_mask(dataset, SensorMask{{s}});
    Evaluation e = run_cell(masked, split.train, split.test, config, seed);
    out[s] = {dataset.sensor_layout[s].name, std::move(e.confusion)};
  });
  return out;
}

}  // namespace glovenet
