#include "glovenet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "glovenet/error.hpp"

namespace glovenet {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : class_names_(std::move(class_names)), counts_(class_names_.size() * class_names_.size(), 0) {}

ConfusionMatrix ConfusionMatrix::from_predictions(std::vector<std::string> class_names, std::span<const int> truth,
                                                  std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw ShapeError(std::to_string(truth.size()) + " true labels but " + std::to_string(predicted.size()) +
                     " predictions");
  }
  ConfusionMatrix m(std::move(class_names));
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

void ConfusionMatrix::add(int truth, int predicted) {
  const auto c = static_cast<int>(num_classes());
  if (truth < 0 || truth >= c || predicted < 0 || predicted >= c) {
    throw IndexError("confusion entry (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                     ") outside a " + std::to_string(c) + "-class matrix");
  }
  ++counts_[static_cast<std::size_t>(truth) * num_classes() + static_cast<std::size_t>(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.class_names_ != class_names_) throw ShapeError("cannot merge confusion matrices over different classes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (std::size_t c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < num_classes(); ++c) t += count(c, c);
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t t = total();
  return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

double ConfusionMatrix::precision(std::size_t c) const {
  std::size_t column = 0;
  for (std::size_t r = 0; r < num_classes(); ++r) column += count(r, c);
  return column == 0 ? 0.0 : static_cast<double>(count(c, c)) / static_cast<double>(column);
}

double ConfusionMatrix::recall(std::size_t c) const {
  std::size_t row = 0;
  for (std::size_t p = 0; p < num_classes(); ++p) row += count(c, p);
  return row == 0 ? 0.0 : static_cast<double>(count(c, c)) / static_cast<double>(row);
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& name : class_names_) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < num_classes(); ++r) {
    out << class_names_[r];
    for (std::size_t p = 0; p < num_classes(); ++p) out << ',' << count(r, p);
    out << '\n';
  }
  return out.str();
}

std::string ConfusionMatrix::render_text() const {
  std::size_t label_width = 4;
  for (const auto& name : class_names_) label_width = std::max(label_width, name.size());
  std::size_t cell_width = 3;
  for (std::size_t r = 0; r < num_classes(); ++r) {
    cell_width = std::max(cell_width, std::min<std::size_t>(class_names_[r].size(), 6));
    for (std::size_t p = 0; p < num_classes(); ++p) cell_width = std::max(cell_width, std::to_string(count(r, p)).size());
  }
  auto pad_left = [](const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; };
  auto pad_right = [](const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); };

  std::ostringstream out;
  out << pad_right("true\\pred", label_width) << " |";
  for (const auto& name : class_names_) out << ' ' << pad_left(name.substr(0, cell_width), cell_width);
  out << '\n' << std::string(label_width, '-') << "-+" << std::string(num_classes() * (cell_width + 1), '-') << '\n';
  for (std::size_t r = 0; r < num_classes(); ++r) {
    out << pad_right(class_names_[r], label_width) << " |";
    for (std::size_t p = 0; p < num_classes(); ++p) out << ' ' << pad_left(std::to_string(count(r, p)), cell_width);
    out << '\n';
  }
  out << "accuracy " << format_number(accuracy(), 4) << " (" << correct() << '/' << total() << ")\n";
  return out.str();
}

Evaluation evaluate_predictions(const std::vector<std::string>& class_names, std::span<const int> truth,
                                std::span<const int> predicted) {
  if (truth.empty()) throw UsageError("cannot evaluate on an empty set");
  Evaluation e;
  e.confusion = ConfusionMatrix::from_predictions(class_names, truth, predicted);
  e.accuracy = e.confusion.accuracy();
  return e;
}

std::string format_number(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace glovenet
