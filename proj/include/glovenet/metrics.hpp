#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace glovenet {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> class_names);

  static ConfusionMatrix from_predictions(std::vector<std::string> class_names, std::span<const int> truth,
                                          std::span<const int> predicted);

  void add(int truth, int predicted);
  void merge(const ConfusionMatrix& other);

  std::size_t num_classes() const { return class_names_.size(); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t count(std::size_t truth, std::size_t predicted) const { return counts_[truth * num_classes() + predicted]; }
  std::size_t total() const;
  std::size_t correct() const;

  // trace / total; 0 for an empty matrix.
  double accuracy() const;
  // 0 when the class was never predicted / never present.
  double precision(std::size_t c) const;
  double recall(std::size_t c) const;

  std::string to_csv() const;
  std::string render_text() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> class_names_;
  std::vector<std::size_t> counts_;
};

struct Evaluation {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

// Throws UsageError on an empty set.
Evaluation evaluate_predictions(const std::vector<std::string>& class_names, std::span<const int> truth,
                                std::span<const int> predicted);

// Fixed-precision number formatting shared by every CSV writer.
std::string format_number(double value, int digits = 6);

}  // namespace glovenet
