#ifndef SUITFILTER_TYPES_HPP
#define SUITFILTER_TYPES_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "suitfilter/errors.hpp"

namespace suitfilter {

/// One classifier output: the raw logit vector for a single input, plus
/// whatever side information the source provides.  `label` is present only
/// for labeled splits; `prediction`, when present, overrides the argmax of
/// the logits (some serving stacks log a post-processed class choice).
struct LogitRecord {
  std::string id;
  std::vector<double> logits;
  std::optional<int> label;
  std::optional<int> prediction;
  std::string fold;  // empty when the source has no fold assignment
};

/// Dense row-major matrix of per-record signal values.  Rows are records,
/// columns are signals in a fixed order owned by the caller.
class SignalMatrix {
 public:
  SignalMatrix() = default;
  SignalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }

  const std::vector<double>& data() const { return data_; }

  /// Appends one row; the first row fixes the column count.
  void push_row(const std::vector<double>& values) {
    if (rows_ == 0 && cols_ == 0) {
      cols_ = values.size();
    } else if (values.size() != cols_) {
      throw InvalidInput("SignalMatrix::push_row: expected " +
                         std::to_string(cols_) + " columns, got " +
                         std::to_string(values.size()));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Per-column z-score parameters.  Columns with std below 1e-12 are stored
/// with std 1 so constant signals pass through centered but unscaled.
struct SignalNormalizer {
  std::vector<double> mean;
  std::vector<double> std;
  std::string fitted_on;  // provenance tag, e.g. a dataset name

  std::size_t dims() const { return mean.size(); }
};

}  // namespace suitfilter

#endif  // SUITFILTER_TYPES_HPP
