#ifndef SUITFILTER_CORRECTNESS_HPP
#define SUITFILTER_CORRECTNESS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "suitfilter/calibration.hpp"
#include "suitfilter/logistic.hpp"
#include "suitfilter/types.hpp"

namespace suitfilter {

/// Bookkeeping from the training run, persisted with the estimator.
struct TrainingMeta {
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double lambda = 0.0;
  bool converged = false;
  std::string degenerate;  // "single-class" when only one label was seen
};

/// The prediction-correctness estimator: p_c(x) = sigma(w' s~ + b) over
/// z-scored signals, optionally recalibrated.  Immutable once fitted.
struct CorrectnessEstimator {
  std::vector<std::string> signal_order;  // column names, canonical subset
  std::vector<double> weights;
  double bias = 0.0;
  SignalNormalizer normalizer;
  Calibrator calibrator;
  TrainingMeta training_meta;

  /// Stable content hash naming this estimator in reports.
  std::string digest() const;
};

/// Training knobs; defaults are the documented contract.
struct TrainConfig {
  double lambda = 1e-4;
  std::size_t max_iters = 10000;
  double tolerance = 1e-8;
  bool normalize = true;        // fit a z-score normalizer on the input
  std::string fitted_on = "sf";  // provenance tag for the normalizer
};

/// Class the model predicted for one record: the explicit `prediction` field
/// when present, else the argmax of the logits (lowest index wins ties).
int predicted_class(const LogitRecord& record);

/// Binary correctness labels: 1 iff the predicted class equals the record's
/// label.  Every record must carry a label.
std::vector<int> correctness_labels(const std::vector<LogitRecord>& records);

/// Loss/gradient of the estimator on (already extracted) raw signals; the
/// estimator's normalizer is applied internally, lambda comes from
/// training_meta.
double bce_loss(const CorrectnessEstimator& estimator,
                const SignalMatrix& signals, const std::vector<int>& labels);
void bce_gradient(const CorrectnessEstimator& estimator,
                  const SignalMatrix& signals, const std::vector<int>& labels,
                  std::vector<double>& grad_w, double& grad_b);

/// Fits the estimator on raw signals + correctness labels.  Deterministic:
/// rows are canonicalized internally, so any permutation of the training
/// data yields bit-identical parameters.  Single-class labels are permitted
/// but flagged in training_meta.degenerate.
CorrectnessEstimator train(const SignalMatrix& signals,
                           const std::vector<int>& labels,
                           const TrainConfig& config = {},
                           std::vector<std::string> signal_order = {});

/// p_c for each row of a raw signal matrix whose columns match
/// estimator.signal_order.
std::vector<double> predict_pc(const CorrectnessEstimator& estimator,
                               const SignalMatrix& signals);

/// p_c for each record; extracts the canonical signals and selects the
/// estimator's columns.
std::vector<double> predict_pc(const CorrectnessEstimator& estimator,
                               const std::vector<LogitRecord>& records);

/// Pre-sigmoid (and pre-calibration) score w' s~ + b per row.
std::vector<double> raw_scores(const CorrectnessEstimator& estimator,
                               const SignalMatrix& signals);

/// One-way ANOVA with two groups (correct vs incorrect) on one signal
/// column.  F = between-group MS / within-group MS with df (1, N-2); p from
/// the F survival function.
struct AnovaResult {
  double f;
  double p;
};
AnovaResult anova_f(const std::vector<double>& signal_column,
                    const std::vector<int>& labels);

/// Columns of `matrix` restricted to `indices`, in order.
SignalMatrix select_columns(const SignalMatrix& matrix,
                            const std::vector<std::size_t>& indices);

}  // namespace suitfilter

#endif  // SUITFILTER_CORRECTNESS_HPP
