#include "suitfilter/correctness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "suitfilter/digest.hpp"
#include "suitfilter/errors.hpp"
#include "suitfilter/signals.hpp"
#include "suitfilter/stats.hpp"

namespace suitfilter {

namespace {

std::vector<std::size_t> column_indices(
    const std::vector<std::string>& order) {
  std::vector<std::size_t> idx(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    idx[i] = signal_index(order[i]);
  }
  return idx;
}

/// Canonical row order: sort indices by row content, then label.  Full-batch
/// sums then accumulate in a data-determined order, which makes training
/// bit-identical under any permutation of the input rows.
std::vector<std::size_t> canonical_order(const SignalMatrix& signals,
                                         const std::vector<int>& labels) {
  std::vector<std::size_t> idx(signals.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = signals.row(a);
    const double* rb = signals.row(b);
    for (std::size_t c = 0; c < signals.cols(); ++c) {
      if (ra[c] < rb[c]) return true;
      if (ra[c] > rb[c]) return false;
    }
    return labels[a] < labels[b];
  });
  return idx;
}

}  // namespace

std::string CorrectnessEstimator::digest() const {
  Fnv1a h;
  for (const auto& name : signal_order) h.update(name);
  h.update(weights);
  h.update(bias);
  h.update(normalizer.mean);
  h.update(normalizer.std);
  h.update(to_string(calibrator.kind));
  h.update(calibrator.a);
  h.update(calibrator.c);
  h.update(calibrator.temperature);
  return h.hex();
}

int predicted_class(const LogitRecord& record) {
  const int k = static_cast<int>(record.logits.size());
  if (record.prediction) {
    if (*record.prediction < 0 || *record.prediction >= k) {
      throw InvalidInput("predicted_class: record '" + record.id +
                         "' has prediction " +
                         std::to_string(*record.prediction) +
                         " outside [0," + std::to_string(k) + ")");
    }
    return *record.prediction;
  }
  if (record.logits.empty()) {
    throw InvalidInput("predicted_class: record '" + record.id +
                       "' has no logits");
  }
  int best = 0;
  for (int i = 1; i < k; ++i) {
    // Strict > keeps the lowest index on ties.
    if (record.logits[static_cast<std::size_t>(i)] >
        record.logits[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  return best;
}

std::vector<int> correctness_labels(const std::vector<LogitRecord>& records) {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.label) {
      throw InvalidInput("correctness_labels: record '" + rec.id +
                         "' has no label");
    }
    const int k = static_cast<int>(rec.logits.size());
    if (*rec.label < 0 || *rec.label >= k) {
      throw InvalidInput("correctness_labels: record '" + rec.id +
                         "' has label " + std::to_string(*rec.label) +
                         " outside [0," + std::to_string(k) + ")");
    }
    out.push_back(predicted_class(rec) == *rec.label ? 1 : 0);
  }
  return out;
}

double bce_loss(const CorrectnessEstimator& estimator,
                const SignalMatrix& signals, const std::vector<int>& labels) {
  SignalMatrix std_signals = apply_normalizer(estimator.normalizer, signals);
  return bce_loss_at(estimator.weights, estimator.bias, std_signals, labels,
                     estimator.training_meta.lambda);
}

void bce_gradient(const CorrectnessEstimator& estimator,
                  const SignalMatrix& signals, const std::vector<int>& labels,
                  std::vector<double>& grad_w, double& grad_b) {
  SignalMatrix std_signals = apply_normalizer(estimator.normalizer, signals);
  bce_gradient_at(estimator.weights, estimator.bias, std_signals, labels,
                  estimator.training_meta.lambda, grad_w, grad_b);
}

CorrectnessEstimator train(const SignalMatrix& signals,
                           const std::vector<int>& labels,
                           const TrainConfig& config,
                           std::vector<std::string> signal_order) {
  if (signals.rows() == 0) {
    throw InvalidInput("train: empty signal matrix");
  }
  if (signals.rows() != labels.size()) {
    throw InvalidInput("train: " + std::to_string(signals.rows()) +
                       " rows vs " + std::to_string(labels.size()) +
                       " labels");
  }
  if (signal_order.empty()) {
    signal_order = signal_names();
  }
  if (signal_order.size() != signals.cols()) {
    throw InvalidInput("train: matrix has " + std::to_string(signals.cols()) +
                       " columns but signal_order names " +
                       std::to_string(signal_order.size()));
  }
  column_indices(signal_order);  // validates the names

  const auto order = canonical_order(signals, labels);
  SignalMatrix sorted(signals.rows(), signals.cols());
  std::vector<int> sorted_labels(labels.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double* src = signals.row(order[r]);
    std::copy(src, src + signals.cols(), sorted.row(r));
    sorted_labels[r] = labels[order[r]];
  }

  CorrectnessEstimator est;
  est.signal_order = std::move(signal_order);
  if (config.normalize) {
    est.normalizer = fit_normalizer(sorted, config.fitted_on);
  } else {
    est.normalizer.mean.assign(signals.cols(), 0.0);
    est.normalizer.std.assign(signals.cols(), 1.0);
    est.normalizer.fitted_on = "identity";
  }

  SignalMatrix std_signals = apply_normalizer(est.normalizer, sorted);
  FitConfig fit_cfg;
  fit_cfg.lambda = config.lambda;
  fit_cfg.max_iters = config.max_iters;
  fit_cfg.tolerance = config.tolerance;
  FitResult fr = fit_logistic(std_signals, sorted_labels, fit_cfg);

  est.weights = std::move(fr.weights);
  est.bias = fr.bias;
  est.training_meta.iterations = fr.iterations;
  est.training_meta.final_loss = fr.final_loss;
  est.training_meta.lambda = config.lambda;
  est.training_meta.converged = fr.converged;

  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) {
    est.training_meta.degenerate = "single-class";
  }
  return est;
}

std::vector<double> raw_scores(const CorrectnessEstimator& estimator,
                               const SignalMatrix& signals) {
  if (signals.cols() != estimator.weights.size()) {
    throw InvalidInput("predict: matrix has " +
                       std::to_string(signals.cols()) +
                       " columns, estimator expects " +
                       std::to_string(estimator.weights.size()));
  }
  SignalMatrix std_signals = apply_normalizer(estimator.normalizer, signals);
  std::vector<double> scores(std_signals.rows());
  for (std::size_t r = 0; r < std_signals.rows(); ++r) {
    const double* row = std_signals.row(r);
    double z = estimator.bias;
    for (std::size_t c = 0; c < std_signals.cols(); ++c) {
      z += estimator.weights[c] * row[c];
    }
    scores[r] = z;
  }
  return scores;
}

std::vector<double> predict_pc(const CorrectnessEstimator& estimator,
                               const SignalMatrix& signals) {
  std::vector<double> scores = raw_scores(estimator, signals);
  for (double& s : scores) s = estimator.calibrator.apply_to_score(s);
  return scores;
}

std::vector<double> predict_pc(const CorrectnessEstimator& estimator,
                               const std::vector<LogitRecord>& records) {
  SignalMatrix full = extract_matrix(records);
  SignalMatrix selected =
      select_columns(full, column_indices(estimator.signal_order));
  return predict_pc(estimator, selected);
}

AnovaResult anova_f(const std::vector<double>& signal_column,
                    const std::vector<int>& labels) {
  if (signal_column.size() != labels.size()) {
    throw InvalidInput("anova_f: " + std::to_string(signal_column.size()) +
                       " values vs " + std::to_string(labels.size()) +
                       " labels");
  }
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw InvalidInput("anova_f: labels must be 0 or 1");
    }
    sum[labels[i]] += signal_column[i];
    count[labels[i]] += 1;
  }
  if (count[0] == 0 || count[1] == 0) {
    throw DegenerateStatistic("anova_f: a group is empty");
  }
  const std::size_t n = signal_column.size();
  if (n < 3) {
    throw DegenerateStatistic("anova_f: need N >= 3 for a within-group df");
  }

  const double mean0 = sum[0] / static_cast<double>(count[0]);
  const double mean1 = sum[1] / static_cast<double>(count[1]);
  const double grand = (sum[0] + sum[1]) / static_cast<double>(n);

  double ss_within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = signal_column[i] - (labels[i] == 0 ? mean0 : mean1);
    ss_within += d * d;
  }
  if (ss_within <= 0.0) {
    throw DegenerateStatistic("anova_f: within-group variance is zero");
  }
  const double ss_between =
      static_cast<double>(count[0]) * (mean0 - grand) * (mean0 - grand) +
      static_cast<double>(count[1]) * (mean1 - grand) * (mean1 - grand);

  const double df_within = static_cast<double>(n - 2);
  AnovaResult r{};
  r.f = ss_between / (ss_within / df_within);  // between df = 1
  r.p = f_sf(r.f, 1.0, df_within);
  return r;
}

SignalMatrix select_columns(const SignalMatrix& matrix,
                            const std::vector<std::size_t>& indices) {
  for (std::size_t c : indices) {
    if (c >= matrix.cols()) {
      throw InvalidInput("select_columns: index " + std::to_string(c) +
                         " out of range");
    }
  }
  SignalMatrix out(matrix.rows(), indices.size());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t j = 0; j < indices.size(); ++j) {
      out.at(r, j) = matrix.at(r, indices[j]);
    }
  }
  return out;
}

}  // namespace suitfilter
