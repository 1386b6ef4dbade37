#include "suitfilter/signals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "suitfilter/errors.hpp"

namespace suitfilter {

namespace {

void check_logits(const LogitRecord& record) {
  if (record.logits.size() < 2) {
    throw InvalidInput("extract_signals: record '" + record.id +
                       "' has fewer than 2 logits");
  }
  for (double z : record.logits) {
    if (!std::isfinite(z)) {
      throw InvalidInput("extract_signals: record '" + record.id +
                         "' contains a non-finite logit");
    }
  }
}

/// Mean and population standard deviation (divide by n) in two passes.
void mean_and_pop_std(const std::vector<double>& v, double& mean,
                      double& std_out) {
  double sum = 0.0;
  for (double x : v) sum += x;
  mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    double d = x - mean;
    ss += d * d;
  }
  std_out = std::sqrt(ss / static_cast<double>(v.size()));
}

/// Largest and second-largest value (by value, not index; ties give equal
/// first and second).
void top2(const std::vector<double>& v, double& first, double& second) {
  first = -std::numeric_limits<double>::infinity();
  second = first;
  for (double x : v) {
    if (x > first) {
      second = first;
      first = x;
    } else if (x > second) {
      second = x;
    }
  }
}

}  // namespace

const std::vector<std::string>& signal_names() {
  static const std::vector<std::string> names = {
      "conf_max",   "conf_std",  "conf_entropy",    "conf_ratio",
      "top_k_conf_sum", "logit_mean", "logit_max",  "logit_std",
      "logit_diff_top2", "loss",      "margin_loss", "energy"};
  return names;
}

std::size_t signal_index(const std::string& name) {
  const auto& names = signal_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw InvalidInput("signal_index: unknown signal name '" + name + "'");
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.size() < 2) {
    throw InvalidInput("softmax: need at least 2 logits");
  }
  double zmax = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) {
      throw InvalidInput("softmax: non-finite logit");
    }
    zmax = std::max(zmax, z);
  }
  std::vector<double> p(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    denom += p[i];
  }
  for (double& x : p) x /= denom;
  return p;
}

SignalVector extract_signals(const LogitRecord& record) {
  check_logits(record);
  const std::vector<double>& z = record.logits;
  const std::size_t k = z.size();
  const double eps = kSignalEpsilon;

  std::vector<double> p = softmax(z);

  SignalVector s{};

  double p1 = 0.0, p2 = 0.0;
  top2(p, p1, p2);
  s.conf_max = p1;

  double p_mean = 0.0;
  mean_and_pop_std(p, p_mean, s.conf_std);

  double entropy = 0.0;
  for (double pi : p) entropy -= pi * std::log(pi + eps);
  s.conf_entropy = entropy;

  s.conf_ratio = p1 / (p2 + eps);

  std::size_t top_k = static_cast<std::size_t>(
      std::ceil(0.1 * static_cast<double>(k)));
  if (top_k < 1) top_k = 1;
  std::vector<double> largest(top_k);
  std::partial_sort_copy(p.begin(), p.end(), largest.begin(), largest.end(),
                         std::greater<double>());
  double top_sum = 0.0;
  for (double v : largest) top_sum += v;
  s.top_k_conf_sum = top_sum;

  double z1 = 0.0, z2 = 0.0;
  top2(z, z1, z2);
  mean_and_pop_std(z, s.logit_mean, s.logit_std);
  s.logit_max = z1;
  s.logit_diff_top2 = z1 - z2;

  s.loss = -std::log(p1 + eps);
  s.margin_loss = std::log(p2 + eps) - std::log(p1 + eps);

  // energy = -logsumexp(z), with the max pulled out for stability.
  double sum_exp = 0.0;
  for (double zi : z) sum_exp += std::exp(zi - z1);
  s.energy = -(z1 + std::log(sum_exp));

  return s;
}

SignalMatrix extract_matrix(const std::vector<LogitRecord>& records) {
  if (records.empty()) {
    throw InvalidInput("extract_matrix: empty record list");
  }
  const std::size_t k = records.front().logits.size();
  SignalMatrix m(records.size(), kNumSignals);
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].logits.size() != k) {
      throw InvalidInput("extract_matrix: record '" + records[r].id +
                         "' has " + std::to_string(records[r].logits.size()) +
                         " logits, expected " + std::to_string(k));
    }
    auto arr = extract_signals(records[r]).to_array();
    for (std::size_t c = 0; c < kNumSignals; ++c) m.at(r, c) = arr[c];
  }
  return m;
}

SignalNormalizer fit_normalizer(const SignalMatrix& matrix,
                                const std::string& fitted_on) {
  if (matrix.rows() == 0) {
    throw InvalidInput("fit_normalizer: empty matrix");
  }
  SignalNormalizer n;
  n.fitted_on = fitted_on;
  n.mean.resize(matrix.cols());
  n.std.resize(matrix.cols());
  const double rows = static_cast<double>(matrix.rows());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < matrix.rows(); ++r) sum += matrix.at(r, c);
    double mean = sum / rows;
    double ss = 0.0;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      double d = matrix.at(r, c) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / rows);
    n.mean[c] = mean;
    n.std[c] = sd < 1e-12 ? 1.0 : sd;
  }
  return n;
}

SignalMatrix apply_normalizer(const SignalNormalizer& normalizer,
                              const SignalMatrix& matrix) {
  if (matrix.cols() != normalizer.dims()) {
    throw InvalidInput("apply_normalizer: matrix has " +
                       std::to_string(matrix.cols()) +
                       " columns, normalizer expects " +
                       std::to_string(normalizer.dims()));
  }
  SignalMatrix out(matrix.rows(), matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      out.at(r, c) = (matrix.at(r, c) - normalizer.mean[c]) / normalizer.std[c];
    }
  }
  return out;
}

}  // namespace suitfilter
