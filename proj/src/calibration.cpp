#include "suitfilter/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "suitfilter/errors.hpp"
#include "suitfilter/logistic.hpp"

namespace suitfilter {

namespace {

void check_binary_pair(const std::vector<double>& values,
                       const std::vector<int>& labels, const char* where) {
  if (values.empty()) {
    throw InvalidInput(std::string(where) + ": empty input");
  }
  if (values.size() != labels.size()) {
    throw InvalidInput(std::string(where) + ": " +
                       std::to_string(values.size()) + " values vs " +
                       std::to_string(labels.size()) + " labels");
  }
  for (int c : labels) {
    if (c != 0 && c != 1) {
      throw InvalidInput(std::string(where) + ": labels must be 0 or 1");
    }
  }
}

void require_both_classes(const std::vector<int>& labels, const char* where) {
  bool has0 = false, has1 = false;
  for (int c : labels) {
    if (c == 0) has0 = true;
    if (c == 1) has1 = true;
  }
  if (!has0 || !has1) {
    throw DegenerateStatistic(std::string(where) +
                              ": degenerate fit, single-class labels");
  }
}

/// Mean BCE of sigma(scale * score) over the sample; the temperature
/// objective with scale = 1/T.
double temperature_bce(const std::vector<double>& scores,
                       const std::vector<int>& labels, double scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double z = scale * scores[i];
    sum += labels[i] == 1 ? softplus(-z) : softplus(z);
  }
  return sum / static_cast<double>(scores.size());
}

}  // namespace

double Calibrator::apply_to_score(double score) const {
  switch (kind) {
    case Kind::kPlatt:
      return sigmoid(a * score + c);
    case Kind::kTemperature:
      return sigmoid(score / temperature);
    case Kind::kNone:
    default:
      return sigmoid(score);
  }
}

Calibrator Calibrator::none() { return Calibrator{}; }

Calibrator Calibrator::platt(double a, double c) {
  Calibrator cal;
  cal.kind = Kind::kPlatt;
  cal.a = a;
  cal.c = c;
  return cal;
}

Calibrator Calibrator::temp(double temperature) {
  if (!(temperature > 0.0)) {
    throw InvalidInput("Calibrator: temperature must be > 0");
  }
  Calibrator cal;
  cal.kind = Kind::kTemperature;
  cal.temperature = temperature;
  return cal;
}

std::string to_string(Calibrator::Kind kind) {
  switch (kind) {
    case Calibrator::Kind::kPlatt:
      return "platt";
    case Calibrator::Kind::kTemperature:
      return "temperature";
    case Calibrator::Kind::kNone:
    default:
      return "none";
  }
}

Calibrator::Kind calibrator_kind_from_string(const std::string& name) {
  if (name == "none") return Calibrator::Kind::kNone;
  if (name == "platt") return Calibrator::Kind::kPlatt;
  if (name == "temperature") return Calibrator::Kind::kTemperature;
  throw InvalidInput("unknown calibrator kind '" + name + "'");
}

Calibrator fit_platt(const std::vector<double>& scores,
                     const std::vector<int>& labels) {
  check_binary_pair(scores, labels, "fit_platt");
  require_both_classes(labels, "fit_platt");
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InvalidInput("fit_platt: non-finite score");
    }
  }
  SignalMatrix x(scores.size(), 1);
  for (std::size_t i = 0; i < scores.size(); ++i) x.at(i, 0) = scores[i];
  // The small L2 term keeps `a` finite when the scores are constant or
  // perfectly separating.
  FitResult fr = fit_logistic(x, labels, FitConfig{});
  return Calibrator::platt(fr.weights[0], fr.bias);
}

Calibrator fit_temperature(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  check_binary_pair(scores, labels, "fit_temperature");
  require_both_classes(labels, "fit_temperature");
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InvalidInput("fit_temperature: non-finite score");
    }
  }

  // Golden-section search over theta = ln T.  The BCE is convex in 1/T, and
  // theta -> 1/T = e^{-theta} is monotone, so the objective stays unimodal.
  const double golden = 0.6180339887498948482;
  double lo = std::log(1e-3);
  double hi = std::log(1e3);
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = temperature_bce(scores, labels, std::exp(-x1));
  double f2 = temperature_bce(scores, labels, std::exp(-x2));
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = temperature_bce(scores, labels, std::exp(-x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = temperature_bce(scores, labels, std::exp(-x2));
    }
  }
  return Calibrator::temp(std::exp(0.5 * (lo + hi)));
}

CalibrationReport calibration_report(const std::vector<double>& p_c,
                                     const std::vector<int>& correctness,
                                     std::size_t n_bins) {
  check_binary_pair(p_c, correctness, "calibration_report");
  if (n_bins < 1) {
    throw InvalidInput("calibration_report: need at least one bin");
  }
  for (double p : p_c) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
      throw InvalidInput("calibration_report: p_c values must lie in [0,1]");
    }
  }

  CalibrationReport rep;
  rep.bins.resize(n_bins);
  std::vector<double> sum_conf(n_bins, 0.0);
  std::vector<double> sum_acc(n_bins, 0.0);
  const double width = 1.0 / static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    rep.bins[b].lo = static_cast<double>(b) * width;
    rep.bins[b].hi = static_cast<double>(b + 1) * width;
  }

  for (std::size_t i = 0; i < p_c.size(); ++i) {
    std::size_t b = static_cast<std::size_t>(p_c[i] * n_bins);
    if (b >= n_bins) b = n_bins - 1;  // p_c == 1.0 lands in the last bin
    rep.bins[b].count += 1;
    sum_conf[b] += p_c[i];
    sum_acc[b] += correctness[i];
  }

  const double n = static_cast<double>(p_c.size());
  double sq_sum = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (rep.bins[b].count == 0) continue;
    const double cnt = static_cast<double>(rep.bins[b].count);
    rep.bins[b].mean_confidence = sum_conf[b] / cnt;
    rep.bins[b].empirical_accuracy = sum_acc[b] / cnt;
    const double gap =
        std::fabs(rep.bins[b].empirical_accuracy - rep.bins[b].mean_confidence);
    rep.ece += (cnt / n) * gap;
    rep.mce = std::max(rep.mce, gap);
    sq_sum += (cnt / n) * gap * gap;
  }
  rep.rmsce = std::sqrt(sq_sum);
  rep.delta = estimate_delta(p_c, correctness);
  return rep;
}

double estimate_delta(const std::vector<double>& p_c,
                      const std::vector<int>& correctness) {
  check_binary_pair(p_c, correctness, "estimate_delta");
  double sum = 0.0;
  for (std::size_t i = 0; i < p_c.size(); ++i) {
    sum += p_c[i] - correctness[i];
  }
  return sum / static_cast<double>(p_c.size());
}

double adjusted_margin(double m, double delta_test, double delta_u) {
  return m + delta_test - delta_u;
}

}  // namespace suitfilter
