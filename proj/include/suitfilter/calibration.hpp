#ifndef SUITFILTER_CALIBRATION_HPP
#define SUITFILTER_CALIBRATION_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace suitfilter {

/// Monotone map from a pre-sigmoid score to a calibrated probability.
///   none:        sigma(score)
///   platt:       sigma(a*score + c)
///   temperature: sigma(score / T), T > 0
struct Calibrator {
  enum class Kind { kNone, kPlatt, kTemperature };

  Kind kind = Kind::kNone;
  double a = 1.0;  // platt scale
  double c = 0.0;  // platt shift
  double temperature = 1.0;

  /// Calibrated probability for one pre-sigmoid score; always in (0,1).
  double apply_to_score(double score) const;

  static Calibrator none();
  static Calibrator platt(double a, double c);
  static Calibrator temp(double temperature);
};

std::string to_string(Calibrator::Kind kind);
Calibrator::Kind calibrator_kind_from_string(const std::string& name);

/// One equal-width reliability bin over [0,1].
struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;  // mean p_c of members; 0 when empty
  double empirical_accuracy = 0.0;  // mean correctness of members; 0 when empty
};

/// Binned calibration-error summary plus the accuracy-estimation error delta.
struct CalibrationReport {
  double ece = 0.0;    // expected (count-weighted mean absolute gap)
  double mce = 0.0;    // maximum gap over non-empty bins
  double rmsce = 0.0;  // root of the count-weighted mean squared gap
  double delta = 0.0;  // mean(p_c) - mean(correctness)
  std::vector<CalibrationBin> bins;
};

/// Fits sigma(a*score + c) by regularized BCE on pre-sigmoid scores.
/// Requires both classes present.
Calibrator fit_platt(const std::vector<double>& scores,
                     const std::vector<int>& labels);

/// Fits sigma(score/T) by BCE minimized over log T with golden-section
/// search on [ln 1e-3, ln 1e3].  Requires both classes present; T > 0 always.
Calibrator fit_temperature(const std::vector<double>& scores,
                           const std::vector<int>& labels);

/// ECE/MCE/RMSCE over `n_bins` equal-width bins plus delta.  Inputs are
/// probabilities in [0,1] and binary correctness values of equal length >= 1.
CalibrationReport calibration_report(const std::vector<double>& p_c,
                                     const std::vector<int>& correctness,
                                     std::size_t n_bins = 10);

/// delta = mean(p_c) - mean(correctness); positive means accuracy is
/// overestimated.
double estimate_delta(const std::vector<double>& p_c,
                      const std::vector<int>& correctness);

/// m' = m + delta_test - delta_u.
double adjusted_margin(double m, double delta_test, double delta_u);

}  // namespace suitfilter

#endif  // SUITFILTER_CALIBRATION_HPP
