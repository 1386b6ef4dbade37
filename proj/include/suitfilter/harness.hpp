#ifndef SUITFILTER_HARNESS_HPP
#define SUITFILTER_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "suitfilter/correctness.hpp"
#include "suitfilter/types.hpp"

namespace suitfilter {

/// Correct-class logit boost used by the synthetic generator.  Large enough
/// that a boosted sample wins unless the noise is extreme; the generator
/// solves for the boost probability that hits the accuracy target exactly.
inline constexpr double kSyntheticBoost = 10.0;

/// Desk-scale synthetic covariate-shift domain.
struct SyntheticShiftConfig {
  std::string name = "synth";
  std::size_t n_classes = 10;
  std::size_t n_samples = 1000;
  double accuracy = 0.7;     // target accuracy, in (1/k, 1]
  double noise_scale = 1.0;  // logit noise sigma, >= 0
  double temperature = 1.0;  // miscalibration distortion applied to logits
  std::uint64_t seed = 0;
};

/// One cell of the fold grid.
struct ExperimentRecord {
  std::string fold_user;
  std::string fold_test;
  std::string fold_sf;
  double acc_user = 0.0;   // ground truth, harness-only
  double acc_test = 0.0;
  bool ground_truth_suitable = false;
  double p_value = 1.0;
  bool decision = false;   // p_value <= alpha at the grid's alpha
  double delta_u = 0.0;
  double delta_test = 0.0;
  double accuracy_difference = 0.0;  // acc_user - acc_test
};

struct GridConfig {
  double margin = 0.0;
  double alpha = 0.05;
  TrainConfig train;
};

struct GridSummary {
  double accuracy = 0.0;  // decision agreement with ground truth
  double fpr = 0.0;       // SUITABLE among ground-truth-unsuitable
  std::optional<double> roc_auc;  // undefined for single-class ground truth
  std::optional<double> pr_auc;
};

struct SensitivityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double suitable_fraction = 0.0;
};

/// Probability that a boosted sample's correct class keeps the argmax when
/// every logit carries independent N(0, noise^2) noise; 1 when noise is 0.
double boosted_win_probability(double boost, double noise,
                               std::size_t n_classes);

/// Labeled records whose empirical accuracy matches config.accuracy in
/// expectation: labels uniform, correct-class boost applied with the solved
/// probability, Gaussian logit noise, then temperature distortion.  Fully
/// determined by the seed.  Throws ConfigError when the target accuracy is
/// unreachable at the configured noise level.
std::vector<LogitRecord> generate_synthetic_domain(
    const SyntheticShiftConfig& config);

/// Runs every ordered assignment of distinct folds to (user, test, sf):
/// trains on sf, decides on (test, user), and scores against ground truth.
/// Requires >= 3 non-empty labeled folds.
std::vector<ExperimentRecord> run_grid(
    const std::vector<std::pair<std::string, std::vector<LogitRecord>>>& folds,
    const GridConfig& config);

/// Decision accuracy and FPR at `alpha`, plus ROC/PR AUC ranking by
/// score = 1 - p_value with ground_truth_suitable as the positive class.
GridSummary summarize(const std::vector<ExperimentRecord>& records,
                      double alpha);

/// SUITABLE fraction per accuracy-difference bin of the given width;
/// empty bins are omitted.  Decisions are re-thresholded at `alpha`.
std::vector<SensitivityBin> sensitivity_bins(
    const std::vector<ExperimentRecord>& records, double alpha,
    double bin_width = 0.01);

/// Trapezoidal AUCs over all ranking thresholds; nullopt when only one class
/// is present.  Exposed for direct testing.
std::optional<double> roc_auc(const std::vector<double>& scores,
                              const std::vector<int>& labels);
std::optional<double> pr_auc(const std::vector<double>& scores,
                             const std::vector<int>& labels);

}  // namespace suitfilter

#endif  // SUITFILTER_HARNESS_HPP
