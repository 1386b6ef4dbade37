#ifndef SUITFILTER_PIPELINE_HPP
#define SUITFILTER_PIPELINE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "suitfilter/correctness.hpp"
#include "suitfilter/stats.hpp"
#include "suitfilter/types.hpp"

namespace suitfilter {

/// Multiple-testing regime for monitored decision streams.
enum class Correction { kNone, kBh, kPocock, kObrienFleming };

std::string to_string(Correction c);
Correction correction_from_string(const std::string& name);

/// Full audit record of one suitability decision.
struct SuitabilityReport {
  bool suitable = false;       // final (corrected) decision
  bool suitable_raw = false;   // welch.p_one_sided <= alpha, uncorrected
  double alpha = 0.0;
  double margin_requested = 0.0;
  double margin_used = 0.0;    // margin_requested + delta_test - delta_u
  WelchResult welch{};
  double mean_pc_test = 0.0;   // unadjusted means, for reporting
  double mean_pc_user = 0.0;
  std::string estimator_id;
  std::string timestamp;       // ISO-8601 UTC, informational only
  std::string config_digest;
  Correction correction = Correction::kNone;
  std::size_t stage = 0;       // 1-based batch number under monitor; 0 = decide
};

/// One-shot suitability decision: p_c on both splits, optional margin
/// adjustment, one-sided Welch test.  SUITABLE iff p <= alpha.  User labels,
/// if present, are never read.
SuitabilityReport decide(
    const CorrectnessEstimator& estimator,
    const std::vector<LogitRecord>& test_records,
    const std::vector<LogitRecord>& user_records, double margin, double alpha,
    std::optional<std::pair<double, double>> delta_adjustment = std::nullopt);

/// Harness-side ground truth: the user domain is suitable iff
/// acc_user >= acc_test - m.  Accuracies must lie in [0,1].
bool ground_truth_suitability(double acc_user, double acc_test, double m);

/// Sequential decision stream over user batches against a fixed estimator
/// and test split.  Test-set p_c is computed once per session (the estimator
/// and config are fixed for the session's lifetime).
///
/// Corrections: `none` passes raw decisions through; `bh` recomputes all
/// corrected decisions over the window after each batch; the alpha-spending
/// kinds compare batch k against the k-th schedule threshold and throw
/// ScheduleExhausted past the last stage.  Not thread-safe: one session has
/// one logical owner.
class MonitorSession {
 public:
  MonitorSession(CorrectnessEstimator estimator,
                 std::vector<LogitRecord> test_records, double margin,
                 double alpha, Correction correction = Correction::kNone,
                 std::size_t n_stages = 0);

  /// Decides one user batch; returns the report for this batch.  Under `bh`
  /// the corrected decisions of earlier reports may change as the window
  /// grows; reports() always reflects the current window.
  SuitabilityReport add_batch(const std::vector<LogitRecord>& user_batch);

  const std::vector<SuitabilityReport>& reports() const { return reports_; }

 private:
  CorrectnessEstimator estimator_;
  std::vector<LogitRecord> test_records_;
  std::vector<double> pc_test_;  // cached; keyed by the estimator digest
  std::string estimator_id_;
  double margin_;
  double alpha_;
  Correction correction_;
  AlphaSchedule schedule_;  // meaningful only for alpha-spending kinds
  std::vector<SuitabilityReport> reports_;
};

/// Convenience wrapper: run every batch through a fresh MonitorSession.
std::vector<SuitabilityReport> monitor(
    const CorrectnessEstimator& estimator,
    const std::vector<LogitRecord>& test_records,
    const std::vector<std::vector<LogitRecord>>& user_batches, double margin,
    double alpha, Correction correction = Correction::kNone,
    std::size_t n_stages = 0);

}  // namespace suitfilter

#endif  // SUITFILTER_PIPELINE_HPP
