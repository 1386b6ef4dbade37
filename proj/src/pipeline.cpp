#include "suitfilter/pipeline.hpp"

#include <cmath>
#include <ctime>
#include <numeric>

#include "suitfilter/digest.hpp"
#include "suitfilter/errors.hpp"

namespace suitfilter {

namespace {

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

void check_decide_inputs(const std::vector<LogitRecord>& test_records,
                         const std::vector<LogitRecord>& user_records,
                         double margin, double alpha) {
  if (test_records.size() < 2 || user_records.size() < 2) {
    throw InvalidInput("decide: test and user sets each need n >= 2 (got " +
                       std::to_string(test_records.size()) + " and " +
                       std::to_string(user_records.size()) + ")");
  }
  if (!std::isfinite(margin)) {
    throw InvalidInput("decide: margin must be finite");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidInput("decide: alpha must be in (0,1)");
  }
}

std::string decide_config_digest(double margin, double alpha,
                                 double margin_used, Correction correction,
                                 std::size_t n_stages) {
  Fnv1a h;
  h.update(margin);
  h.update(alpha);
  h.update(margin_used);
  h.update(to_string(correction));
  h.update(static_cast<std::uint64_t>(n_stages));
  return h.hex();
}

/// Shared decision core; the caller supplies precomputed test-side p_c when
/// it holds a cache (monitoring), or empty to compute here.
SuitabilityReport decide_on_pc(const std::vector<double>& pc_test,
                               const std::vector<double>& pc_user,
                               double margin, double alpha,
                               double margin_used,
                               const std::string& estimator_id,
                               Correction correction, std::size_t n_stages,
                               std::size_t stage) {
  SuitabilityReport rep;
  rep.alpha = alpha;
  rep.margin_requested = margin;
  rep.margin_used = margin_used;
  rep.estimator_id = estimator_id;
  rep.correction = correction;
  rep.stage = stage;
  rep.timestamp = utc_timestamp();
  rep.config_digest =
      decide_config_digest(margin, alpha, margin_used, correction, n_stages);

  try {
    rep.welch = welch_noninferiority(pc_test, pc_user, margin_used);
  } catch (const DegenerateStatistic& e) {
    throw DegenerateStatistic(std::string("decide: ") + e.what());
  }
  rep.mean_pc_test = rep.welch.mean_test;
  rep.mean_pc_user = mean_of(pc_user);
  rep.suitable_raw = rep.welch.p_one_sided <= alpha;
  rep.suitable = rep.suitable_raw;
  return rep;
}

}  // namespace

std::string to_string(Correction c) {
  switch (c) {
    case Correction::kBh:
      return "bh";
    case Correction::kPocock:
      return "pocock";
    case Correction::kObrienFleming:
      return "obrien_fleming";
    case Correction::kNone:
    default:
      return "none";
  }
}

Correction correction_from_string(const std::string& name) {
  if (name == "none") return Correction::kNone;
  if (name == "bh") return Correction::kBh;
  if (name == "pocock") return Correction::kPocock;
  if (name == "obf" || name == "obrien_fleming") {
    return Correction::kObrienFleming;
  }
  throw InvalidInput("unknown correction '" + name + "'");
}

SuitabilityReport decide(
    const CorrectnessEstimator& estimator,
    const std::vector<LogitRecord>& test_records,
    const std::vector<LogitRecord>& user_records, double margin, double alpha,
    std::optional<std::pair<double, double>> delta_adjustment) {
  check_decide_inputs(test_records, user_records, margin, alpha);

  // Only the logits flow in; labels on either split are never consulted.
  std::vector<double> pc_test = predict_pc(estimator, test_records);
  std::vector<double> pc_user = predict_pc(estimator, user_records);

  double margin_used = margin;
  if (delta_adjustment) {
    margin_used = adjusted_margin(margin, delta_adjustment->first,
                                  delta_adjustment->second);
  }
  return decide_on_pc(pc_test, pc_user, margin, alpha, margin_used,
                      estimator.digest(), Correction::kNone, 0, 0);
}

bool ground_truth_suitability(double acc_user, double acc_test, double m) {
  if (!(acc_user >= 0.0) || !(acc_user <= 1.0) || !(acc_test >= 0.0) ||
      !(acc_test <= 1.0)) {
    throw InvalidInput("ground_truth_suitability: accuracies must be in [0,1]");
  }
  return acc_user >= acc_test - m;
}

MonitorSession::MonitorSession(CorrectnessEstimator estimator,
                               std::vector<LogitRecord> test_records,
                               double margin, double alpha,
                               Correction correction, std::size_t n_stages)
    : estimator_(std::move(estimator)),
      test_records_(std::move(test_records)),
      margin_(margin),
      alpha_(alpha),
      correction_(correction) {
  if (test_records_.size() < 2) {
    throw InvalidInput("monitor: test set needs n >= 2");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidInput("monitor: alpha must be in (0,1)");
  }
  if (!std::isfinite(margin)) {
    throw InvalidInput("monitor: margin must be finite");
  }
  if (correction_ == Correction::kPocock ||
      correction_ == Correction::kObrienFleming) {
    if (n_stages < 1) {
      throw ConfigError("monitor: alpha-spending corrections need n_stages "
                        ">= 1 fixed up front");
    }
    schedule_ = alpha_schedule(correction_ == Correction::kPocock
                                   ? ScheduleKind::kPocock
                                   : ScheduleKind::kObrienFleming,
                               n_stages, alpha);
  }
  pc_test_ = predict_pc(estimator_, test_records_);
  estimator_id_ = estimator_.digest();
}

SuitabilityReport MonitorSession::add_batch(
    const std::vector<LogitRecord>& user_batch) {
  if (user_batch.size() < 2) {
    throw InvalidInput("monitor: user batch needs n >= 2");
  }
  const std::size_t stage = reports_.size() + 1;
  const bool spending = correction_ == Correction::kPocock ||
                        correction_ == Correction::kObrienFleming;
  if (spending && stage > schedule_.n_stages) {
    throw ScheduleExhausted("monitor: batch " + std::to_string(stage) +
                            " exceeds the " +
                            std::to_string(schedule_.n_stages) +
                            "-stage schedule");
  }

  std::vector<double> pc_user = predict_pc(estimator_, user_batch);
  SuitabilityReport rep = decide_on_pc(
      pc_test_, pc_user, margin_, alpha_, margin_, estimator_id_, correction_,
      spending ? schedule_.n_stages : 0, stage);

  if (spending) {
    rep.suitable = rep.welch.p_one_sided <= schedule_.thresholds[stage - 1];
  }
  reports_.push_back(rep);

  if (correction_ == Correction::kBh) {
    // Family-wise decisions over the whole window; earlier batches may flip.
    std::vector<double> ps;
    ps.reserve(reports_.size());
    for (const auto& r : reports_) ps.push_back(r.welch.p_one_sided);
    std::vector<bool> reject = benjamini_hochberg(ps, alpha_);
    for (std::size_t i = 0; i < reports_.size(); ++i) {
      reports_[i].suitable = reject[i];
    }
  }
  return reports_.back();
}

std::vector<SuitabilityReport> monitor(
    const CorrectnessEstimator& estimator,
    const std::vector<LogitRecord>& test_records,
    const std::vector<std::vector<LogitRecord>>& user_batches, double margin,
    double alpha, Correction correction, std::size_t n_stages) {
  MonitorSession session(estimator, test_records, margin, alpha, correction,
                         n_stages);
  for (const auto& batch : user_batches) session.add_batch(batch);
  return session.reports();
}

}  // namespace suitfilter
