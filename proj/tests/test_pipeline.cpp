#include <doctest.h>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "suitfilter/errors.hpp"
#include "suitfilter/pipeline.hpp"
#include "suitfilter/random.hpp"
#include "suitfilter/signals.hpp"

using namespace suitfilter;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

/// Estimator with weight 1 on logit_mean, identity normalizer, no
/// calibration: for a record with logits {2*logit(p), 0} the score is
/// logit(p), so predict_pc returns exactly p.  Gives tests full control over
/// the p_c values entering the Welch stage.
CorrectnessEstimator identity_estimator() {
  CorrectnessEstimator est;
  est.signal_order = signal_names();
  est.weights.assign(kNumSignals, 0.0);
  est.weights[signal_index("logit_mean")] = 1.0;
  est.bias = 0.0;
  est.normalizer.mean.assign(kNumSignals, 0.0);
  est.normalizer.std.assign(kNumSignals, 1.0);
  est.normalizer.fitted_on = "identity";
  est.calibrator = Calibrator::none();
  return est;
}

/// Records whose p_c under identity_estimator() equal `pc` exactly.
std::vector<LogitRecord> records_from_pc(const std::vector<double>& pc,
                                         const std::string& prefix = "r") {
  std::vector<LogitRecord> out;
  out.reserve(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    LogitRecord r;
    r.id = prefix + std::to_string(i);
    r.logits = {2.0 * logit(pc[i]), 0.0};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST_CASE("the identity estimator reproduces its target p_c exactly") {
  const CorrectnessEstimator est = identity_estimator();
  const std::vector<double> pc{0.5, 0.6, 0.7, 0.9, 0.12345};
  const std::vector<double> got = predict_pc(est, records_from_pc(pc));
  REQUIRE(got.size() == pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK(got[i] == doctest::Approx(pc[i]).epsilon(1e-12));
  }
}

TEST_CASE("decide on the worked example is SUITABLE at alpha 0.05") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  const auto user = records_from_pc({0.8, 0.9, 1.0 - 1e-12}, "u");
  const SuitabilityReport r = decide(est, test, user, 0.0, 0.05);
  CHECK(r.suitable);
  CHECK(r.suitable_raw);
  CHECK(r.welch.p_one_sided == doctest::Approx(0.010655820564378363).epsilon(1e-6));
  CHECK(r.welch.df == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(r.mean_pc_test == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(r.mean_pc_user == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(r.alpha == 0.05);
  CHECK(r.margin_requested == 0.0);
  CHECK(r.margin_used == 0.0);
  CHECK(r.stage == 0);
  CHECK(r.correction == Correction::kNone);
  CHECK(r.estimator_id == est.digest());
  CHECK(r.welch.n_test == 3);
  CHECK(r.welch.n_user == 3);
  // ISO-8601 UTC shape: 2025-01-01T00:00:00Z
  REQUIRE(r.timestamp.size() == 20);
  CHECK(r.timestamp[4] == '-');
  CHECK(r.timestamp[10] == 'T');
  CHECK(r.timestamp.back() == 'Z');
  CHECK_FALSE(r.config_digest.empty());
}

TEST_CASE("decide on statistically identical splits is INCONCLUSIVE") {
  const CorrectnessEstimator est = identity_estimator();
  const std::vector<double> pc{0.55, 0.65, 0.75, 0.85};
  const auto test = records_from_pc(pc, "t");
  const auto user = records_from_pc(pc, "u");
  const SuitabilityReport r = decide(est, test, user, 0.0, 0.05);
  CHECK_FALSE(r.suitable);
  CHECK(r.welch.p_one_sided == doctest::Approx(0.5));
}

TEST_CASE("a strong upward shift in user p_c is decisively SUITABLE") {
  const CorrectnessEstimator est = identity_estimator();
  Rng rng(2);
  std::vector<double> base(60), up(60);
  for (std::size_t i = 0; i < base.size(); ++i) {
    base[i] = rng.uniform(0.4, 0.6);
    up[i] = base[i] + 0.3;
  }
  const SuitabilityReport r = decide(est, records_from_pc(base, "t"),
                                     records_from_pc(up, "u"), 0.0, 0.05);
  CHECK(r.suitable);
  CHECK(r.welch.p_one_sided < 1e-6);

  // The reverse direction (user degraded) is firmly INCONCLUSIVE.
  const SuitabilityReport rev = decide(est, records_from_pc(up, "t"),
                                       records_from_pc(base, "u"), 0.0, 0.05);
  CHECK_FALSE(rev.suitable);
  CHECK(rev.welch.p_one_sided > 1.0 - 1e-6);
}

TEST_CASE("user labels are never read by decide") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  auto user = records_from_pc({0.8, 0.9, 0.95}, "u");
  const SuitabilityReport blind = decide(est, test, user, 0.0, 0.05);
  // Attach adversarial labels/predictions; nothing may change.
  for (std::size_t i = 0; i < user.size(); ++i) {
    user[i].label = static_cast<int>(i % 2);
    user[i].prediction = 1;
  }
  const SuitabilityReport labeled = decide(est, test, user, 0.0, 0.05);
  CHECK(blind.suitable == labeled.suitable);
  CHECK(blind.welch.p_one_sided == labeled.welch.p_one_sided);
  CHECK(blind.welch.t == labeled.welch.t);
}

TEST_CASE("decide is monotone in margin and alpha") {
  const CorrectnessEstimator est = identity_estimator();
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform_int(10));
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = rng.uniform(0.3, 0.9);
    for (auto& v : b) v = rng.uniform(0.3, 0.9);
    const auto test = records_from_pc(a, "t");
    const auto user = records_from_pc(b, "u");

    const double m1 = rng.uniform(-0.1, 0.1);
    const double m2 = m1 + rng.uniform(0.0, 0.15);
    const auto r1 = decide(est, test, user, m1, 0.05);
    const auto r2 = decide(est, test, user, m2, 0.05);
    // A larger tolerated drop can only make the verdict easier.
    CHECK(r2.welch.p_one_sided <= r1.welch.p_one_sided + 1e-15);
    if (r1.suitable) CHECK(r2.suitable);

    const double a1 = rng.uniform(0.01, 0.2);
    const double a2 = a1 + rng.uniform(0.0, 0.5);
    const auto s1 = decide(est, test, user, m1, a1);
    const auto s2 = decide(est, test, user, m1, a2);
    if (s1.suitable) CHECK(s2.suitable);
  }
}

TEST_CASE("delta adjustment shifts the tested margin to m'") {
  const CorrectnessEstimator est = identity_estimator();
  const std::vector<double> pct{0.5, 0.6, 0.7};
  const std::vector<double> pcu{0.62, 0.72, 0.82};
  const SuitabilityReport r =
      decide(est, records_from_pc(pct, "t"), records_from_pc(pcu, "u"), 0.05,
             0.05, std::make_pair(0.03, -0.01));
  CHECK(r.margin_requested == 0.05);
  CHECK(r.margin_used == doctest::Approx(0.05 + 0.03 - (-0.01)).epsilon(1e-15));
  // The Welch stage really ran at the adjusted margin.
  const WelchResult direct = welch_noninferiority(pct, pcu, r.margin_used);
  CHECK(r.welch.p_one_sided == doctest::Approx(direct.p_one_sided).epsilon(1e-9));
  CHECK(r.welch.t == doctest::Approx(direct.t).epsilon(1e-9));

  // No adjustment keeps margin_used == margin_requested.
  const SuitabilityReport plain = decide(
      est, records_from_pc(pct, "t"), records_from_pc(pcu, "u"), 0.05, 0.05);
  CHECK(plain.margin_used == plain.margin_requested);
}

TEST_CASE("decide validates sizes and parameters") {
  const CorrectnessEstimator est = identity_estimator();
  const auto two = records_from_pc({0.5, 0.6}, "t");
  const auto one = records_from_pc({0.5}, "u");
  CHECK_THROWS_AS(decide(est, one, two, 0.0, 0.05), InvalidInput);
  CHECK_THROWS_AS(decide(est, two, one, 0.0, 0.05), InvalidInput);
  CHECK_THROWS_AS(decide(est, two, two, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(decide(est, two, two, 0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(
      decide(est, two, two, std::numeric_limits<double>::quiet_NaN(), 0.05),
      InvalidInput);
}

TEST_CASE("ground_truth_suitability examples") {
  CHECK(ground_truth_suitability(0.68, 0.70, 0.05));   // drop 0.02 <= 0.05
  CHECK(ground_truth_suitability(0.65, 0.70, 0.05));   // boundary: equal
  CHECK_FALSE(ground_truth_suitability(0.64, 0.70, 0.05));
  CHECK(ground_truth_suitability(0.80, 0.70, 0.0));    // improvement
  CHECK(ground_truth_suitability(0.70, 0.70, 0.0));
  CHECK_FALSE(ground_truth_suitability(0.699, 0.70, 0.0));
  CHECK_THROWS_AS(ground_truth_suitability(1.2, 0.7, 0.05), InvalidInput);
  CHECK_THROWS_AS(ground_truth_suitability(0.7, -0.1, 0.05), InvalidInput);
}

TEST_CASE("a single monitored batch matches a standalone decide") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  const auto user = records_from_pc({0.8, 0.9, 0.97}, "u");

  MonitorSession session(est, test, 0.0, 0.05);
  const SuitabilityReport mon = session.add_batch(user);
  const SuitabilityReport one = decide(est, test, user, 0.0, 0.05);

  CHECK(mon.suitable == one.suitable);
  CHECK(mon.suitable_raw == one.suitable_raw);
  CHECK(mon.welch.p_one_sided == one.welch.p_one_sided);
  CHECK(mon.welch.t == one.welch.t);
  CHECK(mon.mean_pc_test == one.mean_pc_test);
  CHECK(mon.mean_pc_user == one.mean_pc_user);
  CHECK(mon.estimator_id == one.estimator_id);
  CHECK(mon.stage == 1);  // monitor stages are 1-based; decide reports 0
  CHECK(session.reports().size() == 1);
}

TEST_CASE("pocock correction gates borderline batches that raw alpha passes") {
  // Worked-example batches have p ~ 0.0107: raw-suitable at 0.05 but not at
  // the Pocock threshold 0.05/5 = 0.01.
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  const auto user = records_from_pc({0.8, 0.9, 1.0 - 1e-12}, "u");

  MonitorSession session(est, test, 0.0, 0.05, Correction::kPocock, 5);
  for (int k = 0; k < 5; ++k) {
    const SuitabilityReport r = session.add_batch(user);
    REQUIRE(r.welch.p_one_sided > 0.01);
    REQUIRE(r.welch.p_one_sided <= 0.05);
    CHECK(r.suitable_raw);
    CHECK_FALSE(r.suitable);
    CHECK(r.stage == static_cast<std::size_t>(k + 1));
    CHECK(r.correction == Correction::kPocock);
  }
  // The schedule has five stages; a sixth batch must refuse to spend.
  CHECK_THROWS_AS(session.add_batch(user), ScheduleExhausted);

  // Without correction the same stream is SUITABLE every time.
  MonitorSession plain(est, test, 0.0, 0.05);
  for (int k = 0; k < 5; ++k) CHECK(plain.add_batch(user).suitable);
}

TEST_CASE("obrien-fleming spends more alpha at later stages") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  const auto user = records_from_pc({0.8, 0.9, 1.0 - 1e-12}, "u");

  // p ~ 0.0107: above the first OBF threshold (0.0253... at n=2? no - with
  // n_stages=2 threshold 1 is 0.02532, 0.0107 < 0.02532 so it passes).
  // Use n_stages=4: threshold_1 = 1 - 0.95^(1/4) = 0.01274 > 0.0107 -> pass.
  // To see gating, shrink the shift so p lands between threshold_1 and
  // threshold_4 = 0.05.
  const auto borderline = records_from_pc({0.74, 0.84, 0.94}, "u");
  MonitorSession session(est, test, 0.0, 0.05, Correction::kObrienFleming, 4);
  const SuitabilityReport r1 = session.add_batch(borderline);
  REQUIRE(r1.welch.p_one_sided > 0.0128);  // above stage-1 spend
  REQUIRE(r1.welch.p_one_sided <= 0.05);
  CHECK(r1.suitable_raw);
  CHECK_FALSE(r1.suitable);
  session.add_batch(borderline);
  session.add_batch(borderline);
  const SuitabilityReport r4 = session.add_batch(borderline);
  CHECK(r4.suitable);  // final threshold is the full alpha
}

TEST_CASE("bh correction recomputes earlier decisions over the window") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  // Batch 1 lands in (0.025, 0.05]: alone it is BH-suitable, but a second
  // very-inconclusive batch lifts its threshold above it.
  const auto batch1 = records_from_pc({0.72, 0.82, 0.92}, "u1");
  const auto batch2 = records_from_pc({0.5, 0.6, 0.7}, "u2");

  MonitorSession session(est, test, 0.0, 0.05, Correction::kBh);
  const SuitabilityReport r1 = session.add_batch(batch1);
  REQUIRE(r1.welch.p_one_sided > 0.025);
  REQUIRE(r1.welch.p_one_sided <= 0.05);
  CHECK(r1.suitable);  // single test: threshold alpha

  session.add_batch(batch2);
  REQUIRE(session.reports().size() == 2);
  CHECK_FALSE(session.reports()[0].suitable);  // flipped by the wider window
  CHECK(session.reports()[0].suitable_raw);    // raw record is immutable
  CHECK_FALSE(session.reports()[1].suitable);
}

TEST_CASE("bh-corrected decisions equal benjamini_hochberg on the p-values") {
  const CorrectnessEstimator est = identity_estimator();
  Rng rng(77);
  std::vector<double> base(8);
  for (auto& v : base) v = rng.uniform(0.4, 0.6);
  const auto test = records_from_pc(base, "t");

  MonitorSession session(est, test, 0.0, 0.05, Correction::kBh);
  for (int k = 0; k < 6; ++k) {
    std::vector<double> pcu(8);
    const double shift = rng.uniform(-0.05, 0.25);
    for (std::size_t i = 0; i < pcu.size(); ++i) {
      pcu[i] = std::min(0.99, std::max(0.01, base[i] + shift +
                                                 rng.uniform(-0.02, 0.02)));
    }
    session.add_batch(records_from_pc(pcu, "u" + std::to_string(k)));
  }
  std::vector<double> pvals;
  for (const auto& r : session.reports()) pvals.push_back(r.welch.p_one_sided);
  const std::vector<bool> expect = benjamini_hochberg(pvals, 0.05);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(session.reports()[i].suitable == expect[i]);
  }
}

TEST_CASE("monitor wrapper equals a hand-driven session") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  const std::vector<std::vector<LogitRecord>> batches{
      records_from_pc({0.8, 0.9, 0.95}, "a"),
      records_from_pc({0.5, 0.55, 0.6}, "b"),
      records_from_pc({0.85, 0.9, 0.95}, "c"),
  };
  const auto wrapped = monitor(est, test, batches, 0.0, 0.05, Correction::kBh);
  MonitorSession session(est, test, 0.0, 0.05, Correction::kBh);
  for (const auto& b : batches) session.add_batch(b);
  REQUIRE(wrapped.size() == session.reports().size());
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    CHECK(wrapped[i].suitable == session.reports()[i].suitable);
    CHECK(wrapped[i].welch.p_one_sided ==
          session.reports()[i].welch.p_one_sided);
    CHECK(wrapped[i].stage == session.reports()[i].stage);
  }
}

TEST_CASE("monitor session constructor validation") {
  const CorrectnessEstimator est = identity_estimator();
  const auto test = records_from_pc({0.5, 0.6, 0.7}, "t");
  // Alpha-spending kinds need a stage count.
  CHECK_THROWS_AS(MonitorSession(est, test, 0.0, 0.05, Correction::kPocock, 0),
                  ConfigError);
  CHECK_THROWS_AS(
      MonitorSession(est, test, 0.0, 0.05, Correction::kObrienFleming, 0),
      ConfigError);
  // none/bh ignore n_stages.
  CHECK_NOTHROW(MonitorSession(est, test, 0.0, 0.05, Correction::kNone, 0));
  CHECK_NOTHROW(MonitorSession(est, test, 0.0, 0.05, Correction::kBh, 0));
  CHECK_THROWS_AS(MonitorSession(est, records_from_pc({0.5}, "t"), 0.0, 0.05),
                  InvalidInput);
}

TEST_CASE("correction names round-trip") {
  for (Correction c : {Correction::kNone, Correction::kBh, Correction::kPocock,
                       Correction::kObrienFleming}) {
    CHECK(correction_from_string(to_string(c)) == c);
  }
  CHECK(correction_from_string("obf") == Correction::kObrienFleming);
  CHECK_THROWS_AS(correction_from_string("bonferroni"), InvalidInput);
}
