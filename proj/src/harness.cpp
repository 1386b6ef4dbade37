#include "suitfilter/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "suitfilter/calibration.hpp"
#include "suitfilter/errors.hpp"
#include "suitfilter/random.hpp"
#include "suitfilter/signals.hpp"
#include "suitfilter/stats.hpp"

namespace suitfilter {

namespace {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

void check_synth_config(const SyntheticShiftConfig& c) {
  if (c.n_classes < 2) {
    throw ConfigError("synthetic config: n_classes must be >= 2");
  }
  if (c.n_samples < 1) {
    throw ConfigError("synthetic config: n_samples must be >= 1");
  }
  if (!(c.noise_scale >= 0.0) || !std::isfinite(c.noise_scale)) {
    throw ConfigError("synthetic config: noise_scale must be finite and >= 0");
  }
  if (!(c.temperature > 0.0) || !std::isfinite(c.temperature)) {
    throw ConfigError("synthetic config: temperature must be > 0");
  }
  const double chance = 1.0 / static_cast<double>(c.n_classes);
  if (!(c.accuracy > chance) || !(c.accuracy <= 1.0)) {
    throw ConfigError("synthetic config: accuracy target must lie in (1/k, 1]");
  }
}

struct GroupStats {
  SignalMatrix matrix;
  std::vector<int> correctness;
  double accuracy = 0.0;
};

GroupStats fold_stats(const std::string& name,
                      const std::vector<LogitRecord>& records) {
  if (records.empty()) {
    throw InvalidInput("run_grid: fold '" + name + "' is empty");
  }
  GroupStats g;
  g.matrix = extract_matrix(records);
  g.correctness = correctness_labels(records);
  g.accuracy =
      std::accumulate(g.correctness.begin(), g.correctness.end(), 0.0) /
      static_cast<double>(g.correctness.size());
  return g;
}

}  // namespace

double boosted_win_probability(double boost, double noise,
                               std::size_t n_classes) {
  if (!(boost > 0.0)) {
    throw InvalidInput("boosted_win_probability: boost must be > 0");
  }
  if (noise == 0.0) return 1.0;
  // P(win) = E_u[ Phi(u + boost/noise)^(k-1) ], u ~ N(0,1): the boosted
  // class carries its own noise draw, so its lead over each rival is
  // boost + noise*(u - u_j).  Simpson integration over u in [-8.5, 8.5].
  const double shift = boost / noise;
  const int n_panels = 2000;  // even
  const double lo = -8.5, hi = 8.5;
  const double h = (hi - lo) / n_panels;
  const double k1 = static_cast<double>(n_classes - 1);
  auto integrand = [&](double u) {
    const double phi =
        std::exp(-0.5 * u * u) / 2.5066282746310005024157652848110;
    return phi * std::pow(normal_cdf(u + shift), k1);
  };
  double sum = integrand(lo) + integrand(hi);
  for (int i = 1; i < n_panels; ++i) {
    sum += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

std::vector<LogitRecord> generate_synthetic_domain(
    const SyntheticShiftConfig& config) {
  check_synth_config(config);
  const std::size_t k = config.n_classes;
  const double chance = 1.0 / static_cast<double>(k);

  // Unboosted samples win with probability exactly 1/k (symmetry under
  // continuous noise; the lowest-index tie rule under zero noise).  Solve
  // the mixture q*p_win + (1-q)/k = accuracy for the boost probability q.
  const double p_win = boosted_win_probability(kSyntheticBoost,
                                               config.noise_scale, k);
  const double q = (config.accuracy - chance) / (p_win - chance);
  if (q > 1.0 + 1e-9) {
    throw ConfigError(
        "synthetic config: accuracy target " + std::to_string(config.accuracy) +
        " is unreachable at noise_scale " + std::to_string(config.noise_scale) +
        " (max achievable ~" + std::to_string(p_win) + ")");
  }
  const double q_clamped = std::min(q, 1.0);

  Rng rng(config.seed);
  std::vector<LogitRecord> records;
  records.reserve(config.n_samples);
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    LogitRecord rec;
    rec.id = config.name + "_" + std::to_string(i);
    rec.fold = config.name;
    const int label = rng.uniform_int(static_cast<int>(k));
    rec.label = label;
    const bool boosted = rng.uniform() < q_clamped;
    rec.logits.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      rec.logits[j] = config.noise_scale * rng.normal();
    }
    if (boosted) {
      rec.logits[static_cast<std::size_t>(label)] += kSyntheticBoost;
    }
    if (config.temperature != 1.0) {
      for (double& z : rec.logits) z /= config.temperature;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ExperimentRecord> run_grid(
    const std::vector<std::pair<std::string, std::vector<LogitRecord>>>& folds,
    const GridConfig& config) {
  if (folds.size() < 3) {
    throw InvalidInput("run_grid: need at least 3 folds, got " +
                       std::to_string(folds.size()));
  }

  std::vector<GroupStats> stats;
  stats.reserve(folds.size());
  for (const auto& [name, records] : folds) {
    stats.push_back(fold_stats(name, records));
  }

  // The estimator depends only on the sf fold; train each one once.
  std::vector<CorrectnessEstimator> estimators(folds.size());
  std::vector<std::vector<std::vector<double>>> pc(folds.size());
  for (std::size_t s = 0; s < folds.size(); ++s) {
    TrainConfig tc = config.train;
    tc.fitted_on = folds[s].first;
    estimators[s] = train(stats[s].matrix, stats[s].correctness, tc);
    pc[s].resize(folds.size());
    for (std::size_t other = 0; other < folds.size(); ++other) {
      if (other == s) continue;
      pc[s][other] = predict_pc(estimators[s], stats[other].matrix);
    }
  }

  std::vector<ExperimentRecord> out;
  out.reserve(folds.size() * (folds.size() - 1) * (folds.size() - 2));
  for (std::size_t u = 0; u < folds.size(); ++u) {
    for (std::size_t t = 0; t < folds.size(); ++t) {
      if (t == u) continue;
      for (std::size_t s = 0; s < folds.size(); ++s) {
        if (s == u || s == t) continue;
        ExperimentRecord rec;
        rec.fold_user = folds[u].first;
        rec.fold_test = folds[t].first;
        rec.fold_sf = folds[s].first;
        rec.acc_user = stats[u].accuracy;
        rec.acc_test = stats[t].accuracy;
        rec.ground_truth_suitable =
            rec.acc_user >= rec.acc_test - config.margin;
        const WelchResult w =
            welch_noninferiority(pc[s][t], pc[s][u], config.margin);
        rec.p_value = w.p_one_sided;
        rec.decision = rec.p_value <= config.alpha;
        rec.delta_u = estimate_delta(pc[s][u], stats[u].correctness);
        rec.delta_test = estimate_delta(pc[s][t], stats[t].correctness);
        rec.accuracy_difference = rec.acc_user - rec.acc_test;
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

GridSummary summarize(const std::vector<ExperimentRecord>& records,
                      double alpha) {
  if (records.empty()) {
    throw InvalidInput("summarize: empty record list");
  }
  GridSummary s;
  std::size_t agree = 0;
  std::size_t negatives = 0;
  std::size_t false_pos = 0;
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(records.size());
  labels.reserve(records.size());
  for (const auto& r : records) {
    const bool decision = r.p_value <= alpha;
    if (decision == r.ground_truth_suitable) ++agree;
    if (!r.ground_truth_suitable) {
      ++negatives;
      if (decision) ++false_pos;
    }
    scores.push_back(1.0 - r.p_value);
    labels.push_back(r.ground_truth_suitable ? 1 : 0);
  }
  s.accuracy = static_cast<double>(agree) / static_cast<double>(records.size());
  s.fpr = negatives == 0 ? 0.0
                         : static_cast<double>(false_pos) /
                               static_cast<double>(negatives);
  s.roc_auc = roc_auc(scores, labels);
  s.pr_auc = pr_auc(scores, labels);
  return s;
}

std::vector<SensitivityBin> sensitivity_bins(
    const std::vector<ExperimentRecord>& records, double alpha,
    double bin_width) {
  if (records.empty()) {
    throw InvalidInput("sensitivity_bins: empty record list");
  }
  if (!(bin_width > 0.0)) {
    throw InvalidInput("sensitivity_bins: bin_width must be > 0");
  }
  std::map<long long, std::pair<std::size_t, std::size_t>> bins;
  for (const auto& r : records) {
    const long long idx = static_cast<long long>(
        std::floor(r.accuracy_difference / bin_width));
    auto& [count, suitable] = bins[idx];
    ++count;
    if (r.p_value <= alpha) ++suitable;
  }
  std::vector<SensitivityBin> out;
  out.reserve(bins.size());
  for (const auto& [idx, cs] : bins) {
    SensitivityBin b;
    b.lo = static_cast<double>(idx) * bin_width;
    b.hi = static_cast<double>(idx + 1) * bin_width;
    b.count = cs.first;
    b.suitable_fraction =
        static_cast<double>(cs.second) / static_cast<double>(cs.first);
    out.push_back(b);
  }
  return out;
}

std::optional<double> roc_auc(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("roc_auc: size mismatch");
  }
  std::size_t pos = 0;
  for (int c : labels) pos += c == 1 ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });

  // Trapezoid through each tied-score group so ties contribute the diagonal.
  double auc = 0.0;
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double score = scores[order[i]];
    const double tp_prev = tp, fp_prev = fp;
    while (i < order.size() && scores[order[i]] == score) {
      if (labels[order[i]] == 1) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
      ++i;
    }
    auc += (fp - fp_prev) * (tp + tp_prev) * 0.5;
  }
  return auc / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::optional<double> pr_auc(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("pr_auc: size mismatch");
  }
  std::size_t pos = 0;
  for (int c : labels) pos += c == 1 ? 1 : 0;
  if (pos == 0 || pos == labels.size()) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });

  double auc = 0.0;
  double tp = 0.0, fp = 0.0;
  double prev_recall = 0.0;
  double prev_precision = 1.0;  // extended to recall 0 with the first value
  bool first = true;
  std::size_t i = 0;
  while (i < order.size()) {
    const double score = scores[order[i]];
    while (i < order.size() && scores[order[i]] == score) {
      if (labels[order[i]] == 1) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
      ++i;
    }
    const double recall = tp / static_cast<double>(pos);
    const double precision = tp / (tp + fp);
    if (first) {
      prev_precision = precision;
      first = false;
    }
    auc += (recall - prev_recall) * (precision + prev_precision) * 0.5;
    prev_recall = recall;
    prev_precision = precision;
  }
  return auc;
}

}  // namespace suitfilter
