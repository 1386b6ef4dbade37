#include "suitfilter/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "suitfilter/errors.hpp"

namespace suitfilter {

namespace {

constexpr int kBetaCfMaxIter = 200;
constexpr double kBetaCfEps = 1e-14;
constexpr double kFpMin = 1e-300;

/// Continued fraction for the incomplete beta function, evaluated with the
/// modified Lentz method.  Converges quickly for x < (a+1)/(a+b+2); the
/// caller flips arguments to stay in that regime.
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaCfMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kBetaCfEps) break;
  }
  return h;
}

void check_sample(const std::vector<double>& v, const char* name) {
  if (v.size() < 2) {
    throw InvalidInput(std::string("welch_noninferiority: ") + name +
                       " needs n >= 2, got " + std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw InvalidInput(std::string("welch_noninferiority: ") + name +
                         " contains a non-finite value");
    }
  }
}

/// Mean and unbiased sample variance (n-1 denominator), two passes.
void mean_and_var(const std::vector<double>& v, double& mean, double& var) {
  const double n = static_cast<double>(v.size());
  mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) {
    const double d = x - mean;
    ss += d * d;
  }
  var = ss / (n - 1.0);
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InvalidInput("regularized_incomplete_beta: a and b must be > 0");
  }
  if (std::isnan(x)) {
    throw InvalidInput("regularized_incomplete_beta: x is NaN");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) {
    throw InvalidInput("t_cdf: df must be > 0");
  }
  if (!std::isfinite(t)) {
    throw InvalidInput("t_cdf: t must be finite");
  }
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double ib = regularized_incomplete_beta(0.5 * df, 0.5, x);
  return t < 0.0 ? 0.5 * ib : 1.0 - 0.5 * ib;
}

double f_cdf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw InvalidInput("f_cdf: degrees of freedom must be > 0");
  }
  if (f <= 0.0) return 0.0;
  return regularized_incomplete_beta(0.5 * d1, 0.5 * d2,
                                     d1 * f / (d1 * f + d2));
}

double f_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw InvalidInput("f_sf: degrees of freedom must be > 0");
  }
  if (f <= 0.0) return 1.0;
  // I_{1-x}(b, a) = 1 - I_x(a, b), evaluated directly for precision.
  return regularized_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d1 * f + d2));
}

WelchResult welch_noninferiority(const std::vector<double>& pc_test,
                                 const std::vector<double>& pc_user,
                                 double margin) {
  check_sample(pc_test, "pc_test");
  check_sample(pc_user, "pc_user");
  if (!std::isfinite(margin)) {
    throw InvalidInput("welch_noninferiority: margin must be finite");
  }

  WelchResult r{};
  r.n_test = pc_test.size();
  r.n_user = pc_user.size();
  mean_and_var(pc_test, r.mean_test, r.var_test);
  double mean_user = 0.0;
  mean_and_var(pc_user, mean_user, r.var_user);
  r.mean_user_adjusted = mean_user + margin;

  const double nt = static_cast<double>(r.n_test);
  const double nu = static_cast<double>(r.n_user);
  const double term_t = r.var_test / nt;
  const double term_u = r.var_user / nu;
  const double se2 = term_t + term_u;

  if (se2 <= 0.0) {
    // Zero variance on both sides: the t statistic is a limit, not a number.
    r.df = nt + nu - 2.0;
    if (r.mean_user_adjusted > r.mean_test) {
      r.t = -std::numeric_limits<double>::infinity();
      r.p_one_sided = 0.0;
    } else if (r.mean_user_adjusted < r.mean_test) {
      r.t = std::numeric_limits<double>::infinity();
      r.p_one_sided = 1.0;
    } else {
      throw DegenerateStatistic(
          "welch_noninferiority: both variances zero and adjusted means "
          "equal; the test statistic is undefined");
    }
    return r;
  }

  r.t = (r.mean_test - r.mean_user_adjusted) / std::sqrt(se2);
  r.df = se2 * se2 /
         (term_t * term_t / (nt - 1.0) + term_u * term_u / (nu - 1.0));
  r.p_one_sided = t_cdf(r.t, r.df);
  return r;
}

TostResult tost_equivalence(const std::vector<double>& pc_a,
                            const std::vector<double>& pc_b, double margin) {
  if (!(margin > 0.0)) {
    throw InvalidInput("tost_equivalence: margin must be > 0");
  }
  TostResult r{};
  r.p_lower = welch_noninferiority(pc_a, pc_b, margin).p_one_sided;
  r.p_upper = welch_noninferiority(pc_b, pc_a, margin).p_one_sided;
  r.p = std::max(r.p_lower, r.p_upper);
  return r;
}

std::vector<bool> benjamini_hochberg(const std::vector<double>& p_values,
                                     double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidInput("benjamini_hochberg: alpha must be in (0,1)");
  }
  for (double p : p_values) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
      throw InvalidInput("benjamini_hochberg: p-values must lie in [0,1]");
    }
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) {
                     return p_values[i] < p_values[j];
                   });
  std::size_t cutoff = 0;  // number of rejections in sorted order
  for (std::size_t i = 0; i < m; ++i) {
    const double threshold =
        alpha * static_cast<double>(i + 1) / static_cast<double>(m);
    if (p_values[order[i]] <= threshold) cutoff = i + 1;
  }
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < cutoff; ++i) reject[order[i]] = true;
  return reject;
}

AlphaSchedule alpha_schedule(ScheduleKind kind, std::size_t n_stages,
                             double alpha) {
  if (n_stages < 1) {
    throw InvalidInput("alpha_schedule: n_stages must be >= 1");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidInput("alpha_schedule: alpha must be in (0,1)");
  }
  AlphaSchedule s{kind, n_stages, alpha, {}};
  s.thresholds.resize(n_stages);
  const double n = static_cast<double>(n_stages);
  for (std::size_t k = 1; k <= n_stages; ++k) {
    if (kind == ScheduleKind::kPocock) {
      s.thresholds[k - 1] = alpha / n;
    } else {
      // Increasing per-stage spending; differs from classical OBF Z-score
      // boundaries by design (see README).
      const double remaining = n - static_cast<double>(k) + 1.0;
      s.thresholds[k - 1] = 1.0 - std::pow(1.0 - alpha, 1.0 / remaining);
    }
  }
  return s;
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "pocock") return ScheduleKind::kPocock;
  if (name == "obf" || name == "obrien_fleming") {
    return ScheduleKind::kObrienFleming;
  }
  throw InvalidInput("unknown schedule kind '" + name + "'");
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kPocock ? "pocock" : "obrien_fleming";
}

}  // namespace suitfilter
