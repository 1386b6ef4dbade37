#ifndef SUITFILTER_STATS_HPP
#define SUITFILTER_STATS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace suitfilter {

/// Result of the one-sided Welch non-inferiority test.
///
/// H0: mu_user < mu_test - m (the user domain degrades by more than the
/// margin).  Small p_one_sided is evidence against H0, i.e. for suitability.
struct WelchResult {
  double t;                   // +-inf in the degenerate zero-variance case
  double df;                  // Welch-Satterthwaite degrees of freedom
  double p_one_sided;         // t_cdf(t, df)
  double mean_test;
  double mean_user_adjusted;  // mean(pc_user) + margin
  double var_test;            // sample variance, n-1 denominator
  double var_user;
  std::size_t n_test;
  std::size_t n_user;
};

/// Two one-sided tests for equivalence within +-margin.
struct TostResult {
  double p_lower;  // tests mu_b not below mu_a - margin
  double p_upper;  // tests mu_a not below mu_b - margin
  double p;        // max(p_lower, p_upper); equivalent at alpha iff p <= alpha
};

enum class ScheduleKind { kPocock, kObrienFleming };

/// Per-stage significance thresholds for sequential testing.
struct AlphaSchedule {
  ScheduleKind kind;
  std::size_t n_stages;
  double alpha;
  std::vector<double> thresholds;
};

/// Regularized incomplete beta function I_x(a, b), evaluated with the Lentz
/// continued fraction (200-iteration cap, 1e-14 convergence).
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution via I_x(df/2, 1/2), x = df/(df + t^2).
/// Requires df > 0 and finite t.
double t_cdf(double t, double df);

/// CDF and survival function of the F distribution with (d1, d2) degrees of
/// freedom.  The survival function is computed directly (not as 1 - CDF) so
/// small upper-tail probabilities keep full precision.
double f_cdf(double f, double d1, double d2);
double f_sf(double f, double d1, double d2);

/// One-sided Welch non-inferiority test on two vectors of correctness
/// estimates.  t = (mean_test - (mean_user + margin)) / sqrt(s2t/nt + s2u/nu)
/// with sample variances; df per Welch-Satterthwaite; p = t_cdf(t, df).
///
/// If both variances are zero the t statistic degenerates: p = 0 when
/// mean_user + margin > mean_test, p = 1 when strictly less, and exact
/// equality throws DegenerateStatistic.
WelchResult welch_noninferiority(const std::vector<double>& pc_test,
                                 const std::vector<double>& pc_user,
                                 double margin);

/// Two one-sided Welch tests at +-margin; equivalence at level alpha iff
/// the larger of the two p-values is <= alpha.  Requires margin > 0.
TostResult tost_equivalence(const std::vector<double>& pc_a,
                            const std::vector<double>& pc_b, double margin);

/// Benjamini-Hochberg step-up procedure.  Returns per-input rejection flags.
/// Sorting is stable, so ties are handled deterministically.
std::vector<bool> benjamini_hochberg(const std::vector<double>& p_values,
                                     double alpha);

/// Alpha-spending thresholds.  Pocock: alpha/n for every stage.
/// O'Brien-Fleming variant: alpha_k = 1 - (1 - alpha)^{1/(n-k+1)}; note this
/// differs from the classical OBF Z-score boundaries (see README).
AlphaSchedule alpha_schedule(ScheduleKind kind, std::size_t n_stages,
                             double alpha);

ScheduleKind schedule_kind_from_string(const std::string& name);
std::string to_string(ScheduleKind kind);

}  // namespace suitfilter

#endif  // SUITFILTER_STATS_HPP
