#ifndef SUITFILTER_SIGNALS_HPP
#define SUITFILTER_SIGNALS_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "suitfilter/types.hpp"

namespace suitfilter {

/// Number of suitability signals derived from one logit vector.
inline constexpr std::size_t kNumSignals = 12;

/// Epsilon guarding logs and ratios throughout signal extraction.
inline constexpr double kSignalEpsilon = 1e-10;

/// Per-record suitability signals, in canonical order.  All are functions of
/// the logit vector alone; none look at labels.
struct SignalVector {
  double conf_max;         // largest softmax probability
  double conf_std;         // population std of the softmax vector
  double conf_entropy;     // -sum p_i * ln(p_i + eps)
  double conf_ratio;       // p(1) / (p(2) + eps)
  double top_k_conf_sum;   // sum of the ceil(0.1 k) largest probabilities
  double logit_mean;       // mean of the raw logits
  double logit_max;        // largest raw logit
  double logit_std;        // population std of the raw logits
  double logit_diff_top2;  // z(1) - z(2)
  double loss;             // -ln(p(1) + eps), NLL of the predicted class
  double margin_loss;      // ln(p(2) + eps) - ln(p(1) + eps)
  double energy;           // -logsumexp(z)

  std::array<double, kNumSignals> to_array() const {
    return {conf_max,   conf_std,  conf_entropy,    conf_ratio,
            top_k_conf_sum, logit_mean, logit_max,  logit_std,
            logit_diff_top2, loss,      margin_loss, energy};
  }
};

/// Canonical signal names, index-aligned with SignalVector::to_array().
const std::vector<std::string>& signal_names();

/// Index of `name` in the canonical order; throws InvalidInput for unknown
/// names.
std::size_t signal_index(const std::string& name);

/// Numerically stable softmax (max is subtracted before exponentiation).
/// Requires at least two finite entries.
std::vector<double> softmax(const std::vector<double>& logits);

/// All twelve signals for one record.  Requires k >= 2 finite logits.
SignalVector extract_signals(const LogitRecord& record);

/// Signal matrix for a batch of records: one row per record, twelve columns
/// in canonical order.  Every record must have the same logit dimension.
SignalMatrix extract_matrix(const std::vector<LogitRecord>& records);

/// Fits per-column z-score parameters on `matrix` (population std).  Columns
/// with std below 1e-12 get std 1.  Requires at least one row.
SignalNormalizer fit_normalizer(const SignalMatrix& matrix,
                                const std::string& fitted_on);

/// Applies z-scoring column-wise.  Column count must match the normalizer.
SignalMatrix apply_normalizer(const SignalNormalizer& normalizer,
                              const SignalMatrix& matrix);

}  // namespace suitfilter

#endif  // SUITFILTER_SIGNALS_HPP
