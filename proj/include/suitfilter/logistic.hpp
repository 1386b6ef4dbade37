#ifndef SUITFILTER_LOGISTIC_HPP
#define SUITFILTER_LOGISTIC_HPP

#include <cstddef>
#include <vector>

#include "suitfilter/types.hpp"

namespace suitfilter {

/// Numerically safe sigmoid.
double sigmoid(double z);

/// log(1 + e^x) without overflow; softplus(-z) = -log(sigmoid(z)).
double softplus(double x);

/// Gradient-descent settings for the BCE fit.  Defaults match the estimator
/// training contract: stop when the gradient infinity-norm drops below
/// `tolerance` or after `max_iters` accepted steps.
struct FitConfig {
  double lambda = 1e-4;       // L2 strength on weights (not the bias)
  std::size_t max_iters = 10000;
  double tolerance = 1e-8;    // gradient infinity-norm stopping threshold
};

struct FitResult {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  bool converged = false;  // tolerance reached before the iteration cap
};

/// Mean binary cross-entropy plus (lambda/2)*||w||^2, evaluated via softplus
/// so extreme scores cannot overflow.
double bce_loss_at(const std::vector<double>& weights, double bias,
                   const SignalMatrix& features, const std::vector<int>& labels,
                   double lambda);

/// Analytic gradient of bce_loss_at:
///   grad_w = (1/N) sum (p_i - c_i) x_i + lambda*w,  grad_b = (1/N) sum (p_i - c_i).
void bce_gradient_at(const std::vector<double>& weights, double bias,
                     const SignalMatrix& features,
                     const std::vector<int>& labels, double lambda,
                     std::vector<double>& grad_w, double& grad_b);

/// Full-batch gradient descent from w=0, b=0 with Armijo backtracking line
/// search (c = 1e-4, step halving).  Deterministic; the loss sequence is
/// non-increasing across accepted steps.
FitResult fit_logistic(const SignalMatrix& features,
                       const std::vector<int>& labels, const FitConfig& config);

}  // namespace suitfilter

#endif  // SUITFILTER_LOGISTIC_HPP
