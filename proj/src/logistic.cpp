#include "suitfilter/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "suitfilter/errors.hpp"

namespace suitfilter {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kMinStep = 1e-20;
constexpr double kMaxStep = 1e4;

void check_dims(const SignalMatrix& features, const std::vector<int>& labels,
                std::size_t n_weights, const char* where) {
  if (features.rows() != labels.size()) {
    throw InvalidInput(std::string(where) + ": " +
                       std::to_string(features.rows()) + " rows vs " +
                       std::to_string(labels.size()) + " labels");
  }
  if (features.cols() != n_weights) {
    throw InvalidInput(std::string(where) + ": " +
                       std::to_string(features.cols()) + " columns vs " +
                       std::to_string(n_weights) + " weights");
  }
  for (int c : labels) {
    if (c != 0 && c != 1) {
      throw InvalidInput(std::string(where) + ": labels must be 0 or 1");
    }
  }
}

double dot_row(const double* row, const std::vector<double>& w) {
  double z = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) z += row[j] * w[j];
  return z;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

double bce_loss_at(const std::vector<double>& weights, double bias,
                   const SignalMatrix& features, const std::vector<int>& labels,
                   double lambda) {
  check_dims(features, labels, weights.size(), "bce_loss");
  if (features.rows() == 0) {
    throw InvalidInput("bce_loss: empty input");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double z = dot_row(features.row(i), weights) + bias;
    // -log sigmoid(z) = softplus(-z);  -log(1 - sigmoid(z)) = softplus(z)
    sum += labels[i] == 1 ? softplus(-z) : softplus(z);
  }
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return sum / static_cast<double>(features.rows()) + 0.5 * lambda * reg;
}

void bce_gradient_at(const std::vector<double>& weights, double bias,
                     const SignalMatrix& features,
                     const std::vector<int>& labels, double lambda,
                     std::vector<double>& grad_w, double& grad_b) {
  check_dims(features, labels, weights.size(), "bce_gradient");
  if (features.rows() == 0) {
    throw InvalidInput("bce_gradient: empty input");
  }
  grad_w.assign(weights.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double* row = features.row(i);
    const double r = sigmoid(dot_row(row, weights) + bias) - labels[i];
    for (std::size_t j = 0; j < weights.size(); ++j) grad_w[j] += r * row[j];
    grad_b += r;
  }
  const double n = static_cast<double>(features.rows());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    grad_w[j] = grad_w[j] / n + lambda * weights[j];
  }
  grad_b /= n;
}

FitResult fit_logistic(const SignalMatrix& features,
                       const std::vector<int>& labels,
                       const FitConfig& config) {
  if (features.rows() == 0) {
    throw InvalidInput("fit_logistic: empty input");
  }
  if (!(config.lambda >= 0.0)) {
    throw InvalidInput("fit_logistic: lambda must be >= 0");
  }

  FitResult res;
  res.weights.assign(features.cols(), 0.0);
  res.bias = 0.0;

  double loss = bce_loss_at(res.weights, res.bias, features, labels,
                            config.lambda);
  std::vector<double> grad_w(features.cols());
  std::vector<double> cand_w(features.cols());
  double grad_b = 0.0;
  double step = 1.0;

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    bce_gradient_at(res.weights, res.bias, features, labels, config.lambda,
                    grad_w, grad_b);
    double gmax = std::fabs(grad_b);
    double gsq = grad_b * grad_b;
    for (double g : grad_w) {
      gmax = std::max(gmax, std::fabs(g));
      gsq += g * g;
    }
    if (gmax < config.tolerance) {
      res.converged = true;
      break;
    }

    // Armijo backtracking: accept the first halved step with sufficient
    // decrease relative to the squared gradient norm.
    double t = step;
    double cand_loss = 0.0;
    double cand_b = 0.0;
    bool accepted = false;
    while (t >= kMinStep) {
      for (std::size_t j = 0; j < cand_w.size(); ++j) {
        cand_w[j] = res.weights[j] - t * grad_w[j];
      }
      cand_b = res.bias - t * grad_b;
      cand_loss = bce_loss_at(cand_w, cand_b, features, labels, config.lambda);
      if (cand_loss <= loss - kArmijoC * t * gsq) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no step makes progress; FP limit reached

    res.weights.swap(cand_w);
    res.bias = cand_b;
    loss = cand_loss;
    res.iterations = iter + 1;
    step = std::min(t * 2.0, kMaxStep);  // let the step grow back
  }

  res.final_loss = loss;
  return res;
}

}  // namespace suitfilter
