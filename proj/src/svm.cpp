#include "tactile/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tactile/error.hpp"

namespace tactile::svm {

namespace {
constexpr double kTau = 1e-12;
}

double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alphas) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    linear += alphas[i];
    for (std::size_t j = 0; j < x.rows(); ++j) {
      quad += alphas[i] * alphas[j] * y[i] * y[j] * dot(x.row(i), x.row(j));
    }
  }
  return linear - 0.5 * quad;
}

SvmModel train_svm(const Matrix& x, std::span<const int> y, const SvmOptions& options) {
  const std::size_t n = x.rows();
  if (y.size() != n) fail(ErrorCode::DimensionMismatch, "label count differs from row count");
  if (n < 2) fail(ErrorCode::InsufficientPoints, "SVM needs at least 2 samples");
  if (!(options.c > 0.0) || !std::isfinite(options.c)) fail(ErrorCode::InvalidArgument, "C must be > 0");
  bool has_pos = false;
  bool has_neg = false;
  for (int label : y) {
    if (label == 1) {
      has_pos = true;
    } else if (label == -1) {
      has_neg = true;
    } else {
      fail(ErrorCode::InvalidArgument, "labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) fail(ErrorCode::SingleClassInput, "training labels contain a single class");
  for (double v : x.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "SVM input contains a non-finite value");
  }

  const double c = options.c;
  // Q_ij = y_i y_j <x_i, x_j>
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = y[i] * y[j] * dot(x.row(i), x.row(j));
      q(i, j) = v;
      q(j, i) = v;
    }
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };

  SvmModel model;
  model.c = c;
  const std::size_t max_iter = options.max_passes * n;
  double gmax = 0.0;
  double gmin = 0.0;
  while (true) {
    gmax = -std::numeric_limits<double>::infinity();
    gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double g = -y[t] * grad[t];
      if (in_up(t) && g > gmax) {
        gmax = g;
        i = t;
      }
      if (in_low(t) && g < gmin) {
        gmin = g;
        j = t;
      }
    }
    if (i == n || j == n || gmax - gmin < options.tol) {
      model.converged = true;
      break;
    }
    if (model.iterations >= max_iter) break;
    ++model.iterations;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;

    if (options.on_update) {
      double sum_alpha = 0.0;
      double alpha_grad = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        sum_alpha += alpha[t];
        alpha_grad += alpha[t] * grad[t];
      }
      options.on_update(0.5 * sum_alpha - 0.5 * alpha_grad);
    }
  }
  const bool both_sets = std::isfinite(gmax) && std::isfinite(gmin);
  model.final_violation = both_sets ? std::max(0.0, gmax - gmin) : 0.0;

  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    model.bias = free_sum / static_cast<double>(free_count);
  } else if (both_sets) {
    model.bias = 0.5 * (gmax + gmin);
  } else {
    model.bias = std::isfinite(gmax) ? gmax : (std::isfinite(gmin) ? gmin : 0.0);
  }

  model.weights.assign(x.cols(), 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] == 0.0) continue;
    const auto row = x.row(t);
    for (std::size_t d = 0; d < x.cols(); ++d) model.weights[d] += alpha[t] * y[t] * row[d];
  }
  model.alphas = std::move(alpha);
  return model;
}

Prediction predict(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size()) {
    fail(ErrorCode::DimensionMismatch, "expected a " + std::to_string(model.weights.size()) + "-vector, got " +
                                           std::to_string(x.size()));
  }
  Prediction p;
  p.score = dot(model.weights, x) + model.bias;
  p.label = p.score >= 0.0 ? 1 : -1;
  return p;
}

}  // namespace tactile::svm
