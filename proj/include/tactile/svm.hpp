#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tactile/matrix.hpp"

namespace tactile::svm {

struct SvmOptions {
  double c = 1.0;
  double tol = 1e-6;               // stop when the maximal KKT violation drops below this
  std::size_t max_passes = 10000;  // one pass = N pair updates
  /// Called with the dual objective after every pair update (diagnostics).
  std::function<void(double)> on_update;
};

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  std::vector<double> alphas;
  std::size_t iterations = 0;
  double final_violation = 0.0;
  bool converged = false;
};

/// Linear soft-margin SVM, dual solved by SMO with maximal-violating-pair
/// selection. Fully deterministic: no randomized ordering.
SvmModel train_svm(const Matrix& x, std::span<const int> y, const SvmOptions& options = {});

struct Prediction {
  int label = 1;
  double score = 0.0;
};

/// label = +1 when score >= 0.
Prediction predict(const SvmModel& model, std::span<const double> x);

/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j <x_i, x_j>
double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alphas);

}  // namespace tactile::svm
