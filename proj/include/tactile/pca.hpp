#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tactile/matrix.hpp"

namespace tactile::pca {

struct PcaModel {
  std::vector<double> mean;                 // D
  Matrix components;                        // k x D, orthonormal rows
  std::vector<double> explained_variance;   // k, nonincreasing
  std::vector<double> explained_ratio;      // k
  double total_variance = 0.0;
  // Jacobi diagnostics of the Gram eigendecomposition
  std::size_t jacobi_sweeps = 0;
  double jacobi_offdiag_ratio = 0.0;

  std::size_t k() const noexcept { return components.rows(); }
  std::size_t dim() const noexcept { return mean.size(); }
  double explained_ratio_sum() const;
};

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
  std::size_t sweeps = 0;
  double offdiag_ratio = 0.0;  // ||offdiag(A_final)||_F / ||A||_F
};

inline constexpr std::size_t kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-14;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen jacobi_eigen(Matrix a, std::size_t max_sweeps = kJacobiMaxSweeps, double tol = kJacobiTolerance);

/// PCA through the N x N Gram matrix Xc Xc^T / (N - 1). Each component's
/// largest-magnitude entry is positive (lowest index on ties).
PcaModel fit_pca(const Matrix& x, std::size_t k);

std::vector<double> project(const PcaModel& model, std::span<const double> x);
std::vector<double> reconstruct(const PcaModel& model, std::span<const double> z);

}  // namespace tactile::pca
