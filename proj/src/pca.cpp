#include "tactile/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tactile/error.hpp"

namespace tactile::pca {

namespace {

double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

void normalize(std::span<double> v) {
  const double n = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n;
}

void fix_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0.0) {
    for (auto& x : v) x = -x;
  }
}

}  // namespace

double PcaModel::explained_ratio_sum() const {
  return std::accumulate(explained_ratio.begin(), explained_ratio.end(), 0.0);
}

SymmetricEigen jacobi_eigen(Matrix a, std::size_t max_sweeps, double tol) {
  const std::size_t n = a.rows();
  if (a.cols() != n) fail(ErrorCode::DimensionMismatch, "jacobi_eigen needs a square matrix");
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);

  SymmetricEigen out;
  while (frob > 0.0 && offdiag_norm(a) > tol * frob && out.sweeps < max_sweeps) {
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  out.offdiag_ratio = frob > 0.0 ? offdiag_norm(a) / frob : 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
  }
  return out;
}

PcaModel fit_pca(const Matrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) fail(ErrorCode::InsufficientPoints, "PCA needs at least 2 samples");
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (k > std::min(n - 1, d)) {
    fail(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds min(N - 1, D) = " +
                                   std::to_string(std::min(n - 1, d)));
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "PCA input contains a non-finite value");
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += x(i, j);
  }
  for (auto& m : model.mean) m /= static_cast<double>(n);
  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) centered(i, j) = x(i, j) - model.mean[j];
  }

  const double denom = static_cast<double>(n - 1);
  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double g = dot(centered.row(i), centered.row(j)) / denom;
      gram(i, j) = g;
      gram(j, i) = g;
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += gram(i, i);
  model.total_variance = trace;

  auto eig = jacobi_eigen(gram);
  model.jacobi_sweeps = eig.sweeps;
  model.jacobi_offdiag_ratio = eig.offdiag_ratio;

  const double lambda_max = std::max(eig.values.front(), 0.0);
  const double rank_floor = 1e-10 * lambda_max;
  std::size_t rank = 0;
  while (rank < eig.values.size() && lambda_max > 0.0 && eig.values[rank] > rank_floor) ++rank;
  if (rank < k) {
    fail(ErrorCode::DegenerateData, "data rank " + std::to_string(rank) + " is below k = " + std::to_string(k) +
                                        "; achievable rank is " + std::to_string(rank));
  }

  model.components = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    auto comp = model.components.row(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = eig.vectors(i, c);
      if (w == 0.0) continue;
      const auto xi = centered.row(i);
      for (std::size_t j = 0; j < d; ++j) comp[j] += w * xi[j];
    }
    normalize(comp);
    // two Gram-Schmidt passes against earlier components
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        const auto other = model.components.row(prev);
        const double proj = dot(comp, other);
        for (std::size_t j = 0; j < d; ++j) comp[j] -= proj * other[j];
      }
      normalize(comp);
    }
    fix_sign(comp);
    model.explained_variance.push_back(eig.values[c]);
    model.explained_ratio.push_back(trace > 0.0 ? eig.values[c] / trace : 0.0);
  }
  return model;
}

std::vector<double> project(const PcaModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    fail(ErrorCode::DimensionMismatch,
         "expected a " + std::to_string(model.dim()) + "-vector, got " + std::to_string(x.size()));
  }
  std::vector<double> centered(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) centered[j] = x[j] - model.mean[j];
  std::vector<double> z(model.k());
  for (std::size_t c = 0; c < model.k(); ++c) z[c] = dot(model.components.row(c), centered);
  return z;
}

std::vector<double> reconstruct(const PcaModel& model, std::span<const double> z) {
  if (z.size() != model.k()) {
    fail(ErrorCode::DimensionMismatch,
         "expected a " + std::to_string(model.k()) + "-vector, got " + std::to_string(z.size()));
  }
  std::vector<double> x = model.mean;
  for (std::size_t c = 0; c < model.k(); ++c) {
    const auto comp = model.components.row(c);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += z[c] * comp[j];
  }
  return x;
}

}  // namespace tactile::pca
