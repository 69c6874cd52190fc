#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tactile/error.hpp"
#include "tactile/eval.hpp"
#include "tactile/pca.hpp"
#include "tactile/preprocess.hpp"
#include "tactile/rng.hpp"
#include "tactile/sim.hpp"

using namespace tactile;
using namespace tactile::pca;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) m(r, c) = rng.normal();
  }
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("rank-1 data on a line") {
  Matrix x(10, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    const double t = static_cast<double>(i) - 4.0;
    x(i, 0) = t / 3.0;
    x(i, 1) = 2.0 * t / 3.0;
    x(i, 2) = 2.0 * t / 3.0;
  }
  const auto model = fit_pca(x, 1);
  REQUIRE(model.k() == 1);
  CHECK(model.components(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(model.components(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(model.components(0, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(std::abs(model.explained_ratio[0] - 1.0) < 1e-10);
}

TEST_CASE("sign convention: largest-magnitude entry is positive") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = fit_pca(random_matrix(12, 7, seed), 4);
    for (std::size_t i = 0; i < model.k(); ++i) {
      std::size_t arg = 0;
      for (std::size_t j = 1; j < model.dim(); ++j) {
        if (std::abs(model.components(i, j)) > std::abs(model.components(i, arg))) arg = j;
      }
      CHECK(model.components(i, arg) > 0.0);
    }
  }
}

TEST_CASE("random 5 x 4, k = 3 matches the direct covariance oracle") {
  const auto x = random_matrix(5, 4, 42);
  const auto model = fit_pca(x, 3);
  const auto direct = oracle::direct_pca(x);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(model.explained_variance[i] - direct.eigenvalues(static_cast<Eigen::Index>(i))) < 1e-8);
  }
  CHECK(oracle::max_principal_angle(oracle::to_eigen(model.components), direct.vectors.leftCols(3)) < 1e-6);
}

TEST_CASE("Gram-trick equivalence on random small matrices") {
  Rng shapes(7);
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + shapes.below(29);
    const std::size_t d = 1 + shapes.below(30);
    const std::size_t rank = std::min(n - 1, d);
    const std::size_t k = 1 + shapes.below(rank);
    const auto x = random_matrix(n, d, 100 + trial);
    const auto model = fit_pca(x, k);
    const auto direct = oracle::direct_pca(x);
    CAPTURE(n);
    CAPTURE(d);
    CAPTURE(k);
    double total = 0.0;
    for (Eigen::Index i = 0; i < direct.eigenvalues.size(); ++i) total += direct.eigenvalues(i);
    CHECK(std::abs(model.total_variance - total) < 1e-8 * std::max(1.0, total));
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(std::abs(model.explained_variance[i] - direct.eigenvalues(static_cast<Eigen::Index>(i))) < 1e-8);
    }
    CHECK(oracle::max_principal_angle(oracle::to_eigen(model.components),
                                      direct.vectors.leftCols(static_cast<Eigen::Index>(k))) < 1e-6);
    CHECK(oracle::orthonormality_residual(model.components) < 1e-8);
  }
}

TEST_CASE("model invariants") {
  const auto model = fit_pca(random_matrix(20, 15, 3), 8);
  for (std::size_t i = 1; i < model.k(); ++i) CHECK(model.explained_variance[i] <= model.explained_variance[i - 1]);
  double sum = 0.0;
  for (std::size_t i = 0; i < model.k(); ++i) {
    CHECK(model.explained_variance[i] >= 0.0);
    CHECK(model.explained_ratio[i] == doctest::Approx(model.explained_variance[i] / model.total_variance));
    sum += model.explained_ratio[i];
  }
  CHECK(sum <= 1.0 + 1e-12);
  CHECK(model.explained_ratio_sum() == doctest::Approx(sum));
}

TEST_CASE("project") {
  const auto x = random_matrix(10, 6, 5);
  const auto model = fit_pca(x, 4);

  const auto at_mean = project(model, model.mean);
  for (double v : at_mean) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  std::vector<double> shifted = model.mean;
  for (std::size_t j = 0; j < model.dim(); ++j) shifted[j] += model.components(0, j);
  const auto unit = project(model, shifted);
  CHECK(std::abs(unit[0] - 1.0) < 1e-8);
  for (std::size_t i = 1; i < unit.size(); ++i) CHECK(std::abs(unit[i]) < 1e-8);

  // training scores have per-dimension variance equal to the eigenvalues
  std::vector<std::vector<double>> scores;
  for (std::size_t r = 0; r < x.rows(); ++r) scores.push_back(project(model, x.row(r)));
  for (std::size_t i = 0; i < model.k(); ++i) {
    double ss = 0.0;
    for (const auto& s : scores) ss += s[i] * s[i];
    const double var = ss / static_cast<double>(x.rows() - 1);
    CHECK(std::abs(var - model.explained_variance[i]) <= 1e-6 * model.explained_variance[i]);
  }

  const std::vector<double> wrong(5, 0.0);
  CHECK(code_of([&] { project(model, wrong); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("reconstruct") {
  const auto x = random_matrix(8, 12, 9);
  const std::size_t rank = 7;
  const auto full = fit_pca(x, rank);

  const std::vector<double> zero(rank, 0.0);
  CHECK(reconstruct(full, zero) == full.mean);

  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto back = reconstruct(full, project(full, x.row(r)));
    for (std::size_t j = 0; j < x.cols(); ++j) CHECK(std::abs(back[j] - x(r, j)) < 1e-9);
  }

  // training reconstruction error is nonincreasing in k
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= rank; ++k) {
    const auto model = fit_pca(x, k);
    double err = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto back = reconstruct(model, project(model, x.row(r)));
      for (std::size_t j = 0; j < x.cols(); ++j) err += (back[j] - x(r, j)) * (back[j] - x(r, j));
    }
    CHECK(err <= previous + 1e-9);
    previous = err;
  }

  const std::vector<double> wrong(rank + 1, 0.0);
  CHECK(code_of([&] { reconstruct(full, wrong); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("project(reconstruct(z)) = z") {
  const auto model = fit_pca(random_matrix(15, 20, 11), 6);
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> z(model.k());
    for (auto& v : z) v = rng.normal(0.0, 10.0);
    const auto back = project(model, reconstruct(model, z));
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(back[i] - z[i]) < 1e-8);
  }
}

TEST_CASE("spectrum is invariant under an orthogonal change of basis") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = random_matrix(12, 8, 200 + seed);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(oracle::to_eigen(random_matrix(8, 8, 300 + seed)));
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd rotated = oracle::to_eigen(x) * q;
    const auto a = fit_pca(x, 6);
    const auto b = fit_pca(oracle::from_eigen(rotated), 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(a.explained_variance[i] - b.explained_variance[i]) < 1e-8);
  }
}

TEST_CASE("Jacobi solver") {
  const auto x = random_matrix(25, 25, 17);
  Matrix sym(25, 25);
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t j = 0; j < 25; ++j) sym(i, j) = x(i, j) + x(j, i);
  }
  const auto eig = jacobi_eigen(sym);
  CHECK(eig.sweeps < kJacobiMaxSweeps);
  CHECK(eig.offdiag_ratio < 1e-12);
  for (std::size_t i = 1; i < eig.values.size(); ++i) CHECK(eig.values[i] <= eig.values[i - 1]);
  // V diag(lambda) V^T reproduces the input
  const Eigen::MatrixXd v = oracle::to_eigen(eig.vectors);
  const Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(eig.values.data(), 25);
  const Eigen::MatrixXd rebuilt = v * lambda.asDiagonal() * v.transpose();
  CHECK((rebuilt - oracle::to_eigen(sym)).cwiseAbs().maxCoeff() < 1e-10);

  const auto model = fit_pca(random_matrix(30, 40, 2), 10);
  CHECK(model.jacobi_offdiag_ratio < 1e-12);
}

TEST_CASE("fit_pca errors") {
  CHECK(code_of([&] { fit_pca(random_matrix(5, 10, 1), 5); }) == ErrorCode::KTooLarge);
  CHECK(code_of([&] { fit_pca(random_matrix(10, 3, 1), 4); }) == ErrorCode::KTooLarge);
  CHECK(code_of([&] { fit_pca(random_matrix(10, 3, 1), 0); }) == ErrorCode::InvalidArgument);

  Matrix line(6, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 3; ++j) line(i, j) = static_cast<double>(i * (j + 1));
  }
  try {
    fit_pca(line, 2);
    FAIL("expected DegenerateData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateData);
    CHECK(std::string(e.what()).find("rank 1") != std::string::npos);
  }

  auto bad = random_matrix(5, 3, 1);
  bad(2, 1) = NAN;
  CHECK(code_of([&] { fit_pca(bad, 2); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("15 components capture at least 97% of variance on a simulated pair") {
  const auto profiles = sim::builtin_profiles();
  sim::SessionProtocol protocol;
  protocol.seed = 3;
  const auto [fg, bg] = sim::resolve_pair("towel_vs_towel_rack", profiles);
  const auto ds = sim::simulate_pair_dataset(fg, bg, protocol);
  std::vector<preprocess::TrialWindows> windows;
  for (const auto& t : ds.trials) windows.push_back(preprocess::window_trial(t, preprocess::detect_contact(t)));
  const auto stats = preprocess::fit_normalization(windows);
  Matrix x(windows.size(), preprocess::kFeatureLength);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto f = preprocess::assemble_feature(windows[i], stats, 1);
    std::copy(f.values.begin(), f.values.end(), x.row(i).begin());
  }
  const auto model = fit_pca(x, 15);
  CHECK(model.explained_ratio_sum() >= 0.97);
  CHECK(oracle::orthonormality_residual(model.components) < 1e-8);
}
