#include "nsp/minimax_fit.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace nsp;

TEST_CASE("two-point constant fit sits at the midpoint") {
  Vector t(2);
  t << 0.0, 1.0;
  const Matrix r = Matrix::Ones(2, 1);
  const auto sol = chebyshev_fit(t, r);
  CHECK(sol.beta[0] == doctest::Approx(0.5));
  CHECK(sol.objective == doctest::Approx(0.5));
}

TEST_CASE("zero target gives zero coefficients") {
  const auto sol = chebyshev_fit(Vector::Zero(5), Matrix::Ones(5, 2));
  CHECK(sol.beta.isZero());
  CHECK(sol.objective == 0.0);
}

TEST_CASE("Chebyshev fit matches vertex enumeration") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<int> width(1, 2);
  for (int rep = 0; rep < 300; ++rep) {
    const Index n = size(rng);
    const Index p = width(rng);
    const Vector t = oracle::gaussian(n, rng);
    const Matrix r = Matrix(oracle::gaussian(n * p, rng).reshaped(n, p));
    const auto sol = chebyshev_fit(t, r);
    const double achieved = oracle::sup_residual(t, r, sol.beta);
    const double exact = oracle::chebyshev_bruteforce(t, r);
    CHECK(achieved == doctest::Approx(exact).epsilon(1e-9).scale(1.0));
    CHECK(sol.objective == doctest::Approx(achieved).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("badly scaled rows") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector t = oracle::gaussian(7, rng) * 1e4;
    Matrix r(7, 2);
    r.col(0) = oracle::gaussian(7, rng) * 1e-3;
    r.col(1) = oracle::gaussian(7, rng) * 1e3;
    const auto sol = chebyshev_fit(t, r);
    const double exact = oracle::chebyshev_bruteforce(t, r);
    CHECK(oracle::sup_residual(t, r, sol.beta) == doctest::Approx(exact).epsilon(1e-8));
  }
}

TEST_CASE("degenerate rows") {
  // Two identical columns: coefficients are not unique but the optimum is.
  std::mt19937_64 rng(23);
  const Vector t = oracle::gaussian(6, rng);
  Matrix r(6, 2);
  r.col(0) = oracle::gaussian(6, rng);
  r.col(1) = r.col(0);
  const auto sol = chebyshev_fit(t, r);
  const Matrix single = r.leftCols(1);
  CHECK(oracle::sup_residual(t, r, sol.beta) ==
        doctest::Approx(oracle::chebyshev_bruteforce(t, single)).epsilon(1e-9));
  // A zero column leaves its coefficient free.
  Matrix z = Matrix::Zero(6, 2);
  z.col(1) = Vector::Ones(6);
  const auto zsol = chebyshev_fit(t, z);
  CHECK(oracle::sup_residual(t, z, zsol.beta) == doctest::Approx(0.5 * (t.maxCoeff() - t.minCoeff())));
}

TEST_CASE("fit_minimax on exactly linear data") {
  const Index n = 37;
  Matrix x(n, 2);
  Vector y(n);
  for (Index t = 0; t < n; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = double(t + 1) / n;
    y[t] = 2.0 - 3.0 * x(t, 1);
  }
  const auto fit = fit_minimax(y, x);
  CHECK(fit.deviation == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(fit.beta[0] == doctest::Approx(2.0));
  CHECK(fit.beta[1] == doctest::Approx(-3.0));
}

TEST_CASE("fit_minimax equals brute force over the dyadic rows") {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n = 3 + rep % 6;
    const Vector y = oracle::gaussian(n, rng);
    const Matrix x = Matrix::Ones(n, 1);
    const auto fit = fit_minimax(y, x);
    Matrix block(n, 2);
    block << y, x;
    const auto sums = family_scaled_sums(block, FamilyKind::dyadic);
    const double exact = oracle::chebyshev_bruteforce(sums.values.col(0), sums.values.rightCols(1));
    CHECK(fit.deviation == doctest::Approx(exact).epsilon(1e-9).scale(1.0));
    CHECK(fit.binding_interval.end <= n);
  }
}

TEST_CASE("all-intervals family is at least the dyadic deviation") {
  std::mt19937_64 rng(25);
  const Vector y = oracle::gaussian(20, rng);
  const Matrix x = Matrix::Ones(20, 1);
  CHECK(fit_minimax(y, x, FamilyKind::all).deviation >= fit_minimax(y, x, FamilyKind::dyadic).deviation - 1e-12);
}

TEST_CASE("unit weights reproduce the unweighted fit") {
  std::mt19937_64 rng(26);
  const Vector y = oracle::gaussian(16, rng);
  Matrix x(16, 2);
  x.col(0).setOnes();
  x.col(1) = Vector::LinSpaced(16, 0.0, 1.0);
  const Index K = IntervalFamily(FamilyKind::dyadic, {1, 16}).size();
  const auto plain = fit_minimax(y, x);
  const auto weighted = fit_minimax_weighted(y, x, FamilyKind::dyadic, Vector::Ones(K));
  CHECK(weighted.deviation == doctest::Approx(plain.deviation).epsilon(1e-10));
  const auto halved = fit_minimax_weighted(y, x, FamilyKind::dyadic, Vector::Constant(K, 2.0));
  CHECK(halved.deviation == doctest::Approx(plain.deviation / 2).epsilon(1e-10));
  CHECK_THROWS_AS(fit_minimax_weighted(y, x, FamilyKind::dyadic, Vector::Ones(K - 1)), std::invalid_argument);
  CHECK_THROWS_AS(fit_minimax_weighted(y, x, FamilyKind::dyadic, Vector::Zero(K)), std::invalid_argument);
}

TEST_CASE("residual norm tie rule") {
  Vector t(3);
  t << 1.0, -1.0, 0.5;
  const std::vector<Interval> members{{2, 2}, {1, 1}, {3, 3}};
  const auto norm = residual_sup_norm(t, Matrix::Zero(3, 1), Vector::Zero(1), members);
  CHECK(norm.value == 1.0);
  CHECK(norm.row == 1);
}
