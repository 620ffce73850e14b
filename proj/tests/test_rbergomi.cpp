#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mavg/rbergomi.hpp"
#include "mavg/sequences.hpp"
#include "oracles/tanh_sinh.hpp"

using namespace mavg;

TEST_CASE("fractional kernel integral") {
  // H = 1/2 kills both exponents: G == 1. At x = 1 the integrand is
  // (1-s)^{2H-1} with integral 1/(2H).
  CHECK(rb::fbm_kernel_integral(1.7, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  for (double h : {0.07, 0.3, 0.8})
    CHECK(rb::fbm_kernel_integral(1.0, h) == doctest::Approx(1.0 / (2 * h)).epsilon(1e-10));

  for (double h : {0.07, 0.1, 0.3, 0.45, 0.8}) {
    for (double x : {1.0001, 1.02, 1.5, 2.0, 10.0, 250.0}) {
      const double ref = oracle::tanh_sinh(
          [&](double s) {
            return std::pow(1.0 - s, h - 0.5) * std::pow(x - s, h - 0.5);
          },
          0.0, 1.0);
      // At x -> 1 both factors pile up on the s = 1 endpoint, where the
      // reference rule truncates at the last representable node; elsewhere
      // both sides agree to ~1e-9.
      const double tol = x < 1.01 ? 5e-7 : 1e-8;
      CHECK(rb::fbm_kernel_integral(x, h) == doctest::Approx(ref).epsilon(tol));
    }
  }
}

TEST_CASE("covariance entries match the defining formulas") {
  const int n_steps = 20;
  const double tt = 0.2, hurst = 0.07, rho = -0.9;
  const auto cov = rb::make_covariance(n_steps, tt, hurst, rho);
  const double dt = tt / n_steps;
  auto t = [&](int n) { return dt * n; };

  REQUIRE(cov.sigma.rows() == 2 * n_steps);
  CHECK((cov.sigma - cov.sigma.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  for (int m = 1; m <= n_steps; ++m) {
    CHECK(cov.sigma(2 * m - 2, 2 * m - 2) == doctest::Approx(dt).epsilon(1e-14));
    CHECK(cov.sigma(2 * m - 1, 2 * m - 1) ==
          doctest::Approx(std::pow(t(m), 2 * hurst)).epsilon(1e-13));
    for (int n = m; n <= n_steps; ++n) {
      // Independent spot increments.
      if (n > m) CHECK(cov.sigma(2 * m - 2, 2 * n - 2) == 0.0);
      // fBm block via the kernel integral.
      const double wc = 2 * hurst * std::pow(t(m), 2 * hurst) *
                        rb::fbm_kernel_integral(t(n) / t(m), hurst);
      CHECK(cov.sigma(2 * m - 1, 2 * n - 1) == doctest::Approx(wc).epsilon(1e-12));
      // Spot increment against a later (or same-date) fBm value.
      const double xc = rho * std::sqrt(2 * hurst) / (hurst + 0.5) *
                        (std::pow(t(n) - t(m - 1), hurst + 0.5) -
                         std::pow(t(n) - t(m), hurst + 0.5));
      CHECK(cov.sigma(2 * m - 2, 2 * n - 1) == doctest::Approx(xc).epsilon(1e-12));
      // fBm value before a later increment is uncorrelated with it.
      if (n > m) CHECK(cov.sigma(2 * m - 1, 2 * n - 2) == 0.0);
    }
  }

  // Same-date cross covariance reduces to the advertised dt^{H+1/2} form.
  CHECK(cov.sigma(0, 1) ==
        doctest::Approx(2 * rho * std::sqrt(2 * hurst) / (2 * hurst + 1) *
                        std::pow(dt, hurst + 0.5))
            .epsilon(1e-13));
}

TEST_CASE("cholesky factor reconstructs sigma") {
  for (double hurst : {0.07, 0.5}) {
    const auto cov = rb::make_covariance(50, 0.2, hurst, -0.9);
    const Eigen::MatrixXd rebuilt = cov.chol * cov.chol.transpose();
    CHECK((rebuilt - cov.sigma).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(cov.chol.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);
  }
}

TEST_CASE("H = 1/2 collapses the fBm block to Brownian motion") {
  const int n_steps = 25;
  const auto cov = rb::make_covariance(n_steps, 0.2, 0.5, -0.3);
  const double dt = 0.2 / n_steps;
  for (int m = 1; m <= n_steps; ++m)
    for (int n = 1; n <= n_steps; ++n) {
      const double expect = dt * std::min(m, n);
      CHECK(std::fabs(cov.sigma(2 * m - 1, 2 * n - 1) - expect) < 1e-12);
    }
}

TEST_CASE("covariance cache hands back the same object") {
  const auto& a = rb::covariance(10, 0.2, 0.07, -0.9);
  const auto& b = rb::covariance(10, 0.2, 0.07, -0.9);
  CHECK(&a == &b);
  const auto& c = rb::covariance(10, 0.2, 0.08, -0.9);
  CHECK(&a != &c);
}

TEST_CASE("path construction basics") {
  RoughBergomiParams par;
  par.s0 = 100.0;
  par.rate = 0.05;
  par.eta = 1.9;
  par.rho = -0.9;
  par.hurst = 0.07;
  par.xi0 = Curve::flat(0.09);

  const int n_steps = 10;
  const auto cov = rb::make_covariance(n_steps, 0.2, par.hurst, par.rho);
  auto stream = seq::NormalStream::pseudo(5, 2 * n_steps, true);
  auto z = seq::normal_matrix(stream, 2000);

  Eigen::MatrixXd variances;
  auto spots = rb::build_spot_paths(par, cov, z, &variances);
  REQUIRE(spots.rows() == 2000);
  REQUIRE(spots.cols() == n_steps + 1);
  REQUIRE(variances.cols() == n_steps + 1);
  CHECK((spots.col(0).array() == 100.0).all());
  CHECK((variances.col(0).array() == 0.09).all());
  CHECK((spots.array() > 0.0).all());
  CHECK((variances.array() > 0.0).all());

  // Deterministic replay.
  auto spots2 = rb::build_spot_paths(par, cov, z);
  CHECK((spots - spots2).cwiseAbs().maxCoeff() == 0.0);

  // eta -> 0 freezes the variance at the curve level.
  RoughBergomiParams flat = par;
  flat.eta = 1e-14;
  Eigen::MatrixXd v2;
  rb::build_spot_paths(flat, cov, z, &v2);
  CHECK((v2.array() - 0.09).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("terminal fBm variance and discounted spot mean over Monte Carlo") {
  RoughBergomiParams par;
  par.s0 = 100.0;
  par.rate = 0.05;
  par.eta = 1.9;
  par.rho = -0.9;
  par.hurst = 0.07;
  par.xi0 = Curve::flat(0.09);

  const int n_steps = 50;
  const double tt = 0.2;
  const auto& cov = rb::covariance(n_steps, tt, par.hurst, par.rho);
  auto stream = seq::NormalStream::pseudo(17, 2 * n_steps, true);
  const long long n_paths = 100'000;
  auto z = seq::normal_matrix(stream, n_paths);

  // Realized terminal fBm value per path.
  Eigen::VectorXd wt = z * cov.chol.row(2 * n_steps - 1).transpose();
  const double var = wt.squaredNorm() / n_paths;
  const double target = std::pow(tt, 2 * par.hurst);
  // Var of z^2-type average: se = sqrt(2/n) * target for Gaussians.
  const double se = std::sqrt(2.0 / n_paths) * target;
  CHECK(std::fabs(var - target) <= 3.0 * se);

  auto spots = rb::build_spot_paths(par, cov, z);
  Eigen::VectorXd disc = std::exp(-par.rate * tt) * spots.col(n_steps);
  // CI over antithetic pair means.
  const long long pairs = n_paths / 2;
  Eigen::VectorXd pm(pairs);
  for (long long k = 0; k < pairs; ++k) pm(k) = 0.5 * (disc(2 * k) + disc(2 * k + 1));
  const double mean = pm.mean();
  const double sd = std::sqrt((pm.array() - mean).square().sum() / (pairs - 1));
  CHECK(std::fabs(mean - par.s0) <= 3.0 * sd / std::sqrt(double(pairs)));
}

TEST_CASE("conditioning features") {
  const int n_steps = 12;
  const auto& cov = rb::covariance(n_steps, 0.2, 0.07, -0.9);
  auto stream = seq::NormalStream::pseudo(3, 2 * n_steps, false);
  auto z = seq::normal_matrix(stream, 40);

  const int n = 5, depth = 3;
  auto feats = rb::conditioning_features(cov, z, n, depth);
  REQUIRE(feats.rows() == 40);
  REQUIRE(feats.cols() == std::min(n_steps - n, depth) + 1);

  // First column is the realized fBm value at t_n: the chol row is lower
  // triangular, so the 2n-prefix product is the full product.
  Eigen::VectorXd wt = z.leftCols(2 * n) * cov.chol.row(2 * n - 1).head(2 * n).transpose();
  CHECK((feats.col(0) - wt).cwiseAbs().maxCoeff() < 1e-15);

  // J = 0 keeps only the realized value.
  CHECK(rb::conditioning_features(cov, z, n, 0).cols() == 1);

  // Near maturity the horizon truncates the feature count.
  CHECK(rb::conditioning_features(cov, z, 11, 7).cols() == 2);
}

TEST_CASE("features equal conditional expectations: Monte Carlo completion") {
  const int n_steps = 8;
  const auto& cov = rb::covariance(n_steps, 0.2, 0.07, -0.9);
  const int n = 3, h = 6;

  auto prefix_stream = seq::NormalStream::pseudo(21, 2 * n_steps, false);
  Eigen::VectorXd z = seq::normal_matrix(prefix_stream, 1).row(0).transpose();

  auto feats = rb::conditioning_features(cov, z.transpose().eval(), n, n_steps);
  const double predicted = feats(0, h - n);

  // Complete the tail Gaussians afresh and average the realized fBm value.
  const int tail = 2 * n_steps - 2 * n;
  auto tail_stream = seq::NormalStream::pseudo(99, tail, false);
  const long long reps = 20'000;
  auto zt = seq::normal_matrix(tail_stream, reps);
  Eigen::VectorXd w(reps);
  const Eigen::RowVectorXd row = cov.chol.row(2 * h - 1);
  for (long long i = 0; i < reps; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 2 * n; ++j) acc += row(j) * z(j);
    for (int j = 0; j < tail; ++j) acc += row(2 * n + j) * zt(i, j);
    w(i) = acc;
  }
  const double mean = w.mean();
  const double sd = std::sqrt((w.array() - mean).square().sum() / (reps - 1));
  CHECK(std::fabs(mean - predicted) <= 3.0 * sd / std::sqrt(double(reps)));
}

TEST_CASE("features recoverable from the realized process prefix") {
  // E_{h,n} must be measurable in the realized (dW, W~) values: invert the
  // leading triangular block to recover the Gaussians, then apply the rows.
  const int n_steps = 10;
  const auto& cov = rb::covariance(n_steps, 0.2, 0.07, -0.9);
  auto stream = seq::NormalStream::pseudo(7, 2 * n_steps, false);
  auto z = seq::normal_matrix(stream, 5);

  const int n = 4;
  auto feats = rb::conditioning_features(cov, z, n, n_steps);
  Eigen::MatrixXd r = z * cov.chol.transpose();  // realized (dW, W~) vector
  for (int p = 0; p < 5; ++p) {
    Eigen::VectorXd rp = r.row(p).head(2 * n).transpose();
    Eigen::VectorXd zrec = cov.chol.topLeftCorner(2 * n, 2 * n)
                               .triangularView<Eigen::Lower>()
                               .solve(rp);
    for (int h = n; h <= n_steps; ++h) {
      const double e = cov.chol.row(2 * h - 1).head(2 * n) * zrec;
      CHECK(e == doctest::Approx(feats(p, h - n)).epsilon(1e-8));
    }
  }
}

TEST_CASE("increment drift is the conditional mean of the next spot increment") {
  const int n_steps = 8;
  const auto& cov = rb::covariance(n_steps, 0.2, 0.07, -0.9);
  auto stream = seq::NormalStream::pseudo(31, 2 * n_steps, false);
  auto z = seq::normal_matrix(stream, 6);

  CHECK(rb::increment_drift(cov, z, 0).cwiseAbs().maxCoeff() == 0.0);

  const int n = 3;
  auto drift = rb::increment_drift(cov, z, n);
  Eigen::VectorXd direct = z.leftCols(2 * n) * cov.chol.row(2 * n).head(2 * n).transpose();
  CHECK((drift - direct).cwiseAbs().maxCoeff() < 1e-15);
}
