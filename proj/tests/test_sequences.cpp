#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mavg/normal.hpp"
#include "mavg/sequences.hpp"

using namespace mavg;

namespace {

// One-dimensional star discrepancy of points in [0,1).
double star_discrepancy(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max(d, std::fabs(x[i] - i / n));
    d = std::max(d, std::fabs(x[i] - (i + 1) / n));
  }
  return d;
}

// Solve norm_cdf(z) = u by bisection; independent of the rational inverse.
double bisect_inverse(double u) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("radical inverse values") {
  CHECK(seq::halton(1, 2) == 0.5);
  CHECK(seq::halton(2, 2) == 0.25);
  CHECK(seq::halton(3, 2) == 0.75);
  CHECK(seq::halton(4, 2) == 0.125);
  CHECK(seq::halton(1, 3) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(seq::halton(2, 3) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(seq::halton(5, 3) == doctest::Approx(7.0 / 9).epsilon(1e-15));
}

TEST_CASE("base-2 sequence beats iid discrepancy") {
  std::vector<double> pts(1000);
  for (int i = 0; i < 1000; ++i) pts[i] = seq::halton(i + 1, 2);
  // Expected Kolmogorov distance of 1000 iid uniforms is ~0.87/sqrt(n).
  CHECK(star_discrepancy(pts) < 0.8687 / std::sqrt(1000.0));
}

TEST_CASE("first primes") {
  auto p = seq::first_primes(6);
  REQUIRE(p.size() == 6);
  CHECK(p[0] == 2);
  CHECK(p[1] == 3);
  CHECK(p[5] == 13);
  CHECK(seq::first_primes(100).back() == 541);
}

TEST_CASE("inverse normal cdf") {
  CHECK(seq::inv_norm_cdf(0.5) == 0.0);
  CHECK(seq::inv_norm_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(seq::inv_norm_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(seq::inv_norm_cdf(1.0), std::domain_error);

  for (double u : {1e-12, 1e-9, 1e-4, 0.2, 0.31, 0.5, 0.77, 0.9999, 1 - 1e-12}) {
    CHECK(std::fabs(norm_cdf(seq::inv_norm_cdf(u)) - u) < 1e-9);
  }
  for (double u : {1e-4, 0.2, 0.31, 0.5}) {
    // Antisymmetry, away from the tails where rounding 1-u dominates.
    const double z = seq::inv_norm_cdf(u);
    CHECK(seq::inv_norm_cdf(1.0 - u) == doctest::Approx(-z).epsilon(1e-12));
  }

  // Against a bisection oracle on the cdf.
  for (double u : {0.001, 0.0421, 0.25, 0.621, 0.9, 0.99997}) {
    CHECK(seq::inv_norm_cdf(u) == doctest::Approx(bisect_inverse(u)).epsilon(1e-9));
  }
}

TEST_CASE("pseudo stream determinism and pairing") {
  auto a = seq::NormalStream::pseudo(42, 3, true);
  auto b = seq::NormalStream::pseudo(42, 3, true);
  auto c = seq::NormalStream::pseudo(43, 3, true);
  bool identical = true, all_same_seed = true;
  for (int row = 0; row < 200; ++row)
    for (int col = 0; col < 3; ++col) {
      identical &= a(row, col) == b(row, col);
      all_same_seed &= a(row, col) == c(row, col);
    }
  CHECK(identical);
  CHECK_FALSE(all_same_seed);

  // Antithetic rows come in exact (z, -z) pairs.
  for (int k = 0; k < 50; ++k)
    for (int col = 0; col < 3; ++col) CHECK(a(2 * k + 1, col) == -a(2 * k, col));

  // Sample mean of an odd function is exactly zero under pairing.
  double acc = 0.0;
  for (int row = 0; row < 4096; ++row) {
    const double z = a(row, 1);
    acc += z * z * z;
  }
  CHECK(acc == 0.0);
}

TEST_CASE("pseudo column means look standard normal") {
  auto s = seq::NormalStream::pseudo(7, 3, false);
  auto m = seq::normal_matrix(s, 100'000);
  REQUIRE(m.rows() == 100'000);
  REQUIRE(m.cols() == 3);
  for (int col = 0; col < 3; ++col) {
    CHECK(std::fabs(m.col(col).mean()) < 3.0 / std::sqrt(100'000.0));
    const double var = m.col(col).squaredNorm() / m.rows();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("halton stream columns and burn-in") {
  auto s = seq::NormalStream::halton(2, 0);
  // Row p, column j: radical inverse of p+1 in the (j+1)-th prime base.
  CHECK(s(0, 0) == 0.0);  // halton(1,2) = 0.5 maps to the exact median
  CHECK(s(1, 0) == doctest::Approx(seq::inv_norm_cdf(0.25)).epsilon(1e-15));
  CHECK(s(0, 1) == doctest::Approx(seq::inv_norm_cdf(1.0 / 3)).epsilon(1e-15));

  auto burned = seq::NormalStream::halton(2, 20);
  CHECK(burned(0, 0) == doctest::Approx(seq::inv_norm_cdf(seq::halton(21, 2))));
  CHECK(burned.dim() == 2);

  // Determinism across identically constructed streams.
  auto again = seq::NormalStream::halton(2, 20);
  for (int row = 0; row < 64; ++row)
    for (int col = 0; col < 2; ++col) CHECK(again(row, col) == burned(row, col));
}

TEST_CASE("scrambled high-dimension halton columns stay uniform") {
  // Base 97 (the 25th prime) uses a digit permutation; the transformed
  // column must still fill (0,1) evenly.
  auto s = seq::NormalStream::halton(25, 20);
  std::vector<double> u(2000);
  for (int i = 0; i < 2000; ++i) u[i] = norm_cdf(s(i, 24));
  CHECK(star_discrepancy(u) < 0.8687 / std::sqrt(2000.0));
}

TEST_CASE("chunked matrix generation matches one shot") {
  auto s = seq::NormalStream::pseudo(11, 4, true);
  auto whole = seq::normal_matrix(s, 1000);
  auto head = seq::normal_matrix(s, 0, 300);
  auto tail = seq::normal_matrix(s, 300, 700);
  CHECK((whole.topRows(300) - head).cwiseAbs().maxCoeff() == 0.0);
  CHECK((whole.bottomRows(700) - tail).cwiseAbs().maxCoeff() == 0.0);
}
