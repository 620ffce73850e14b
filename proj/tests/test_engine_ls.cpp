#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mavg/engine_ls.hpp"
#include "mavg/models.hpp"
#include "mavg/normal.hpp"
#include "mavg/parallel.hpp"
#include "mavg/quadrature.hpp"

using namespace mavg;

namespace {

const BlackScholesParams kBs{100.0, 0.05, 0.3};

ClewlowStricklandParams cs_params() {
  ClewlowStricklandParams p;
  p.forward = Curve::flat(100.0);
  p.rate = 0.05;
  p.alpha = 5.0;
  p.sigma = 0.5;
  return p;
}

// Exact M = 2 Black-Scholes Bermudan: one backup of the unit-spot scalar
// recursion per date (see the quadrature engine test for the derivation).
double chain_map(double c, double rate, double sigma, double dt) {
  const double a = sigma * std::sqrt(dt);
  const double mu = (rate - 0.5 * sigma * sigma) * dt;
  const double d = (std::log(1.0 / (1.0 - 2.0 * c)) - mu) / a;
  const double eg = c * std::exp(rate * dt) * norm_cdf(d - a) +
                    0.5 * (std::exp(rate * dt) * norm_cdf(a - d) - norm_cdf(-d));
  return std::exp(-rate * dt) * eg;
}

double exact_window2_price(const OptionSpec& opt, const BlackScholesParams& p) {
  const double dt = opt.dt();
  double c = 0.5 * bs_call(1.0, 1.0, dt, p.rate, p.sigma);
  for (int n = opt.steps - 2; n >= opt.window; --n) c = chain_map(c, p.rate, p.sigma, dt);
  return p.s0 * chain_map(c, p.rate, p.sigma, dt);
}

}  // namespace

TEST_CASE("regression basis enumerates graded monomials, constant first") {
  using detail::monomial_exponents;
  const auto b22 = monomial_exponents(2, 2);
  const std::vector<std::vector<int>> want22 = {{0, 0}, {1, 0}, {0, 1},
                                                {2, 0}, {1, 1}, {0, 2}};
  CHECK(b22 == want22);

  const auto b13 = monomial_exponents(1, 3);
  const std::vector<std::vector<int>> want13 = {{0}, {1}, {2}, {3}};
  CHECK(b13 == want13);

  const auto b31 = monomial_exponents(3, 1);
  const std::vector<std::vector<int>> want31 = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(b31 == want31);

  CHECK(monomial_exponents(3, 3).size() == 20);  // C(6, 3)
}

TEST_CASE("single exercise date reduces to a european at the window end") {
  const OptionSpec opt{0.1, 2, 2};
  LsConfig cfg;
  cfg.n_paths = 200'000;
  cfg.degree = 2;
  cfg.seed = 4;

  SUBCASE("black-scholes against the closed form, degree-independent") {
    // No regression happens with a single exercise date, so the degree must
    // not move the estimate at all and the mean is an unbiased draw around
    // S_0 Call(1, 1, dt) / 2.
    const PriceResult r = price_ls(opt, kBs, cfg);
    const double exact = 0.5 * kBs.s0 * bs_call(1.0, 1.0, opt.dt(), kBs.rate, kBs.sigma);
    CAPTURE(r.price);
    CHECK(std::fabs(r.price - exact) <= 4.0 * r.ci_radius);
    CHECK(r.ci_radius > 0.0);
    CHECK(r.warnings.empty());

    LsConfig deg1 = cfg;
    deg1.degree = 1;
    LsConfig deg3 = cfg;
    deg3.degree = 3;
    CHECK(price_ls(opt, kBs, deg1).price == r.price);
    CHECK(price_ls(opt, kBs, deg3).price == r.price);
  }

  SUBCASE("clewlow-strickland against direct quadrature") {
    const ClewlowStricklandParams cp = cs_params();
    const PriceResult r = price_ls(opt, cp, cfg);
    const double t1 = opt.t(1);
    const double ref = 0.5 * std::exp(-cp.rate * t1) *
                       quad::gh_expect(
                           [&](double z) {
                             const double s1 = cs_step(cp, cp.forward(0.0), z, 0.0, t1);
                             return cs_call(cp, s1, s1, t1, opt.maturity);
                           },
                           0.0, 1.0, 64);
    CAPTURE(r.price);
    CHECK(std::fabs(r.price - ref) <= 4.0 * r.ci_radius);
  }

  SUBCASE("result metadata") {
    cfg.n_paths = 1'001;  // odd requests round up to a full pair
    const PriceResult r = price_ls(opt, kBs, cfg);
    CHECK(r.engine == "ls");
    CHECK(r.model == "bs");
    CHECK(r.n_paths == 1'002);
    REQUIRE(r.degree.has_value());
    CHECK(*r.degree == 2);
    REQUIRE(r.seed.has_value());
    CHECK(*r.seed == 4);
    CHECK(!r.quad_order.has_value());
    CHECK(!r.feature_window.has_value());
  }
}

TEST_CASE("window-2 estimate matches the exact chain value") {
  // The true continuation is linear in the spot, so the quadratic basis
  // contains it and the cashflow regression is essentially unbiased here.
  const OptionSpec opt{0.2, 10, 2};
  LsConfig cfg;
  cfg.n_paths = 200'000;
  cfg.degree = 2;
  cfg.seed = 1;
  const PriceResult r = price_ls(opt, kBs, cfg);
  const double exact = exact_window2_price(opt, kBs);
  CAPTURE(r.price);
  CAPTURE(exact);
  CHECK(std::fabs(r.price - exact) <= std::max(0.02, 3.0 * r.ci_radius));
  CHECK(r.ci_radius < 0.012);
  CHECK(r.warnings.empty());
}

TEST_CASE("dense-grid window-2 price lands in the reference band") {
  const OptionSpec opt{0.2, 50, 2};
  LsConfig cfg;
  cfg.n_paths = 10'000;
  cfg.degree = 2;
  cfg.seed = 1;
  const PriceResult r = price_ls(opt, kBs, cfg);
  CAPTURE(r.price);
  CHECK(std::fabs(r.price - 1.89) < 0.05);
  CHECK(r.ci_radius > 0.0);
  CHECK(r.ci_radius < 0.03);
}

TEST_CASE("antithetic pairing reduces the variance") {
  const OptionSpec opt{0.1, 2, 2};
  LsConfig cfg;
  cfg.n_paths = 100'000;
  cfg.degree = 2;
  cfg.seed = 4;
  const PriceResult anti = price_ls(opt, kBs, cfg);
  cfg.antithetic = false;
  const PriceResult plain = price_ls(opt, kBs, cfg);
  const double ratio = (anti.ci_radius * anti.ci_radius) /
                       (plain.ci_radius * plain.ci_radius);
  CAPTURE(ratio);  // measured ~0.55 for this payoff
  CHECK(ratio < 0.75);
  CHECK(ratio > 0.25);
  CHECK(anti.n_paths == plain.n_paths);
}

TEST_CASE("estimates are identical across thread counts and reruns") {
  const OptionSpec opt{0.2, 8, 3};
  LsConfig cfg;
  cfg.n_paths = 20'000;
  cfg.degree = 2;
  cfg.seed = 7;

  set_thread_count(1);
  const PriceResult r1 = price_ls(opt, kBs, cfg);
  set_thread_count(4);
  const PriceResult r4 = price_ls(opt, kBs, cfg);
  const PriceResult r4b = price_ls(opt, kBs, cfg);
  set_thread_count(0);

  CHECK(r1.price == r4.price);
  CHECK(r1.ci_radius == r4.ci_radius);
  CHECK(r4.price == r4b.price);
}

TEST_CASE("rough bergomi paths price and reproduce deterministically") {
  RoughBergomiParams rb;
  rb.s0 = 100.0;
  rb.rate = 0.05;
  rb.eta = 1.9;
  rb.rho = -0.9;
  rb.hurst = 0.07;
  rb.xi0 = Curve::flat(0.09);

  const OptionSpec opt{0.2, 6, 2};
  LsConfig cfg;
  cfg.n_paths = 20'000;
  cfg.degree = 2;
  cfg.rb_memory = 2;
  cfg.seed = 5;
  const PriceResult r1 = price_ls(opt, rb, cfg);
  const PriceResult r2 = price_ls(opt, rb, cfg);
  CHECK(r1.price > 0.0);
  CHECK(r1.price < 30.0);
  CHECK(r1.price == r2.price);
  CHECK(r1.model == "rbergomi");
  REQUIRE(r1.feature_window.has_value());
  CHECK(*r1.feature_window == 2);
}

TEST_CASE("path budget must cover the regression basis") {
  // M = 5 gives a 4-dimensional state, 15 quadratic monomials, so fewer than
  // 150 paths must be rejected.
  const OptionSpec opt{0.2, 12, 5};
  LsConfig cfg;
  cfg.n_paths = 100;
  cfg.degree = 2;
  CHECK_THROWS_AS(price_ls(opt, kBs, cfg), std::invalid_argument);
  cfg.n_paths = 200;
  CHECK_NOTHROW(price_ls(opt, kBs, cfg));
}

TEST_CASE("configuration bounds are enforced") {
  const OptionSpec opt{0.2, 8, 2};
  auto expect_throw = [&](auto mutate) {
    LsConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(price_ls(opt, kBs, cfg), std::invalid_argument);
  };
  expect_throw([](LsConfig& c) { c.n_paths = 1; });
  expect_throw([](LsConfig& c) { c.degree = 0; });
  expect_throw([](LsConfig& c) { c.rb_memory = -1; });
}
