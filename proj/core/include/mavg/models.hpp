#pragma once

#include <functional>
#include <variant>

namespace mavg {

// Deterministic positive curve t -> value (forward curve, variance curve).
class Curve {
 public:
  Curve() = default;
  explicit Curve(std::function<double(double)> f) : f_(std::move(f)) {}
  static Curve flat(double level);
  double operator()(double t) const;
  bool valid() const { return static_cast<bool>(f_); }

 private:
  std::function<double(double)> f_;
};

struct BlackScholesParams {
  double s0 = 100.0;
  double rate = 0.05;
  double sigma = 0.3;
  void validate() const;
};

// Clewlow-Strickland one-factor forward-curve model:
//   ln S_t = Y_t + beta(t),  dY = -alpha Y dt + sigma dW,  Y_0 = 0,
//   beta(t) = ln F(0,t) + sigma^2 (exp(-2 alpha t) - 1) / (4 alpha),
// which makes E[S_t] = F(0,t). `rate` discounts payoffs only.
struct ClewlowStricklandParams {
  Curve forward;  // F(0, .)
  double rate = 0.05;
  double alpha = 5.0;
  double sigma = 0.5;
  void validate() const;
};

// Rough Bergomi: V_t = xi0(t) exp(eta W^H_t - eta^2 t^{2H} / 2), W^H the
// Riemann-Liouville fractional Brownian motion whose driver is rho-correlated
// with the spot Brownian motion; the spot follows a log-Euler scheme on the
// date grid.
struct RoughBergomiParams {
  double s0 = 100.0;
  double rate = 0.05;
  double eta = 1.9;
  double rho = -0.9;
  double hurst = 0.07;  // default per the reference parameter set
  Curve xi0;            // forward variance curve, e.g. Curve::flat(0.09)
  void validate() const;
};

using ModelParams =
    std::variant<BlackScholesParams, ClewlowStricklandParams, RoughBergomiParams>;

// Exact lognormal step s exp((r - sigma^2/2) dt + sigma sqrt(dt) z).
double bs_step(const BlackScholesParams& p, double s, double z, double dt);

// Black-Scholes call; tau = 0 or sigma = 0 degenerate to the discounted
// deterministic payoff, k <= 0 to a forward position.
double bs_call(double s, double k, double tau, double rate, double sigma);

double cs_beta(const ClewlowStricklandParams& p, double t);

// Exact conditional step: ln S_{t_to} | S_{t_from} = s is Gaussian with mean
// exp(-alpha d)(ln s - beta(t_from)) + beta(t_to) and variance
// sigma^2 (1 - exp(-2 alpha d)) / (2 alpha), d = t_to - t_from.
double cs_step(const ClewlowStricklandParams& p, double s, double z, double t_from,
               double t_to);

// Discounted call on S_{t_to} given S_{t_from} = s (lognormal closed form).
double cs_call(const ClewlowStricklandParams& p, double s, double k, double t_from,
               double t_to);

const char* model_name(const ModelParams& m);
double model_rate(const ModelParams& m);

}  // namespace mavg
