#include "mavg/models.hpp"

#include <cmath>
#include <stdexcept>

#include "mavg/normal.hpp"

namespace mavg {

Curve Curve::flat(double level) {
  if (!(level > 0.0)) throw std::invalid_argument("Curve: level must be > 0");
  return Curve([level](double) { return level; });
}

double Curve::operator()(double t) const {
  if (!f_) throw std::logic_error("Curve: not initialized");
  const double v = f_(t);
  if (!(v > 0.0)) throw std::domain_error("Curve: values must be > 0");
  return v;
}

void BlackScholesParams::validate() const {
  if (!(s0 > 0.0)) throw std::invalid_argument("bs: s0 must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("bs: sigma must be > 0");
  if (!std::isfinite(rate)) throw std::invalid_argument("bs: rate must be finite");
}

void ClewlowStricklandParams::validate() const {
  if (!forward.valid()) throw std::invalid_argument("cs: forward curve missing");
  if (!(alpha > 0.0)) throw std::invalid_argument("cs: alpha must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("cs: sigma must be > 0");
  if (!std::isfinite(rate)) throw std::invalid_argument("cs: rate must be finite");
}

void RoughBergomiParams::validate() const {
  if (!(s0 > 0.0)) throw std::invalid_argument("rbergomi: s0 must be > 0");
  if (!(eta >= 0.0)) throw std::invalid_argument("rbergomi: eta must be >= 0");
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("rbergomi: rho must lie in [-1, 1]");
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("rbergomi: hurst must lie in (0, 1)");
  if (!xi0.valid()) throw std::invalid_argument("rbergomi: xi0 curve missing");
  if (!std::isfinite(rate)) throw std::invalid_argument("rbergomi: rate must be finite");
}

double bs_step(const BlackScholesParams& p, double s, double z, double dt) {
  if (!(s > 0.0)) throw std::domain_error("bs_step: s must be > 0");
  if (!(dt >= 0.0)) throw std::domain_error("bs_step: dt must be >= 0");
  return s * std::exp((p.rate - 0.5 * p.sigma * p.sigma) * dt +
                      p.sigma * std::sqrt(dt) * z);
}

double bs_call(double s, double k, double tau, double rate, double sigma) {
  if (!(s > 0.0)) throw std::domain_error("bs_call: s must be > 0");
  if (tau < 0.0) throw std::domain_error("bs_call: tau must be >= 0");
  if (sigma < 0.0) throw std::domain_error("bs_call: sigma must be >= 0");
  const double df = std::exp(-rate * tau);
  if (k <= 0.0) return s - k * df;
  const double sd = sigma * std::sqrt(tau);
  if (sd == 0.0) return std::max(0.0, s - k * df);
  const double d1 = (std::log(s / k) + (rate + 0.5 * sigma * sigma) * tau) / sd;
  return s * norm_cdf(d1) - k * df * norm_cdf(d1 - sd);
}

double cs_beta(const ClewlowStricklandParams& p, double t) {
  // sigma^2 (e^{-2 alpha t} - 1) / (4 alpha) written with expm1 so the
  // alpha -> 0 limit (-sigma^2 t / 2) stays accurate
  return std::log(p.forward(t)) +
         p.sigma * p.sigma * std::expm1(-2.0 * p.alpha * t) / (4.0 * p.alpha);
}

namespace {

// conditional mean and variance of ln S_{t_to} given S_{t_from} = s
void cs_conditional(const ClewlowStricklandParams& p, double s, double t_from,
                    double t_to, double& m, double& v) {
  if (!(s > 0.0)) throw std::domain_error("cs: s must be > 0");
  if (t_to < t_from) throw std::domain_error("cs: t_to must be >= t_from");
  const double d = t_to - t_from;
  m = std::exp(-p.alpha * d) * (std::log(s) - cs_beta(p, t_from)) + cs_beta(p, t_to);
  v = -p.sigma * p.sigma * std::expm1(-2.0 * p.alpha * d) / (2.0 * p.alpha);
}

}  // namespace

double cs_step(const ClewlowStricklandParams& p, double s, double z, double t_from,
               double t_to) {
  double m, v;
  cs_conditional(p, s, t_from, t_to, m, v);
  return std::exp(m + std::sqrt(v) * z);
}

double cs_call(const ClewlowStricklandParams& p, double s, double k, double t_from,
               double t_to) {
  double m, v;
  cs_conditional(p, s, t_from, t_to, m, v);
  const double df = std::exp(-p.rate * (t_to - t_from));
  if (k <= 0.0) return df * (std::exp(m + 0.5 * v) - k);
  if (v <= 0.0) return df * std::max(0.0, std::exp(m) - k);
  const double sv = std::sqrt(v);
  const double d1 = (m - std::log(k) + v) / sv;
  return df * (std::exp(m + 0.5 * v) * norm_cdf(d1) - k * norm_cdf(d1 - sv));
}

const char* model_name(const ModelParams& m) {
  switch (m.index()) {
    case 0: return "bs";
    case 1: return "cs";
    default: return "rbergomi";
  }
}

double model_rate(const ModelParams& m) {
  return std::visit([](const auto& p) { return p.rate; }, m);
}

}  // namespace mavg
