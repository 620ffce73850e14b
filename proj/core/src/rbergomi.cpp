#include "mavg/rbergomi.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

#include "mavg/parallel.hpp"

namespace mavg::rb {

namespace {

struct GlRule {
  Eigen::VectorXd nodes;    // on [0, 1]
  Eigen::VectorXd weights;  // sum to 1
};

// Golub-Welsch Gauss-Legendre, shifted to [0, 1].
GlRule make_gl_rule(int order) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss-legendre: eigensolver failed");
  GlRule r;
  r.nodes = (es.eigenvalues().array() + 1.0) / 2.0;
  r.weights = es.eigenvectors().row(0).array().square();
  return r;
}

const GlRule& gl200() {
  static const GlRule rule = make_gl_rule(200);
  return rule;
}

}  // namespace

double fbm_kernel_integral(double x, double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("fbm_kernel_integral: hurst must be in (0, 1)");
  if (!(x >= 1.0)) throw std::invalid_argument("fbm_kernel_integral: x must be >= 1");
  if (x == 1.0) return 0.5 / hurst;
  const GlRule& rule = gl200();
  const double gamma = hurst + 0.5;
  const double expo = hurst - 0.5;
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights(i) * std::pow(x - 1.0 + std::pow(1.0 - rule.nodes(i), 1.0 / gamma), expo);
  return acc / gamma;
}

Covariance make_covariance(int steps, double maturity, double hurst, double rho) {
  if (steps < 1) throw std::invalid_argument("make_covariance: steps must be >= 1");
  if (!(maturity > 0.0)) throw std::invalid_argument("make_covariance: maturity must be > 0");
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("make_covariance: hurst must be in (0, 1)");
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("make_covariance: rho must be in [-1, 1]");

  Covariance cov;
  cov.steps = steps;
  cov.maturity = maturity;
  cov.hurst = hurst;
  cov.rho = rho;

  const int size = 2 * steps;
  const double dt = maturity / steps;
  const double gamma = hurst + 0.5;
  const double cross_coef = rho * std::sqrt(2.0 * hurst) / gamma;
  Eigen::VectorXd t(steps + 1);
  for (int n = 0; n <= steps; ++n) t(n) = dt * n;

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(size, size);
  for (int n = 1; n <= steps; ++n) {
    const int aw = 2 * (n - 1);  // dW_n
    const int vo = 2 * n - 1;    // Wt_{t_n}
    sigma(aw, aw) = dt;
    sigma(vo, vo) = std::pow(t(n), 2.0 * hurst);
    for (int m = 1; m < n; ++m)
      sigma(2 * m - 1, vo) = sigma(vo, 2 * m - 1) =
          2.0 * hurst * std::pow(t(m), 2.0 * hurst) * fbm_kernel_integral(t(n) / t(m), hurst);
    for (int m = 1; m <= n; ++m)
      sigma(2 * (m - 1), vo) = sigma(vo, 2 * (m - 1)) =
          cross_coef *
          (std::pow(t(n) - t(m - 1), gamma) - std::pow(t(n) - t(m), gamma));
  }
  cov.sigma = sigma;

  const double mean_diag = sigma.diagonal().mean();
  for (double jitter : {0.0, 1e-14, 1e-12, 1e-10}) {
    Eigen::MatrixXd work = sigma;
    work.diagonal().array() += jitter * mean_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      cov.chol = llt.matrixL();
      return cov;
    }
  }
  throw std::runtime_error("make_covariance: covariance is not positive definite");
}

const Covariance& covariance(int steps, double maturity, double hurst, double rho) {
  using Key = std::tuple<int, double, double, double>;
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<Covariance>> cache;
  const Key key{steps, maturity, hurst, rho};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto cov = std::make_unique<Covariance>(make_covariance(steps, maturity, hurst, rho));
    it = cache.emplace(key, std::move(cov)).first;
  }
  return *it->second;
}

Eigen::MatrixXd build_spot_paths(const RoughBergomiParams& par, const Covariance& cov,
                                 const Eigen::Ref<const Eigen::MatrixXd>& z,
                                 Eigen::MatrixXd* variances_out) {
  par.validate();
  if (par.hurst != cov.hurst || par.rho != cov.rho)
    throw std::invalid_argument("build_spot_paths: params disagree with the covariance");
  if (z.cols() % 2 != 0) throw std::invalid_argument("build_spot_paths: z needs column pairs");
  const int n = static_cast<int>(z.cols()) / 2;
  if (n < 1 || n > cov.steps)
    throw std::invalid_argument("build_spot_paths: date count out of range");

  const Eigen::Index paths = z.rows();
  const double dt = cov.maturity / cov.steps;
  const double two_h = 2.0 * cov.hurst;
  const auto lower = cov.chol.topLeftCorner(2 * n, 2 * n);

  // v depends on t_k only through xi0 and the drift correction
  Eigen::VectorXd xi(n + 1), drift(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double tk = dt * k;
    xi(k) = par.xi0(tk);
    drift(k) = -0.5 * par.eta * par.eta * std::pow(tk, two_h);
  }

  Eigen::MatrixXd out(paths, n + 1);
  if (variances_out) variances_out->resize(paths, n + 1);
  parallel_for_blocks(static_cast<std::size_t>(paths), 256, [&](std::size_t lo, std::size_t hi) {
    const Eigen::Index i0 = static_cast<Eigen::Index>(lo);
    const Eigen::Index nb = static_cast<Eigen::Index>(hi - lo);
    const Eigen::MatrixXd corr = z.middleRows(i0, nb) * lower.transpose();
    for (Eigen::Index p = 0; p < nb; ++p) {
      double log_s = std::log(par.s0);
      out(i0 + p, 0) = par.s0;
      for (int k = 0; k <= n; ++k) {
        const double wt = k == 0 ? 0.0 : corr(p, 2 * k - 1);
        const double v = xi(k) * std::exp(par.eta * wt + drift(k));
        if (variances_out) (*variances_out)(i0 + p, k) = v;
        if (k == n) break;
        log_s += (par.rate - 0.5 * v) * dt + std::sqrt(v) * corr(p, 2 * k);
        out(i0 + p, k + 1) = std::exp(log_s);
      }
    }
  });
  return out;
}

Eigen::MatrixXd conditioning_features(const Covariance& cov,
                                      const Eigen::Ref<const Eigen::MatrixXd>& z, int n,
                                      int depth) {
  if (n < 1 || n > cov.steps)
    throw std::invalid_argument("conditioning_features: n out of range");
  if (depth < 0) throw std::invalid_argument("conditioning_features: depth must be >= 0");
  if (z.cols() < 2 * n)
    throw std::invalid_argument("conditioning_features: z has too few columns");

  const int hmax = std::min(n + depth, cov.steps);
  const int count = hmax - n + 1;
  Eigen::MatrixXd rows(count, 2 * n);
  for (int h = n; h <= hmax; ++h) rows.row(h - n) = cov.chol.row(2 * h - 1).head(2 * n);

  Eigen::MatrixXd out(z.rows(), count);
  parallel_for_blocks(static_cast<std::size_t>(z.rows()), 4096,
                      [&](std::size_t lo, std::size_t hi) {
                        const Eigen::Index i0 = static_cast<Eigen::Index>(lo);
                        const Eigen::Index nb = static_cast<Eigen::Index>(hi - lo);
                        out.middleRows(i0, nb).noalias() =
                            z.middleRows(i0, nb).leftCols(2 * n) * rows.transpose();
                      });
  return out;
}

Eigen::VectorXd increment_drift(const Covariance& cov,
                                const Eigen::Ref<const Eigen::MatrixXd>& z, int n) {
  if (n < 0 || n >= cov.steps)
    throw std::invalid_argument("increment_drift: n out of range");
  if (n == 0) return Eigen::VectorXd::Zero(z.rows());
  if (z.cols() < 2 * n)
    throw std::invalid_argument("increment_drift: z has too few columns");
  const Eigen::VectorXd row = cov.chol.row(2 * n).head(2 * n);
  Eigen::VectorXd out(z.rows());
  parallel_for_blocks(static_cast<std::size_t>(z.rows()), 4096,
                      [&](std::size_t lo, std::size_t hi) {
                        const Eigen::Index i0 = static_cast<Eigen::Index>(lo);
                        const Eigen::Index nb = static_cast<Eigen::Index>(hi - lo);
                        out.segment(i0, nb).noalias() =
                            z.middleRows(i0, nb).leftCols(2 * n) * row;
                      });
  return out;
}

}  // namespace mavg::rb
