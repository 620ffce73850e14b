#pragma once

#include <Eigen/Core>

#include "mavg/models.hpp"

namespace mavg::rb {

// Joint Gaussian structure of the simulation vector
//   (dW_1, Wt_{t_1}, dW_2, Wt_{t_2}, ..., dW_N, Wt_{t_N})
// where dW_n is the spot Brownian increment over (t_{n-1}, t_n] and Wt the
// Riemann-Liouville fractional Brownian motion (Volterra) value at t_n:
//   cov(dW_m, dW_n)  = dt delta_{mn}
//   cov(Wt_m, Wt_n)  = 2H t_m^{2H} G(t_n / t_m)           (m <= n)
//   cov(dW_m, Wt_n)  = rho sqrt(2H)/(H + 1/2)
//                      ((t_n - t_{m-1})^{H+1/2} - (t_n - t_m)^{H+1/2})  (m <= n)
// and zero for increments after t_n. `chol` is the lower Cholesky factor;
// because it is triangular, its leading 2n x 2n block factors the leading
// block of `sigma`, so one factorization serves truncated simulations too.
struct Covariance {
  int steps = 0;  // N
  double maturity = 0.0;
  double hurst = 0.0;
  double rho = 0.0;
  Eigen::MatrixXd sigma;  // 2N x 2N
  Eigen::MatrixXd chol;   // lower triangular
};

// G(x) = int_0^1 (1-s)^{H-1/2} (x-s)^{H-1/2} ds for x >= 1. The substitution
// s = 1 - (1-u)^{1/(H+1/2)} absorbs the endpoint singularity exactly:
//   G(x) = 1/(H+1/2) int_0^1 (x - 1 + (1-u)^{1/(H+1/2)})^{H-1/2} du,
// evaluated with a 200-point Gauss-Legendre rule (abs error < 5e-9 over
// H in [0.05, 0.8], x up to 250).
double fbm_kernel_integral(double x, double hurst);

Covariance make_covariance(int steps, double maturity, double hurst, double rho);

// Cached make_covariance; the reference stays valid for the process lifetime.
const Covariance& covariance(int steps, double maturity, double hurst, double rho);

// Spot paths from raw normals, one path per row of z (2*n columns simulate n
// dates). Column pair (2k, 2k+1) of z is revealed at date k+1. Log-Euler:
//   S_{t_{k+1}} = S_{t_k} exp((r - v_k/2) dt + sqrt(v_k) dW_{k+1}),
//   v_k = xi0(t_k) exp(eta Wt_{t_k} - eta^2 t_k^{2H} / 2),  v at t_0 = xi0(0).
// Returns paths x (n+1) spots, column 0 = s0; optionally also the variance
// path v_{t_0..t_n} (same shape, last column one step beyond its use).
Eigen::MatrixXd build_spot_paths(const RoughBergomiParams& par, const Covariance& cov,
                                 const Eigen::Ref<const Eigen::MatrixXd>& z,
                                 Eigen::MatrixXd* variances_out = nullptr);

// Conditioning features at date n: column h - n is
//   E_{h,n} = sum_{j < 2n} chol(2h-1, j) z_j   for h = n .. min(n+depth, N),
// the time-t_n conditional mean of Wt_{t_h} (and exactly Wt_{t_n} at h = n).
// Requires 1 <= n and z to carry at least 2n columns.
Eigen::MatrixXd conditioning_features(const Covariance& cov,
                                      const Eigen::Ref<const Eigen::MatrixXd>& z, int n,
                                      int depth);

// Time-t_n conditional mean of the next spot increment dW_{n+1}:
//   sum_{j < 2n} chol(2n, j) z_j per path (zero vector at n = 0).
Eigen::VectorXd increment_drift(const Covariance& cov,
                                const Eigen::Ref<const Eigen::MatrixXd>& z, int n);

}  // namespace mavg::rb
