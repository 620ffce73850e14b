#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mavg::gpr {

// Isotropic squared-exponential kernel
//   k(x, x') = signal_var * exp(-0.5 |x - x'|^2 / length_scale^2)
// over standardized inputs, with iid observation noise noise_var.
struct Hyper {
  double signal_var = 1.0;
  double length_scale = 1.0;
  double noise_var = 1e-4;
};

struct FitOptions {
  // When set, skips the likelihood search. Interpreted in the fit's internal
  // scale: inputs standardized per column, targets the OLS residuals divided
  // by their standard deviation.
  std::optional<Hyper> fixed;
  int max_iterations = 200;  // per Nelder-Mead start
};

// Trained model: ordinary-least-squares linear mean plus a zero-mean GP on
// the residuals. Inputs are standardized and residuals scaled internally;
// predictions are returned in the original units.
struct Model {
  Eigen::MatrixXd train_x;     // standardized inputs, P x D
  Eigen::VectorXd x_mean;      // D
  Eigen::VectorXd x_scale;     // D (1 where a column is constant)
  Eigen::VectorXd mean_coeffs; // D+1: mu(x) = c[0] + c[1:] . x (raw units)
  double resid_scale = 0.0;    // std of the OLS residuals; 0 = mean-only model
  Hyper hyper;
  Eigen::VectorXd theta;       // (K + noise I)^{-1} scaled residuals
  double lml = 0.0;            // achieved log marginal likelihood
  std::vector<std::string> warnings;

  int d() const { return static_cast<int>(x_mean.size()); }
  int p() const { return static_cast<int>(train_x.rows()); }
};

double kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& y, const Hyper& h);

// Zero-mean GP log marginal likelihood of y given inputs x (used verbatim,
// no standardization):
//   -0.5 y' (K + noise I)^{-1} y - 0.5 log det(K + noise I) - P/2 log(2 pi).
double log_marginal_likelihood(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               const Hyper& h);

// OLS mean, then hyperparameters by deterministic Nelder-Mead on
// (log signal_var, log length_scale, log noise_var) from three documented
// starts, then theta via Cholesky with an escalating nugget. D = 0 degrades
// to the scalar mean of y. P is capped at 15000 (fit cost guard).
Model fit(const Eigen::Ref<const Eigen::MatrixXd>& x,
          const Eigen::Ref<const Eigen::VectorXd>& y, const FitOptions& opts = {});

// Posterior mean for each row of x / at a single point.
Eigen::VectorXd predict(const Model& m, const Eigen::Ref<const Eigen::MatrixXd>& x);
double predict_at(const Model& m, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace mavg::gpr
