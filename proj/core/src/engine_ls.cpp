#include "mavg/engine_ls.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mavg/engine_gprghq.hpp"  // reduced_states / path_payoffs helpers
#include "mavg/parallel.hpp"
#include "mavg/rbergomi.hpp"
#include "mavg/sequences.hpp"

namespace mavg {

namespace {

// Fills one design-matrix row: monomials of the standardized state.
void monomial_row(const std::vector<std::vector<int>>& exps, const double* x,
                  double* out) {
  for (std::size_t t = 0; t < exps.size(); ++t) {
    double v = 1.0;
    const auto& e = exps[t];
    for (std::size_t k = 0; k < e.size(); ++k)
      for (int rep = 0; rep < e[k]; ++rep) v *= x[k];
    out[t] = v;
  }
}

}  // namespace

namespace detail {

std::vector<std::vector<int>> monomial_exponents(int dims, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dims, 0);
  // graded: total degree 0, 1, ..., degree; lexicographic within a grade
  for (int total = 0; total <= degree; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == dims) {
        if (left == 0) out.push_back(cur);
        return;
      }
      for (int e = left; e >= 0; --e) {
        cur[pos] = e;
        rec(pos + 1, left - e);
      }
      cur[pos] = 0;
    };
    if (dims == 0) {
      if (total == 0) out.push_back(cur);
    } else {
      rec(0, total);
    }
  }
  return out;
}

}  // namespace detail

void LsConfig::validate() const {
  if (n_paths < 2) throw std::invalid_argument("ls: n_paths must be >= 2");
  if (degree < 1) throw std::invalid_argument("ls: degree must be >= 1");
  if (rb_memory < 0) throw std::invalid_argument("ls: rb_memory must be >= 0");
}

PriceResult price_ls(const OptionSpec& opt, const ModelParams& params,
                     const LsConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  opt.validate();
  cfg.validate();
  std::visit([](const auto& p) { p.validate(); }, params);

  const int n_steps = opt.steps;
  const int m = opt.window;
  const auto* rbp = std::get_if<RoughBergomiParams>(&params);
  const double rate = model_rate(params);

  // total paths, even under antithetic pairing
  const long long total = cfg.antithetic ? 2 * ((cfg.n_paths + 1) / 2) : cfg.n_paths;

  // widest regression state: d_E + d_B at the interior dates
  {
    const int d_interior = (m - 1) + (rbp ? std::min(n_steps - m, cfg.rb_memory) + 1 : 0);
    const auto basis = detail::monomial_exponents(d_interior, cfg.degree);
    if (total < 10 * static_cast<long long>(basis.size()))
      throw std::invalid_argument("ls: need n_paths >= 10 * basis size (" +
                                  std::to_string(10 * basis.size()) + ")");
  }

  const std::size_t dim = rbp ? 2 * static_cast<std::size_t>(n_steps) : n_steps;
  const auto stream = seq::NormalStream::pseudo(cfg.seed, dim, cfg.antithetic);
  const Eigen::MatrixXd z = seq::normal_matrix(stream, total);

  Eigen::MatrixXd spots;
  const rb::Covariance* cov = nullptr;
  if (rbp) {
    cov = &rb::covariance(n_steps, opt.maturity, rbp->hurst, rbp->rho);
    spots = rb::build_spot_paths(*rbp, *cov, z);
  } else {
    // reuse the quadrature engine's exact per-step transitions
    spots.resize(total, n_steps + 1);
    const double s0 = std::holds_alternative<BlackScholesParams>(params)
                          ? std::get<BlackScholesParams>(params).s0
                          : std::get<ClewlowStricklandParams>(params).forward(0.0);
    parallel_for_blocks(static_cast<std::size_t>(total), 1024,
                        [&](std::size_t lo, std::size_t hi) {
                          for (std::size_t pp = lo; pp < hi; ++pp) {
                            const auto p = static_cast<Eigen::Index>(pp);
                            double s = s0;
                            spots(p, 0) = s;
                            for (int i = 0; i < n_steps; ++i) {
                              if (const auto* bs = std::get_if<BlackScholesParams>(&params))
                                s = bs_step(*bs, s, z(p, i), opt.dt());
                              else
                                s = cs_step(std::get<ClewlowStricklandParams>(params), s,
                                            z(p, i), opt.t(i), opt.t(i + 1));
                              spots(p, i + 1) = s;
                            }
                          }
                        });
  }

  // cashflow state: exercise date and (undiscounted) amount per path
  std::vector<int> tau(total, n_steps);
  Eigen::VectorXd amount = detail::path_payoffs(opt, spots, n_steps);
  bool used_ridge = false;

  for (int n = n_steps - 1; n >= m; --n) {
    const Eigen::MatrixXd b = detail::reduced_states(opt, spots, n);
    Eigen::MatrixXd x;
    if (rbp) {
      const Eigen::MatrixXd feats =
          rb::conditioning_features(*cov, z, n, cfg.rb_memory);
      x.resize(total, feats.cols() + b.cols());
      x.leftCols(feats.cols()) = feats;
      x.rightCols(b.cols()) = b;
    } else {
      x = b;
    }

    // standardize columns (constant columns pass through unscaled)
    const Eigen::Index d = x.cols();
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mu = x.col(j).mean();
      const double sd =
          std::sqrt((x.col(j).array() - mu).square().sum() / static_cast<double>(total));
      x.col(j) = (x.col(j).array() - mu) / (sd > 0.0 ? sd : 1.0);
    }

    const auto exps = detail::monomial_exponents(static_cast<int>(d), cfg.degree);
    const auto nb = static_cast<Eigen::Index>(exps.size());
    Eigen::MatrixXd phi(total, nb);
    Eigen::VectorXd y(total);
    parallel_for_blocks(static_cast<std::size_t>(total), 1024,
                        [&](std::size_t lo, std::size_t hi) {
                          std::vector<double> row(d), mono(nb);
                          for (std::size_t pp = lo; pp < hi; ++pp) {
                            const auto p = static_cast<Eigen::Index>(pp);
                            for (Eigen::Index k = 0; k < d; ++k) row[k] = x(p, k);
                            monomial_row(exps, row.data(), mono.data());
                            for (Eigen::Index t = 0; t < nb; ++t) phi(p, t) = mono[t];
                            y(p) = std::exp(-rate * (opt.t(tau[p]) - opt.t(n))) * amount(p);
                          }
                        });

    Eigen::MatrixXd gram = phi.transpose() * phi;
    const Eigen::VectorXd rhs = phi.transpose() * y;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    Eigen::VectorXd beta;
    if (llt.info() == Eigen::Success) {
      beta = llt.solve(rhs);
    } else {
      gram.diagonal().array() += 1e-10 * gram.trace();
      beta = Eigen::LLT<Eigen::MatrixXd>(gram).solve(rhs);
      used_ridge = true;
    }

    const Eigen::VectorXd cont = phi * beta;
    const Eigen::VectorXd psi = detail::path_payoffs(opt, spots, n);
    parallel_for_blocks(static_cast<std::size_t>(total), 4096,
                        [&](std::size_t lo, std::size_t hi) {
                          for (std::size_t pp = lo; pp < hi; ++pp) {
                            const auto p = static_cast<Eigen::Index>(pp);
                            if (psi(p) >= cont(p)) {
                              tau[p] = n;
                              amount(p) = psi(p);
                            }
                          }
                        });
  }

  // discounted value per path, reduced deterministically
  std::vector<double> vals(static_cast<std::size_t>(total));
  parallel_for_blocks(static_cast<std::size_t>(total), 4096,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t p = lo; p < hi; ++p)
                          vals[p] = std::exp(-rate * opt.t(tau[p])) *
                                    amount(static_cast<Eigen::Index>(p));
                      });
  long long groups;
  std::vector<double> stats;
  if (cfg.antithetic) {
    groups = total / 2;
    stats.resize(static_cast<std::size_t>(groups));
    for (long long k = 0; k < groups; ++k)
      stats[static_cast<std::size_t>(k)] = 0.5 * (vals[2 * k] + vals[2 * k + 1]);
  } else {
    groups = total;
    stats = std::move(vals);
  }
  const double mean = pairwise_sum(stats) / static_cast<double>(groups);
  for (double& v : stats) v = (v - mean) * (v - mean);
  const double var =
      groups > 1 ? pairwise_sum(stats) / static_cast<double>(groups - 1) : 0.0;

  PriceResult res;
  res.price = mean;
  res.ci_radius = 1.96 * std::sqrt(var / static_cast<double>(groups));
  res.n_paths = total;
  res.model = model_name(params);
  res.engine = "ls";
  res.window = m;
  res.steps = n_steps;
  res.maturity = opt.maturity;
  res.train_paths = total;
  res.degree = cfg.degree;
  if (rbp) res.feature_window = cfg.rb_memory;
  res.seed = cfg.seed;
  if (used_ridge) res.warnings.push_back("singular regression, ridge fallback used");
  res.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace mavg
