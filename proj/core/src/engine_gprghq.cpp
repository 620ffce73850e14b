#include "mavg/engine_gprghq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mavg/parallel.hpp"
#include "mavg/quadrature.hpp"
#include "mavg/rbergomi.hpp"
#include "mavg/sequences.hpp"

namespace mavg {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

double reference_spot(const ModelParams& params) {
  if (const auto* bs = std::get_if<BlackScholesParams>(&params)) return bs->s0;
  if (const auto* cs = std::get_if<ClewlowStricklandParams>(&params))
    return cs->forward(0.0);
  return std::get<RoughBergomiParams>(params).s0;
}

double initial_spot(const ModelParams& params) {
  // Clewlow-Strickland starts on the forward curve: S_{t_0} = F(0, 0)
  return reference_spot(params);
}

// Exact one-step transition at quadrature node u (normal draw sqrt(2) u).
double node_step(const ModelParams& params, double s, double u, double t_from,
                 double t_to) {
  if (const auto* bs = std::get_if<BlackScholesParams>(&params))
    return bs_step(*bs, s, kSqrt2 * u, t_to - t_from);
  if (const auto* cs = std::get_if<ClewlowStricklandParams>(&params))
    return cs_step(*cs, s, kSqrt2 * u, t_from, t_to);
  throw std::invalid_argument("node_step: rough Bergomi has no scalar transition");
}

// BS/CS spot paths over dates 0..n from one normal per step.
Eigen::MatrixXd lognormal_paths(const OptionSpec& opt, const ModelParams& params,
                                const Eigen::Ref<const Eigen::MatrixXd>& z, int n) {
  const Eigen::Index paths = z.rows();
  if (z.cols() < n) throw std::logic_error("lognormal_paths: too few normals");
  const double s0 = initial_spot(params);
  Eigen::MatrixXd out(paths, n + 1);
  parallel_for_blocks(static_cast<std::size_t>(paths), 1024,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t p = lo; p < hi; ++p) {
                          const auto row = static_cast<Eigen::Index>(p);
                          double s = s0;
                          out(row, 0) = s;
                          for (int i = 0; i < n; ++i) {
                            if (const auto* bs = std::get_if<BlackScholesParams>(&params))
                              s = bs_step(*bs, s, z(row, i), opt.dt());
                            else
                              s = cs_step(std::get<ClewlowStricklandParams>(params), s,
                                          z(row, i), opt.t(i), opt.t(i + 1));
                            out(row, i + 1) = s;
                          }
                        }
                      });
  return out;
}

// Continuation responses for one rough-Bergomi backward step: tensor 2-D GHQ
// over the next Brownian increment and the next Volterra innovation,
// conditioning on each training path's Gaussian history.
Eigen::VectorXd rb_responses(const OptionSpec& opt, const RoughBergomiParams& par,
                             const rb::Covariance& cov,
                             const Eigen::Ref<const Eigen::MatrixXd>& z,
                             const ContinuationSurrogate& next, int n,
                             const Eigen::Ref<const Eigen::MatrixXd>& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& feats, int q,
                             int memory) {
  const int m = opt.window;
  const int db = state_dims(opt, n).reduced_b;
  const int db1 = state_dims(opt, n + 1).reduced_b;
  const int de1 = feature_count(opt, n + 1, memory);
  const Eigen::Index paths = b.rows();
  const quad::GhRule& rule = quad::gh_rule(q);
  const double dt = opt.dt();
  const double tn = opt.t(n);
  const double disc = std::exp(-par.rate * dt);
  const double v_base = par.xi0(tn);
  const double v_drift = -0.5 * par.eta * par.eta * std::pow(tn, 2.0 * par.hurst);
  const double l_ww = cov.chol(2 * n, 2 * n);

  const Eigen::VectorXd mu1 = rb::increment_drift(cov, z, n);
  // innovation loadings of the successor features E_{h,n+1}, h = n+1..n+de1
  Eigen::VectorXd c1(de1), c2(de1);
  for (int h = 0; h < de1; ++h) {
    c1(h) = cov.chol(2 * (n + 1 + h) - 1, 2 * n);
    c2(h) = cov.chol(2 * (n + 1 + h) - 1, 2 * n + 1);
  }

  const Eigen::Index q2 = static_cast<Eigen::Index>(q) * q;
  Eigen::MatrixXd bnext(paths * q2, db1);
  Eigen::MatrixXd fnext(paths * q2, de1);
  Eigen::VectorXd psi(paths * q2);

  parallel_for_blocks(static_cast<std::size_t>(paths), 64, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> bcur(db), bnew(db1);
    for (std::size_t pp = lo; pp < hi; ++pp) {
      const auto p = static_cast<Eigen::Index>(pp);
      for (int k = 0; k < db; ++k) bcur[k] = b(p, k);
      const double spot = bcur[db - 1];
      const double v = v_base * std::exp(par.eta * feats(p, 0) + v_drift);
      const double sqv = std::sqrt(v);
      const double log_growth = (par.rate - 0.5 * v) * dt;
      for (int a = 0; a < q; ++a) {
        const double z1 = kSqrt2 * rule.nodes[a];
        const double dw = mu1(p) + l_ww * z1;
        for (int c = 0; c < q; ++c) {
          const double z2 = kSqrt2 * rule.nodes[c];
          const double s_next = spot * std::exp(log_growth + sqv * dw);
          const Eigen::Index row = p * q2 + a * q + c;
          detail::advance_b(m, db1, bcur.data(), s_next, bnew.data());
          for (int k = 0; k < db1; ++k) bnext(row, k) = bnew[k];
          psi(row) = std::max(0.0, s_next - detail::next_full_average(m, bcur[0], s_next));
          for (int h = 0; h < de1; ++h)
            fnext(row, h) = feats(p, h + 1) + c1(h) * z1 + c2(h) * z2;
        }
      }
    }
  });

  const Eigen::VectorXd cnext = next.value(n + 1, bnext, fnext);
  const double norm = rule.weight_sum * rule.weight_sum;
  Eigen::VectorXd y(paths);
  parallel_for_blocks(static_cast<std::size_t>(paths), 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t pp = lo; pp < hi; ++pp) {
      const auto p = static_cast<Eigen::Index>(pp);
      double acc = 0.0;
      for (int a = 0; a < q; ++a)
        for (int c = 0; c < q; ++c) {
          const Eigen::Index row = p * q2 + a * q + c;
          acc += rule.weights[a] * rule.weights[c] * std::max(psi(row), cnext(row));
        }
      y(p) = disc * acc / norm;
    }
  });
  return y;
}

gpr::Model fit_or_rethrow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n,
                          int max_iterations) {
  try {
    gpr::FitOptions opts;
    opts.max_iterations = max_iterations;
    return gpr::fit(x, y, opts);
  } catch (const std::exception& e) {
    throw std::runtime_error("gprghq: GPR fit failed at date n=" + std::to_string(n) +
                             ": " + e.what());
  }
}

}  // namespace

void GprGhqConfig::validate() const {
  if (n_train < 1 || n_train > 15000)
    throw std::invalid_argument("gprghq: n_train must be in [1, 15000]");
  if (quad_order < 1 || quad_order > 128)
    throw std::invalid_argument("gprghq: quad_order must be in [1, 128]");
  if (rb_memory < 0) throw std::invalid_argument("gprghq: rb_memory must be >= 0");
  if (mc_final_paths < 2)
    throw std::invalid_argument("gprghq: mc_final_paths must be >= 2");
  if (halton_burn_in < 0)
    throw std::invalid_argument("gprghq: halton_burn_in must be >= 0");
  if (gpr_max_iterations < 1)
    throw std::invalid_argument("gprghq: gpr_max_iterations must be >= 1");
}

namespace detail {

Eigen::MatrixXd reduced_states(const OptionSpec& opt,
                               const Eigen::Ref<const Eigen::MatrixXd>& spots, int n) {
  const int m = opt.window;
  const int db = state_dims(opt, n).reduced_b;
  if (spots.cols() < n + 1) throw std::invalid_argument("reduced_states: path too short");
  if (n < m - 1) throw std::invalid_argument("reduced_states: date before the window");
  const Eigen::Index paths = spots.rows();
  Eigen::MatrixXd out(paths, db);
  parallel_for_blocks(static_cast<std::size_t>(paths), 1024,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t pp = lo; pp < hi; ++pp) {
                          const auto p = static_cast<Eigen::Index>(pp);
                          double sum = spots(p, n);
                          out(p, db - 1) = sum;
                          // windows lengthen toward the front of B
                          for (int len = 2; len <= m - 1; ++len) {
                            sum += spots(p, n - len + 1);
                            const int k = m - 1 - len;  // entry with this window
                            if (k <= db - 2) out(p, k) = sum / len;
                          }
                        }
                      });
  return out;
}

Eigen::VectorXd path_payoffs(const OptionSpec& opt,
                             const Eigen::Ref<const Eigen::MatrixXd>& spots, int n) {
  const int m = opt.window;
  if (n < m) throw std::invalid_argument("path_payoffs: not exercisable before t_M");
  if (spots.cols() < n + 1) throw std::invalid_argument("path_payoffs: path too short");
  const Eigen::Index paths = spots.rows();
  Eigen::VectorXd out(paths);
  parallel_for_blocks(static_cast<std::size_t>(paths), 1024,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t pp = lo; pp < hi; ++pp) {
                          const auto p = static_cast<Eigen::Index>(pp);
                          double sum = 0.0;
                          for (int i = n - m + 1; i <= n; ++i) sum += spots(p, i);
                          out(p) = std::max(0.0, spots(p, n) - sum / m);
                        }
                      });
  return out;
}

}  // namespace detail

Eigen::VectorXd ghq_continuation(const OptionSpec& opt, const ModelParams& params,
                                 const ContinuationSurrogate& next, int n,
                                 const Eigen::Ref<const Eigen::MatrixXd>& b,
                                 int quad_order) {
  opt.validate();
  if (std::holds_alternative<RoughBergomiParams>(params))
    throw std::invalid_argument("ghq_continuation: rough Bergomi needs the path history");
  if (n < opt.window || n >= opt.steps)
    throw std::invalid_argument("ghq_continuation: date out of range");
  const int m = opt.window;
  const int db = state_dims(opt, n).reduced_b;
  const int db1 = state_dims(opt, n + 1).reduced_b;
  if (b.cols() != db) throw std::invalid_argument("ghq_continuation: dimension mismatch");

  const quad::GhRule& rule = quad::gh_rule(quad_order);
  const int q = rule.order;
  const double disc = std::exp(-model_rate(params) * opt.dt());
  const double t_from = opt.t(n);
  const double t_to = opt.t(n + 1);
  const Eigen::Index paths = b.rows();

  Eigen::MatrixXd bnext(paths * q, db1);
  Eigen::VectorXd psi(paths * q);
  parallel_for_blocks(static_cast<std::size_t>(paths), 256, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> bcur(db), bnew(db1);
    for (std::size_t pp = lo; pp < hi; ++pp) {
      const auto p = static_cast<Eigen::Index>(pp);
      for (int k = 0; k < db; ++k) bcur[k] = b(p, k);
      const double spot = bcur[db - 1];
      for (int a = 0; a < q; ++a) {
        const double s_next = node_step(params, spot, rule.nodes[a], t_from, t_to);
        const Eigen::Index row = p * q + a;
        detail::advance_b(m, db1, bcur.data(), s_next, bnew.data());
        for (int k = 0; k < db1; ++k) bnext(row, k) = bnew[k];
        psi(row) = std::max(0.0, s_next - detail::next_full_average(m, bcur[0], s_next));
      }
    }
  });

  const Eigen::VectorXd cnext = next.value(n + 1, bnext, Eigen::MatrixXd(0, 0));
  Eigen::VectorXd y(paths);
  parallel_for_blocks(static_cast<std::size_t>(paths), 1024,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t pp = lo; pp < hi; ++pp) {
                          const auto p = static_cast<Eigen::Index>(pp);
                          double acc = 0.0;
                          for (int a = 0; a < q; ++a)
                            acc += rule.weights[a] *
                                   std::max(psi(p * q + a), cnext(p * q + a));
                          y(p) = disc * acc / rule.weight_sum;
                        }
                      });
  return y;
}

ContinuationSurrogate solve_gprghq(const OptionSpec& opt, const ModelParams& params,
                                   const GprGhqConfig& cfg) {
  opt.validate();
  cfg.validate();
  std::visit([](const auto& p) { p.validate(); }, params);

  const int n_steps = opt.steps;
  const int m = opt.window;
  ContinuationSurrogate surrogate(opt, params);
  if (m == n_steps) return surrogate;  // single exercise date: C_N == 0 suffices

  const auto* bs = std::get_if<BlackScholesParams>(&params);
  const auto* rbp = std::get_if<RoughBergomiParams>(&params);
  const bool similarity = bs != nullptr && cfg.use_similarity;

  if (!rbp) {
    SurrogateStep term;
    term.kind = SurrogateStep::Kind::terminal_call;
    surrogate.set_step(n_steps - 1, std::move(term));
  }

  if (similarity && m == 2) {
    // Unit-spot scalar recursion: B = (spot), so the reduced coordinate space
    // is a point and each date's continuation is spot times a constant.
    const quad::GhRule& rule = quad::gh_rule(cfg.quad_order);
    const double dt = opt.dt();
    const double disc = std::exp(-bs->rate * dt);
    double c = 0.5 * bs_call(1.0, 1.0, dt, bs->rate, bs->sigma);
    const BlackScholesParams unit{1.0, bs->rate, bs->sigma};
    for (int n = n_steps - 2; n >= m; --n) {
      double acc = 0.0;
      for (int a = 0; a < rule.order; ++a) {
        const double s_next = bs_step(unit, 1.0, kSqrt2 * rule.nodes[a], dt);
        acc += rule.weights[a] *
               std::max(0.5 * std::max(0.0, s_next - 1.0), s_next * c);
      }
      c = disc * acc / rule.weight_sum;
      SurrogateStep step;
      step.kind = SurrogateStep::Kind::scalar;
      step.scalar_value = c;
      surrogate.set_step(n, std::move(step));
    }
    return surrogate;
  }

  // training paths (quasi-random)
  const auto paths = static_cast<Eigen::Index>(cfg.n_train);
  Eigen::MatrixXd z, spots;
  const rb::Covariance* cov = nullptr;
  if (rbp) {
    cov = &rb::covariance(n_steps, opt.maturity, rbp->hurst, rbp->rho);
    z = seq::normal_matrix(seq::NormalStream::halton(2 * n_steps, cfg.halton_burn_in),
                           paths);
    spots = rb::build_spot_paths(*rbp, *cov, z);
  } else {
    z = seq::normal_matrix(seq::NormalStream::halton(n_steps, cfg.halton_burn_in), paths);
    spots = lognormal_paths(opt, params, z, n_steps);
  }

  const double scale = reference_spot(params);
  const int start = rbp ? n_steps - 1 : n_steps - 2;
  for (int n = start; n >= m; --n) {
    const Eigen::MatrixXd b = detail::reduced_states(opt, spots, n);
    Eigen::MatrixXd feats;
    Eigen::VectorXd y;
    if (rbp) {
      feats = rb::conditioning_features(*cov, z, n, cfg.rb_memory + 1);
      y = rb_responses(opt, *rbp, *cov, z, surrogate, n, b, feats, cfg.quad_order,
                       cfg.rb_memory);
    } else {
      y = ghq_continuation(opt, params, surrogate, n, b, cfg.quad_order);
    }

    SurrogateStep step;
    if (y.cwiseAbs().maxCoeff() < 1e-12 * scale) {
      step.kind = SurrogateStep::Kind::zero;  // continuation numerically dead
    } else if (similarity) {
      const int db = state_dims(opt, n).reduced_b;
      Eigen::MatrixXd x = b.leftCols(db - 1);
      x.array().colwise() /= b.col(db - 1).array();
      const Eigen::VectorXd targets = y.cwiseQuotient(b.col(db - 1));
      step.kind = SurrogateStep::Kind::gpr_similarity;
      step.model = fit_or_rethrow(x, targets, n, cfg.gpr_max_iterations);
    } else {
      step.kind = SurrogateStep::Kind::gpr_plain;
      Eigen::MatrixXd x;
      if (rbp) {
        const int de = feature_count(opt, n, cfg.rb_memory);
        x.resize(b.rows(), de + b.cols());
        x.leftCols(de) = feats.leftCols(de);
        x.rightCols(b.cols()) = b;
      } else {
        x = b;
      }
      step.model = fit_or_rethrow(x, y, n, cfg.gpr_max_iterations);
    }
    surrogate.set_step(n, std::move(step));
  }
  return surrogate;
}

PriceResult price_gprghq(const OptionSpec& opt, const ModelParams& params,
                         const GprGhqConfig& cfg, ContinuationSurrogate* surrogate_out) {
  const auto t_start = std::chrono::steady_clock::now();
  ContinuationSurrogate surrogate = solve_gprghq(opt, params, cfg);

  const int m = opt.window;
  const auto* rbp = std::get_if<RoughBergomiParams>(&params);
  const rb::Covariance* cov =
      rbp ? &rb::covariance(opt.steps, opt.maturity, rbp->hurst, rbp->rho) : nullptr;
  const double disc = std::exp(-model_rate(params) * opt.t(m));

  const auto n_pairs = (cfg.mc_final_paths + 1) / 2;
  const auto total = 2 * n_pairs;
  const std::size_t dim = rbp ? 2 * static_cast<std::size_t>(m) : m;
  const auto stream = seq::NormalStream::pseudo(cfg.seed, dim, /*antithetic=*/true);

  std::vector<double> pair_means(static_cast<std::size_t>(n_pairs));
  constexpr long long kChunk = 131072;  // even: antithetic pairs never split
  for (long long row0 = 0; row0 < total; row0 += kChunk) {
    const long long len = std::min(kChunk, total - row0);
    const Eigen::MatrixXd z = seq::normal_matrix(stream, row0, len);
    Eigen::MatrixXd spots, feats;
    if (rbp) {
      spots = rb::build_spot_paths(*rbp, *cov, z);
      feats = rb::conditioning_features(*cov, z, m, cfg.rb_memory);
    } else {
      spots = lognormal_paths(opt, params, z, m);
    }
    const Eigen::MatrixXd b = detail::reduced_states(opt, spots, m);
    const Eigen::VectorXd psi = detail::path_payoffs(opt, spots, m);
    const Eigen::VectorXd cont =
        surrogate.value(m, b, rbp ? feats : Eigen::MatrixXd(0, 0));
    parallel_for_blocks(static_cast<std::size_t>(len) / 2, 2048,
                        [&](std::size_t lo, std::size_t hi) {
                          for (std::size_t k = lo; k < hi; ++k) {
                            const auto i = static_cast<Eigen::Index>(2 * k);
                            const double a = std::max(psi(i), cont(i));
                            const double bb = std::max(psi(i + 1), cont(i + 1));
                            pair_means[row0 / 2 + k] = disc * 0.5 * (a + bb);
                          }
                        });
  }

  const double mean = pairwise_sum(pair_means) / static_cast<double>(n_pairs);
  for (double& v : pair_means) v = (v - mean) * (v - mean);
  const double var = n_pairs > 1
                         ? pairwise_sum(pair_means) / static_cast<double>(n_pairs - 1)
                         : 0.0;
  const double ci = 1.96 * std::sqrt(var / static_cast<double>(n_pairs));
  if (!(mean >= 0.0)) throw std::logic_error("gprghq: negative price");

  PriceResult res;
  res.price = mean;
  res.ci_radius = ci;
  res.n_paths = total;
  res.model = model_name(params);
  res.engine = "gprghq";
  res.window = m;
  res.steps = opt.steps;
  res.maturity = opt.maturity;
  res.train_paths = cfg.n_train;
  res.quad_order = cfg.quad_order;
  if (rbp) res.feature_window = cfg.rb_memory;
  res.seed = cfg.seed;
  res.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (surrogate_out) *surrogate_out = std::move(surrogate);
  return res;
}

}  // namespace mavg
