#include "mavg/bench_forward.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mavg/engine_gprghq.hpp"
#include "mavg/parallel.hpp"
#include "mavg/rbergomi.hpp"
#include "mavg/sequences.hpp"

namespace mavg {

PriceResult evaluate_policy(const ContinuationSurrogate& surrogate,
                            long long n_paths, std::uint64_t seed, int rb_memory) {
  const auto t_start = std::chrono::steady_clock::now();
  const OptionSpec& opt = surrogate.option();
  const ModelParams& params = surrogate.params();
  opt.validate();
  if (n_paths < 2)
    throw std::invalid_argument("benchmark: n_paths must be >= 2");
  if (rb_memory < 0)
    throw std::invalid_argument("benchmark: rb_memory must be >= 0");
  for (int n = opt.window; n <= opt.steps; ++n)
    if (!surrogate.has_step(n))
      throw std::invalid_argument("benchmark: surrogate lacks date " +
                                  std::to_string(n));

  const int n_steps = opt.steps;
  const int m = opt.window;
  const auto* rbp = std::get_if<RoughBergomiParams>(&params);
  const double rate = model_rate(params);
  const rb::Covariance* cov =
      rbp ? &rb::covariance(n_steps, opt.maturity, rbp->hurst, rbp->rho) : nullptr;

  const long long n_pairs = (n_paths + 1) / 2;
  const long long total = 2 * n_pairs;
  const std::size_t dim = rbp ? 2 * static_cast<std::size_t>(n_steps) : n_steps;
  const auto stream = seq::NormalStream::pseudo(seed, dim, true);

  std::vector<double> pair_vals(static_cast<std::size_t>(n_pairs));
  constexpr long long kChunk = 32768;  // even, so pairs never straddle chunks

  for (long long row0 = 0; row0 < total; row0 += kChunk) {
    const long long len = std::min(kChunk, total - row0);
    const Eigen::MatrixXd z = seq::normal_matrix(
        stream, static_cast<std::uint64_t>(row0), static_cast<std::uint64_t>(len));

    Eigen::MatrixXd spots;
    if (rbp) {
      spots = rb::build_spot_paths(*rbp, *cov, z);
    } else {
      spots.resize(len, n_steps + 1);
      parallel_for_blocks(static_cast<std::size_t>(len), 1024,
                          [&](std::size_t lo, std::size_t hi) {
                            for (std::size_t pp = lo; pp < hi; ++pp) {
                              const auto p = static_cast<Eigen::Index>(pp);
                              double s;
                              if (const auto* bs =
                                      std::get_if<BlackScholesParams>(&params)) {
                                s = bs->s0;
                                spots(p, 0) = s;
                                for (int i = 0; i < n_steps; ++i) {
                                  s = bs_step(*bs, s, z(p, i), opt.dt());
                                  spots(p, i + 1) = s;
                                }
                              } else {
                                const auto& cs =
                                    std::get<ClewlowStricklandParams>(params);
                                s = cs.forward(0.0);
                                spots(p, 0) = s;
                                for (int i = 0; i < n_steps; ++i) {
                                  s = cs_step(cs, s, z(p, i), opt.t(i), opt.t(i + 1));
                                  spots(p, i + 1) = s;
                                }
                              }
                            }
                          });
    }

    std::vector<double> val(static_cast<std::size_t>(len), 0.0);
    std::vector<char> alive(static_cast<std::size_t>(len), 1);

    for (int n = m; n <= n_steps; ++n) {
      std::vector<Eigen::Index> idx;  // ascending keeps the reduction ordered
      idx.reserve(static_cast<std::size_t>(len));
      for (long long p = 0; p < len; ++p)
        if (alive[static_cast<std::size_t>(p)]) idx.push_back(p);
      if (idx.empty()) break;
      const auto cnt = static_cast<Eigen::Index>(idx.size());

      Eigen::MatrixXd sub_spots(cnt, n + 1);
      Eigen::MatrixXd sub_z;
      if (rbp) sub_z.resize(cnt, 2 * n);
      parallel_for_blocks(idx.size(), 1024, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          sub_spots.row(static_cast<Eigen::Index>(i)) =
              spots.row(idx[i]).head(n + 1);
          if (rbp)
            sub_z.row(static_cast<Eigen::Index>(i)) = z.row(idx[i]).head(2 * n);
        }
      });

      const Eigen::MatrixXd b = detail::reduced_states(opt, sub_spots, n);
      const Eigen::VectorXd psi = detail::path_payoffs(opt, sub_spots, n);
      const Eigen::MatrixXd feats =
          rbp ? rb::conditioning_features(*cov, sub_z, n, rb_memory)
              : Eigen::MatrixXd(cnt, 0);
      const Eigen::VectorXd cont = surrogate.value(n, b, feats);

      const double disc = std::exp(-rate * opt.t(n));
      parallel_for_blocks(idx.size(), 4096, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          if (psi(ii) >= cont(ii)) {
            val[static_cast<std::size_t>(idx[i])] = disc * psi(ii);
            alive[static_cast<std::size_t>(idx[i])] = 0;
          }
        }
      });
    }
    // date N pairs a zero continuation with psi >= 0, so nothing survives

    parallel_for_blocks(static_cast<std::size_t>(len / 2), 4096,
                        [&](std::size_t lo, std::size_t hi) {
                          for (std::size_t k = lo; k < hi; ++k)
                            pair_vals[static_cast<std::size_t>(row0 / 2) + k] =
                                0.5 * (val[2 * k] + val[2 * k + 1]);
                        });
  }

  const double mean = pairwise_sum(pair_vals) / static_cast<double>(n_pairs);
  for (double& v : pair_vals) v = (v - mean) * (v - mean);
  const double var = n_pairs > 1
                         ? pairwise_sum(pair_vals) / static_cast<double>(n_pairs - 1)
                         : 0.0;

  PriceResult res;
  res.price = mean;
  res.ci_radius = 1.96 * std::sqrt(var / static_cast<double>(n_pairs));
  res.n_paths = total;
  res.model = model_name(params);
  res.engine = "benchmark";
  res.window = m;
  res.steps = n_steps;
  res.maturity = opt.maturity;
  if (rbp) res.feature_window = rb_memory;
  res.seed = seed;
  res.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

long long paths_for_ci(double target_radius, const PriceResult& pilot) {
  if (!(target_radius > 0.0))
    throw std::invalid_argument("benchmark: target radius must be > 0");
  if (pilot.n_paths < 2 || !(pilot.ci_radius > 0.0))
    return std::max<long long>(pilot.n_paths, 2);
  const double pairs = static_cast<double>(pilot.n_paths) / 2.0;
  const double sd_pair = pilot.ci_radius * std::sqrt(pairs) / 1.96;
  const double need = std::ceil(1.96 * sd_pair / target_radius *
                                (1.96 * sd_pair / target_radius));
  return std::max<long long>(2 * static_cast<long long>(need), 2);
}

}  // namespace mavg
