#pragma once

// Brute-force Bermudan moving-average price on the Cox-Ross-Rubinstein
// lattice by exhaustive recursion over the full non-recombining path tree.
// Exponential in N: reference for small grids only.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mavg/models.hpp"
#include "mavg/state.hpp"

namespace oracle {

inline double crr_window_payoff(const std::vector<double>& prices, int window) {
  const int n = static_cast<int>(prices.size()) - 1;
  double avg = 0.0;
  for (int j = 0; j < window; ++j) avg += prices[n - j];
  avg /= window;
  return std::max(0.0, prices[n] - avg);
}

// Option value at date `prices.size()-1` given the realized prefix; exercise
// allowed from date M on, forced at N (continuation beyond N is zero).
inline double crr_node_value(const mavg::OptionSpec& opt,
                             const mavg::BlackScholesParams& par,
                             std::vector<double>& prices, double p_up) {
  const int n = static_cast<int>(prices.size()) - 1;
  const double dt = opt.dt();
  const double up = std::exp(par.sigma * std::sqrt(dt));
  const double exercise =
      n >= opt.window ? crr_window_payoff(prices, opt.window) : 0.0;
  if (n == opt.steps) return exercise;

  const double s = prices.back();
  prices.push_back(s * up);
  const double v_up = crr_node_value(opt, par, prices, p_up);
  prices.back() = s / up;
  const double v_dw = crr_node_value(opt, par, prices, p_up);
  prices.pop_back();
  const double cont =
      std::exp(-par.rate * dt) * (p_up * v_up + (1.0 - p_up) * v_dw);
  return n >= opt.window ? std::max(exercise, cont) : cont;
}

inline double crr_tree_price(const mavg::OptionSpec& opt,
                             const mavg::BlackScholesParams& par) {
  const double dt = opt.dt();
  const double up = std::exp(par.sigma * std::sqrt(dt));
  const double p_up = (std::exp(par.rate * dt) - 1.0 / up) / (up - 1.0 / up);
  std::vector<double> prices{par.s0};
  prices.reserve(opt.steps + 1);
  return crr_node_value(opt, par, prices, p_up);
}

}  // namespace oracle
