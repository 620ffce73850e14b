#include "mavg/state.hpp"

#include <algorithm>
#include <stdexcept>

namespace mavg {

void OptionSpec::validate() const {
  if (!(maturity > 0.0)) throw std::invalid_argument("OptionSpec: maturity must be > 0");
  if (window < 2) throw std::invalid_argument("OptionSpec: window must be >= 2");
  if (steps < window) throw std::invalid_argument("OptionSpec: steps must be >= window");
}

StateDims state_dims(const OptionSpec& opt, int n) {
  if (n < 1 || n > opt.steps) throw std::invalid_argument("state_dims: n out of range");
  const int da = std::min(opt.window, opt.steps - n + 2);
  return StateDims{da, da - 1, da - 2};
}

int feature_count(const OptionSpec& opt, int n, int j) {
  if (n < 1 || n > opt.steps) throw std::invalid_argument("feature_count: n out of range");
  if (j < 0) throw std::invalid_argument("feature_count: j must be >= 0");
  return std::min(opt.steps - n, j) + 1;
}

double payoff(const OptionSpec& opt, const AverageState& a) {
  if (a.repr != StateRepr::full_a) throw std::invalid_argument("payoff: expects full_a");
  if (a.n < opt.window) throw std::invalid_argument("payoff: not exercisable before t_M");
  if (static_cast<int>(a.v.size()) != state_dims(opt, a.n).full_a)
    throw std::invalid_argument("payoff: dimension mismatch");
  return std::max(0.0, a.v.back() - a.v.front());
}

namespace detail {

void advance_b(int window, int d_next, const double* b, double s_next, double* out) {
  for (int k = 0; k + 1 < d_next; ++k)
    out[k] = ((window - k - 2) * b[k + 1] + s_next) / (window - k - 1);
  out[d_next - 1] = s_next;
}

double next_full_average(int window, double b_first, double s_next) {
  return ((window - 1) * b_first + s_next) / window;
}

}  // namespace detail

AverageState advance(const OptionSpec& opt, const AverageState& state, double s_next) {
  if (state.repr == StateRepr::similarity_c)
    throw std::invalid_argument("advance: similarity coordinates cannot be advanced");
  if (!(s_next > 0.0)) throw std::invalid_argument("advance: next price must be > 0");
  if (state.n + 1 > opt.steps) throw std::invalid_argument("advance: past the last date");

  const StateDims cur = state_dims(opt, state.n);
  const StateDims nxt = state_dims(opt, state.n + 1);
  const int m = opt.window;
  AverageState out;
  out.n = state.n + 1;
  out.repr = state.repr;

  if (state.repr == StateRepr::full_a) {
    if (static_cast<int>(state.v.size()) != cur.full_a)
      throw std::invalid_argument("advance: dimension mismatch");
    out.v.resize(nxt.full_a);
    for (int k = 0; k + 1 < nxt.full_a; ++k)
      out.v[k] = ((m - k - 1) * state.v[k + 1] + s_next) / (m - k);
    out.v[nxt.full_a - 1] = s_next;
  } else {
    if (static_cast<int>(state.v.size()) != cur.reduced_b)
      throw std::invalid_argument("advance: dimension mismatch");
    out.v.resize(nxt.reduced_b);
    detail::advance_b(m, nxt.reduced_b, state.v.data(), s_next, out.v.data());
  }
  return out;
}

AverageState reconstruct_full(const OptionSpec& opt, const AverageState& b_n,
                              const AverageState& b_next) {
  if (b_n.repr != StateRepr::reduced_b || b_next.repr != StateRepr::reduced_b)
    throw std::invalid_argument("reconstruct_full: expects reduced_b states");
  if (b_next.n != b_n.n + 1)
    throw std::invalid_argument("reconstruct_full: dates must be consecutive");
  if (static_cast<int>(b_n.v.size()) != state_dims(opt, b_n.n).reduced_b ||
      static_cast<int>(b_next.v.size()) != state_dims(opt, b_next.n).reduced_b)
    throw std::invalid_argument("reconstruct_full: dimension mismatch");

  AverageState out;
  out.n = b_next.n;
  out.repr = StateRepr::full_a;
  out.v.resize(b_next.v.size() + 1);
  out.v[0] = detail::next_full_average(opt.window, b_n.v.front(), b_next.v.back());
  std::copy(b_next.v.begin(), b_next.v.end(), out.v.begin() + 1);
  return out;
}

std::pair<AverageState, double> similarity_reduce(const AverageState& b) {
  if (b.repr != StateRepr::reduced_b)
    throw std::invalid_argument("similarity_reduce: expects reduced_b");
  if (b.v.empty()) throw std::invalid_argument("similarity_reduce: empty state");
  const double scale = b.v.back();
  if (!(scale > 0.0)) throw std::invalid_argument("similarity_reduce: spot must be > 0");

  AverageState c;
  c.n = b.n;
  c.repr = StateRepr::similarity_c;
  c.v.resize(b.v.size() - 1);
  for (std::size_t k = 0; k + 1 < b.v.size(); ++k) c.v[k] = b.v[k] / scale;
  return {std::move(c), scale};
}

}  // namespace mavg
