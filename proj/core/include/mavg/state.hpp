#pragma once

#include <utility>
#include <vector>

namespace mavg {

// Bermudan moving-average call on the grid t_n = n T / N: exercisable at
// n = M..N for max(0, S_{t_n} - mean of the last M prices).
struct OptionSpec {
  double maturity = 0.0;  // T
  int steps = 0;          // N
  int window = 0;         // M
  double dt() const { return maturity / steps; }
  double t(int n) const { return dt() * n; }
  void validate() const;  // T > 0 and 2 <= M <= N
};

// State coordinates at date t_n (entries ordered oldest average first):
//   full_a       A_n: trailing averages ending at t_n, last entry the spot;
//                entry i averages the last d(A)-i+... (see state_dims) prices,
//                first entry the full M window once n >= M.
//   reduced_b    B_n: A_n with its first entry dropped.
//   similarity_c C_n: B_n head divided by the spot (Black-Scholes similarity
//                coordinates; empty for M = 2).
enum class StateRepr { full_a, reduced_b, similarity_c };

struct StateDims {
  int full_a = 0;
  int reduced_b = 0;
  int similarity_c = 0;
};

struct AverageState {
  int n = 0;
  StateRepr repr = StateRepr::full_a;
  std::vector<double> v;
};

// d(A) = min(M, N - n + 2) for 1 <= n <= N; B and C drop one entry each.
StateDims state_dims(const OptionSpec& opt, int n);

// Rough-Bergomi conditioning feature count at date n: min(N - n, j) + 1.
int feature_count(const OptionSpec& opt, int n, int j);

// max(0, spot - full window average); requires full_a and n >= M.
double payoff(const OptionSpec& opt, const AverageState& a);

// One-date update by the next price s_next > 0 (full_a or reduced_b).
AverageState advance(const OptionSpec& opt, const AverageState& state, double s_next);

// Rebuild A_{n+1} from (B_n, B_{n+1}); the dropped full-window average is
// ((M-1) B_n[0] + spot_{n+1}) / M.
AverageState reconstruct_full(const OptionSpec& opt, const AverageState& b_n,
                              const AverageState& b_next);

// (C_n, scale): scale is the spot (last entry), C the head divided by it.
std::pair<AverageState, double> similarity_reduce(const AverageState& b);

namespace detail {

// Raw B-state update, no validation: out[k] = ((M-k-2) b[k+1] + s)/(M-k-1)
// for k < d_next-1 and out[d_next-1] = s. In-place use (out == b) is safe.
void advance_b(int window, int d_next, const double* b, double s_next, double* out);

// Full-window average one date ahead: ((M-1) b_first + s_next) / M.
double next_full_average(int window, double b_first, double s_next);

}  // namespace detail

}  // namespace mavg
