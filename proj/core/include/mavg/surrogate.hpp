#pragma once

#include <vector>

#include <Eigen/Core>

#include "mavg/gpr.hpp"
#include "mavg/models.hpp"
#include "mavg/state.hpp"

namespace mavg {

// Closed-form continuation value one date before expiry (BS and CS): with one
// exercise left, max(0, S_N - avg_M(N)) = ((M-1)/M) max(0, S_N - K) for
// K = prev_average, the plain average of the last M-1 observed prices
// (= B_{N-1} first entry), so
//   C_{N-1}(B) = ((M-1)/M) Call(t_{N-1}, t_N, spot, K).
// Throws for rough Bergomi (no one-step closed form).
double terminal_continuation(const OptionSpec& opt, const ModelParams& params,
                             double prev_average, double spot);

// One date of the fitted continuation function. Kinds:
//   zero            identically zero (date N; degenerate all-zero responses)
//   terminal_call   the closed form above (n = N-1, BS/CS)
//   scalar          unit-spot constant, value = spot * scalar_value
//                   (Black-Scholes M = 2, where similarity leaves no state)
//   gpr_similarity  GPR on C_n = head/spot, value = spot * prediction (BS)
//   gpr_plain       GPR on [features, B_n] as given
struct SurrogateStep {
  enum class Kind { zero, terminal_call, scalar, gpr_similarity, gpr_plain };
  Kind kind = Kind::zero;
  double scalar_value = 0.0;
  gpr::Model model;
};

// The backward-induction artifact: one continuation estimator per exercise
// date n = M..N (C_N == 0), evaluable on batches of reduced states. Immutable
// once built; safe to query concurrently.
class ContinuationSurrogate {
 public:
  ContinuationSurrogate() = default;
  ContinuationSurrogate(OptionSpec opt, ModelParams params);

  const OptionSpec& option() const { return opt_; }
  const ModelParams& params() const { return params_; }

  void set_step(int n, SurrogateStep step);
  bool has_step(int n) const;
  const SurrogateStep& step(int n) const;

  // Continuation values at date n for reduced states B_n (one row per state,
  // spot in the last column). `features` carries the rough-Bergomi
  // conditioning columns and must have zero columns otherwise.
  Eigen::VectorXd value(int n, const Eigen::Ref<const Eigen::MatrixXd>& b,
                        const Eigen::Ref<const Eigen::MatrixXd>& features) const;

 private:
  OptionSpec opt_;
  ModelParams params_;
  std::vector<SurrogateStep> steps_;
  std::vector<char> present_;
};

}  // namespace mavg
