#include "mavg/surrogate.hpp"

#include <stdexcept>

#include "mavg/parallel.hpp"

namespace mavg {

double terminal_continuation(const OptionSpec& opt, const ModelParams& params,
                             double prev_average, double spot) {
  const double w = (opt.window - 1.0) / opt.window;
  const double t_from = opt.t(opt.steps - 1);
  const double t_to = opt.maturity;
  if (const auto* bs = std::get_if<BlackScholesParams>(&params))
    return w * bs_call(spot, prev_average, t_to - t_from, bs->rate, bs->sigma);
  if (const auto* cs = std::get_if<ClewlowStricklandParams>(&params))
    return w * cs_call(*cs, spot, prev_average, t_from, t_to);
  throw std::invalid_argument(
      "terminal_continuation: no closed form for this model");
}

ContinuationSurrogate::ContinuationSurrogate(OptionSpec opt, ModelParams params)
    : opt_(opt), params_(std::move(params)) {
  opt_.validate();
  steps_.resize(opt_.steps + 1);
  present_.assign(opt_.steps + 1, 0);
  steps_[opt_.steps].kind = SurrogateStep::Kind::zero;  // C_N == 0
  present_[opt_.steps] = 1;
}

void ContinuationSurrogate::set_step(int n, SurrogateStep step) {
  if (n < opt_.window || n > opt_.steps)
    throw std::invalid_argument("surrogate: date outside the exercise range");
  steps_[n] = std::move(step);
  present_[n] = 1;
}

bool ContinuationSurrogate::has_step(int n) const {
  return n >= 0 && n < static_cast<int>(present_.size()) && present_[n];
}

const SurrogateStep& ContinuationSurrogate::step(int n) const {
  if (!has_step(n)) throw std::logic_error("surrogate: date not fitted");
  return steps_[n];
}

Eigen::VectorXd ContinuationSurrogate::value(
    int n, const Eigen::Ref<const Eigen::MatrixXd>& b,
    const Eigen::Ref<const Eigen::MatrixXd>& features) const {
  const SurrogateStep& s = step(n);
  const Eigen::Index rows = b.rows();
  if (s.kind == SurrogateStep::Kind::zero) return Eigen::VectorXd::Zero(rows);

  const int db = state_dims(opt_, n).reduced_b;
  if (b.cols() != db) throw std::invalid_argument("surrogate: state dimension mismatch");
  if (features.rows() != 0 && features.rows() != rows)
    throw std::invalid_argument("surrogate: feature row mismatch");
  const Eigen::Index n_feat = features.rows() == 0 ? 0 : features.cols();

  switch (s.kind) {
    case SurrogateStep::Kind::terminal_call: {
      if (n_feat != 0)
        throw std::invalid_argument("surrogate: terminal closed form takes no features");
      Eigen::VectorXd out(rows);
      parallel_for_blocks(static_cast<std::size_t>(rows), 4096,
                          [&](std::size_t lo, std::size_t hi) {
                            for (std::size_t i = lo; i < hi; ++i)
                              out(static_cast<Eigen::Index>(i)) = terminal_continuation(
                                  opt_, params_, b(static_cast<Eigen::Index>(i), 0),
                                  b(static_cast<Eigen::Index>(i), db - 1));
                          });
      return out;
    }
    case SurrogateStep::Kind::scalar:
      if (n_feat != 0)
        throw std::invalid_argument("surrogate: scalar step takes no features");
      return b.col(db - 1) * s.scalar_value;
    case SurrogateStep::Kind::gpr_similarity: {
      if (n_feat != 0)
        throw std::invalid_argument("surrogate: similarity step takes no features");
      if (s.model.d() != db - 1)
        throw std::invalid_argument("surrogate: similarity model dimension mismatch");
      Eigen::MatrixXd x = b.leftCols(db - 1);
      x.array().colwise() /= b.col(db - 1).array();
      return gpr::predict(s.model, x).cwiseProduct(b.col(db - 1));
    }
    case SurrogateStep::Kind::gpr_plain: {
      if (s.model.d() != n_feat + db)
        throw std::invalid_argument("surrogate: model dimension mismatch");
      Eigen::MatrixXd x(rows, n_feat + db);
      if (n_feat > 0) x.leftCols(n_feat) = features;
      x.rightCols(db) = b;
      return gpr::predict(s.model, x);
    }
    case SurrogateStep::Kind::zero:
      break;  // handled above
  }
  throw std::logic_error("surrogate: unreachable");
}

}  // namespace mavg
