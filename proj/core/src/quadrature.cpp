#include "mavg/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Dense>

namespace mavg::quad {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

struct HermiteEval {
  long double below;        // p_{Q-1}(x), orthonormal for weight exp(-x^2)
  long double at;           // p_Q(x)
  long double christoffel;  // sum_{k<Q} p_k(x)^2 = 1/weight at a node
};

HermiteEval orthonormal_hermite(int order, long double x) {
  long double pm = 0.0L;
  long double pc = 1.0L / std::sqrt(std::sqrt(std::acos(-1.0L)));
  long double sum = pc * pc;
  for (int k = 0; k < order; ++k) {
    const long double pn =
        x * pc * std::sqrt(2.0L / (k + 1)) -
        pm * std::sqrt(static_cast<long double>(k) / (k + 1));
    pm = pc;
    pc = pn;
    if (k + 1 < order) sum += pc * pc;
  }
  return {pm, pc, sum};
}

GhRule build_rule(int order) {
  // Jacobi matrix of the (physicists') Hermite recurrence: zero diagonal,
  // off-diagonal sqrt(k/2). Eigenvalues seed the nodes; a Newton polish on
  // the orthonormal recurrence in extended precision brings nodes and
  // weights to double roundoff — the eigensolver alone leaves ~1e-11 node
  // error, which degree ~2Q-1 monomials amplify well above 1e-10 relative.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(0.5 * k);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gh_rule: eigen decomposition failed");

  GhRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int q = 0; q < order; ++q) {
    long double x = es.eigenvalues()(q);
    for (int it = 0; it < 3; ++it) {
      const HermiteEval e = orthonormal_hermite(order, x);
      x -= e.at / (std::sqrt(2.0L * order) * e.below);
    }
    rule.nodes[q] = static_cast<double>(x);
    rule.weights[q] =
        static_cast<double>(1.0L / orthonormal_hermite(order, x).christoffel);
  }

  // Enforce the symmetry the eigensolver only delivers to rounding error, so
  // node antisymmetry and weight symmetry hold exactly as stored.
  for (int q = 0; q < order / 2; ++q) {
    const int m = order - 1 - q;
    const double node = 0.5 * (rule.nodes[m] - rule.nodes[q]);
    rule.nodes[q] = -node;
    rule.nodes[m] = node;
    const double w = 0.5 * (rule.weights[q] + rule.weights[m]);
    rule.weights[q] = w;
    rule.weights[m] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;

  double sum = 0.0;
  for (double w : rule.weights) {
    if (!(w > 0.0)) throw std::runtime_error("gh_rule: nonpositive weight");
    sum += w;
  }
  if (std::fabs(sum - kSqrtPi) > 1e-12 * kSqrtPi)
    throw std::runtime_error("gh_rule: weights do not sum to sqrt(pi)");
  rule.weight_sum = sum;
  return rule;
}

}  // namespace

const GhRule& gh_rule(int order) {
  if (order < 1 || order > 128)
    throw std::invalid_argument("gh_rule: order must be in [1, 128]");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<const GhRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end())
    it = cache.emplace(order, std::make_unique<const GhRule>(build_rule(order))).first;
  return *it->second;
}

double gh_expect(const std::function<double(double)>& f, double mu, double sigma,
                 int order) {
  if (sigma < 0.0) throw std::domain_error("gh_expect: sigma must be >= 0");
  if (sigma == 0.0) return f(mu);
  const GhRule& rule = gh_rule(order);
  const double scale = 1.4142135623730950488 * sigma;
  double acc = 0.0;
  for (int q = 0; q < rule.order; ++q)
    acc += rule.weights[q] * f(mu + scale * rule.nodes[q]);
  return acc / rule.weight_sum;
}

}  // namespace mavg::quad
