#pragma once

#include <functional>
#include <vector>

namespace mavg::quad {

// Gauss-Hermite rule for the weight exp(-x^2) (physicists' convention):
//   sum_q weights[q] f(nodes[q]) ~ int f(x) exp(-x^2) dx,
// exact for polynomials of degree <= 2*order - 1; weights sum to sqrt(pi).
// For X ~ N(mu, sigma^2):
//   E f(X) = (1/sqrt(pi)) sum_q weights[q] f(mu + sqrt(2) sigma nodes[q]).
struct GhRule {
  int order = 0;
  std::vector<double> nodes;    // ascending, antisymmetric as stored
  std::vector<double> weights;  // positive, symmetric as stored
  double weight_sum = 0.0;
};

// Golub-Welsch construction; cached per order, safe for concurrent callers.
const GhRule& gh_rule(int order);

// Gaussian expectation of f under N(mu, sigma^2); sigma == 0 short-circuits
// to f(mu), sigma < 0 is a domain error.
double gh_expect(const std::function<double(double)>& f, double mu, double sigma,
                 int order);

}  // namespace mavg::quad
