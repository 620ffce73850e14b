#include "mavg/normal.hpp"

#include <cmath>

namespace mavg {

namespace {

// W. J. Cody's rational Chebyshev approximation of erf/erfc (SPECFUN calerf).
constexpr double kA[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                          3.77485237685302021e+02, 3.20937758913846947e+03,
                          1.85777706184603153e-01};
constexpr double kB[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                          1.28261652607737228e+03, 2.84423683343917062e+03};
constexpr double kC[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                          6.61191906371416295e+01, 2.98635138197400131e+02,
                          8.81952221241769090e+02, 1.71204761263407058e+03,
                          2.05107837782607147e+03, 1.23033935479799725e+03,
                          2.15311535474403846e-08};
constexpr double kD[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                          5.37181101862009858e+02, 1.62138957456669019e+03,
                          3.29079923573345963e+03, 4.36261909014324716e+03,
                          3.43936767414372164e+03, 1.23033935480374942e+03};
constexpr double kP[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                          1.25781726111229246e-01, 1.60837851487422766e-02,
                          6.58749161529837803e-04, 1.63153871373020978e-02};
constexpr double kQ[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                          5.27905102951428412e-01, 6.05183413124413191e-02,
                          2.33520497626869185e-03};

constexpr double kThresh = 0.46875;
constexpr double kXSmall = 1.11e-16;
constexpr double kXBig = 26.543;
constexpr double kInvSqrtPi = 5.6418958354775628695e-01;

// erf for |x| <= 0.46875.
double erf_small(double x) {
  const double y = std::fabs(x);
  const double ysq = y > kXSmall ? y * y : 0.0;
  double xnum = kA[4] * ysq;
  double xden = ysq;
  for (int i = 0; i < 3; ++i) {
    xnum = (xnum + kA[i]) * ysq;
    xden = (xden + kB[i]) * ysq;
  }
  return x * (xnum + kA[3]) / (xden + kB[3]);
}

// erfc for y = |x| > 0.46875; caller handles sign.
double erfc_large(double y) {
  double result;
  if (y <= 4.0) {
    double xnum = kC[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + kC[i]) * y;
      xden = (xden + kD[i]) * y;
    }
    result = (xnum + kC[7]) / (xden + kD[7]);
  } else {
    if (y >= kXBig) return 0.0;
    const double ysq = 1.0 / (y * y);
    double xnum = kP[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + kP[i]) * ysq;
      xden = (xden + kQ[i]) * ysq;
    }
    result = ysq * (xnum + kP[4]) / (xden + kQ[4]);
    result = (kInvSqrtPi - result) / y;
  }
  // split exp(-y^2) to keep the tail accurate
  const double ycut = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ycut) * (y + ycut);
  return std::exp(-ycut * ycut) * std::exp(-del) * result;
}

}  // namespace

double erf_cody(double x) {
  const double y = std::fabs(x);
  if (y <= kThresh) return erf_small(x);
  const double r = 1.0 - erfc_large(y);
  return x < 0.0 ? -r : r;
}

double erfc_cody(double x) {
  const double y = std::fabs(x);
  if (y <= kThresh) return 1.0 - erf_small(x);
  const double r = erfc_large(y);
  return x < 0.0 ? 2.0 - r : r;
}

double norm_cdf(double x) { return 0.5 * erfc_cody(-x * 7.0710678118654752440e-01); }

double norm_pdf(double x) {
  return 3.9894228040143267794e-01 * std::exp(-0.5 * x * x);
}

}  // namespace mavg
