#pragma once

namespace mavg {

// Standard normal cdf/pdf. The cdf goes through Cody's rational erfc
// approximation (relative error < 1e-15) rather than std::erfc so results do
// not depend on the platform libm.
double norm_cdf(double x);
double norm_pdf(double x);

double erf_cody(double x);
double erfc_cody(double x);

}  // namespace mavg
