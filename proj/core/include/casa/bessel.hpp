#pragma once

namespace casa {

/// exp(-x) * I0(x) for x >= 0.  Power series below x = 15, asymptotic
/// expansion above; both branches keep well over 1e-12 relative accuracy.
double bessel_i0_scaled(double x);

/// exp(-x) * I1(x) for x >= 0.
double bessel_i1_scaled(double x);

/// A(x) = I1(x)/I0(x), in [0, 1).  Stable for large x since the
/// exponential scaling cancels in the ratio.
double bessel_ratio(double x);

}  // namespace casa
