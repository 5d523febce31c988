#pragma once

namespace icec {

// Scaled complementary error function erfcx(x) = exp(x^2) * erfc(x).
//
// For x >= 0 the result is bounded by 1 and decays like 1/(x*sqrt(pi)), so
// it never overflows no matter how large x is; this is the kernel that makes
// the effective interaction potentials evaluable on large grids where
// exp(x^2) and erfc(x) separately leave the double range.
//
// x < 0 uses the reflection erfcx(x) = 2*exp(x^2) - erfcx(-x), which
// overflows for x < about -26.6 (as does erfcx itself there).
double erfcx(double x);

} // namespace icec
