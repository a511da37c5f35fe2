#pragma once

namespace camtrap::special {

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
/// Continued-fraction evaluation (modified Lentz), accurate to ~1e-14.
double incomplete_beta(double a, double b, double x);

/// CDF of the F distribution with (d1, d2) degrees of freedom at f >= 0.
double f_cdf(double f, double d1, double d2);

/// Upper tail P(F > f).
double f_sf(double f, double d1, double d2);

}  // namespace camtrap::special
