#pragma once

#include <vector>

#include "camtrap/types.hpp"

namespace camtrap::glm {

/// Result of a quasi-Poisson fit. Coefficients are on the log-rate scale;
/// standard errors are already scaled by sqrt(dispersion). dispersion is the
/// Pearson estimate (NaN when df_residual == 0).
struct GlmFit {
  VecXd coefficients;
  VecXd standard_errors;
  double dispersion = 1.0;
  double deviance = 0.0;
  int df_residual = 0;
  int n_obs = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> deviance_trace;
};

struct FTestResult {
  double F = 0.0;
  int df_num = 0;
  int df_den = 0;
  double p_value = 1.0;
};

/// Poisson log-link IRLS with a fixed offset (log effort). Convergence when
/// the largest relative coefficient step falls below 1e-10, capped at 50
/// iterations; the deviance is kept non-increasing by step halving.
/// Dispersion is Pearson chi-square over residual df; standard errors are
/// quasi-Poisson (sqrt(dispersion)-scaled).
GlmFit fit_quasipoisson(const VecXd& counts, const MatXd& design, const VecXd& offset);

/// Overdispersion-adjusted F test of a nested pair fitted to the same data:
/// F = ((dev_reduced - dev_full) / df_diff) / dispersion_full, with p from
/// F(df_diff, df_residual_full).
FTestResult f_test(const GlmFit& full, const GlmFit& reduced);

/// exp of the placement coefficient (column 1 by the intercept-first design
/// convention); > 1 means trail excess.
double rate_ratio(const GlmFit& fit);

}  // namespace camtrap::glm
