#include "camtrap/glm.hpp"

#include <cmath>
#include <limits>

#include "camtrap/error.hpp"
#include "camtrap/special.hpp"

namespace camtrap::glm {

namespace {

double poisson_deviance(const VecXd& y, const VecXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double term = y[i] > 0.0 ? y[i] * std::log(y[i] / mu[i]) - (y[i] - mu[i]) : mu[i];
    dev += 2.0 * term;
  }
  return dev;
}

}  // namespace

GlmFit fit_quasipoisson(const VecXd& counts, const MatXd& design, const VecXd& offset) {
  const Eigen::Index n = counts.size();
  const Eigen::Index p = design.cols();
  if (design.rows() != n || offset.size() != n) {
    throw ValidationError("fit_quasipoisson: counts, design and offset row counts disagree");
  }
  if (n == 0) throw ValidationError("fit_quasipoisson: empty data");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(counts[i] >= 0.0) || counts[i] != std::floor(counts[i])) {
      throw ValidationError("fit_quasipoisson: counts must be non-negative integers");
    }
    if (!std::isfinite(offset[i])) {
      throw ValidationError("fit_quasipoisson: offset must be finite");
    }
  }
  Eigen::ColPivHouseholderQR<MatXd> qr(design);
  if (qr.rank() < p) {
    throw ValidationError("fit_quasipoisson: rank-deficient design matrix");
  }

  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-10;

  GlmFit fit;
  fit.n_obs = static_cast<int>(n);
  fit.df_residual = static_cast<int>(n - p);

  VecXd beta = VecXd::Zero(p);
  VecXd mu = counts.array() + 0.5;
  VecXd eta = mu.array().log().matrix() - offset;  // linear predictor minus offset
  mu = (eta + offset).array().exp().matrix();
  double dev = poisson_deviance(counts, mu);

  // The trace records fitted iterates only, not the mu = y + 0.5 start value.
  bool first = true;
  for (int iter = 1; iter <= kMaxIter; ++iter) {
    fit.iterations = iter;
    VecXd w = mu;  // Poisson: var = mu, (dmu/deta)^2 / var = mu
    VecXd z = eta + ((counts - mu).array() / mu.array()).matrix();

    MatXd xtwx = design.transpose() * w.asDiagonal() * design;
    VecXd xtwz = design.transpose() * w.asDiagonal() * z;
    Eigen::LDLT<MatXd> solver(xtwx);
    if (solver.info() != Eigen::Success) {
      throw ValidationError("fit_quasipoisson: weighted normal equations not solvable");
    }
    VecXd beta_new = solver.solve(xtwz);

    // Step halving keeps the deviance non-increasing.
    VecXd step = beta_new - beta;
    double dev_new = 0.0;
    VecXd eta_new, mu_new;
    double scale = 1.0;
    for (int half = 0; half < 30; ++half) {
      eta_new = design * (beta + scale * step);
      mu_new = (eta_new + offset).array().exp().matrix();
      dev_new = poisson_deviance(counts, mu_new);
      if (std::isfinite(dev_new) && (first || dev_new <= dev + 1e-12)) break;
      scale *= 0.5;
    }
    first = false;

    double max_rel_step = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      double denom = std::max(1.0, std::fabs(beta[j]));
      max_rel_step = std::max(max_rel_step, std::fabs(scale * step[j]) / denom);
    }

    beta += scale * step;
    eta = eta_new;
    mu = mu_new;
    dev = dev_new;
    fit.deviance_trace.push_back(dev);

    if (max_rel_step < kTol) {
      fit.converged = true;
      break;
    }
  }

  fit.coefficients = beta;
  fit.deviance = dev;

  double pearson = ((counts - mu).array().square() / mu.array()).sum();
  fit.dispersion = fit.df_residual > 0 ? pearson / fit.df_residual
                                       : std::numeric_limits<double>::quiet_NaN();

  MatXd xtwx = design.transpose() * mu.asDiagonal() * design;
  MatXd cov = Eigen::LDLT<MatXd>(xtwx).solve(MatXd::Identity(p, p));
  fit.standard_errors =
      (cov.diagonal().array() * (fit.df_residual > 0 ? fit.dispersion : 1.0)).sqrt().matrix();
  return fit;
}

FTestResult f_test(const GlmFit& full, const GlmFit& reduced) {
  if (full.n_obs != reduced.n_obs) {
    throw ValidationError("f_test: models were fitted to different data");
  }
  int df_diff = reduced.df_residual - full.df_residual;
  if (df_diff == 0) {
    if (std::fabs(reduced.deviance - full.deviance) < 1e-9) {
      return {0.0, 0, full.df_residual, 1.0};
    }
    throw ValidationError("f_test: models have equal df but different deviance (not nested)");
  }
  if (df_diff < 0) {
    throw ValidationError("f_test: reduced model must be nested in the full model");
  }
  if (full.df_residual <= 0) {
    throw ValidationError("f_test: full model has no residual degrees of freedom");
  }
  double num = (reduced.deviance - full.deviance) / df_diff;
  double F = num / full.dispersion;
  if (F < 0.0) F = 0.0;  // numerical guard, deviance is monotone under nesting
  FTestResult r;
  r.F = F;
  r.df_num = df_diff;
  r.df_den = full.df_residual;
  r.p_value = special::f_sf(F, df_diff, full.df_residual);
  return r;
}

double rate_ratio(const GlmFit& fit) {
  if (fit.coefficients.size() < 2) {
    throw ValidationError("rate_ratio: fit has no placement coefficient");
  }
  return std::exp(fit.coefficients[1]);
}

}  // namespace camtrap::glm
