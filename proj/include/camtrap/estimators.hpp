#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camtrap/store.hpp"
#include "camtrap/types.hpp"

namespace camtrap::stats {

using DeploymentFilter = std::function<bool(const Deployment&)>;

/// Which effort denominator detection rates use. Effective is the default;
/// nominal matches studies that ignore downtime.
enum class EffortBasis { effective, nominal };

struct RateEstimate {
  std::string species_code;
  std::int64_t y = 0;    // sequence count
  double t = 0.0;        // camera-days
  double rate = 0.0;     // sequences per camera-day
};

/// Deployment x species presence (1/0; -1 marks missing effort in the
/// per-day variant).
struct IncidenceMatrix {
  std::vector<std::string> deployments;  // row labels
  std::vector<std::string> species;      // column labels (or day bins)
  IncidenceCells cells;
};

struct AccumulationCurve {
  std::vector<int> effort;
  std::vector<double> sobs_mean, sobs_sd;
  std::vector<double> jack1_mean, jack1_sd;
  int n_resamples = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
};

struct EffortBands {
  std::vector<int> effort;
  std::vector<double> mean, min, max, lo95, hi95;
  int n_resamples = 1000;
  std::uint64_t seed = 0;
};

/// Sequences of `species` per camera-day over the filtered deployments.
/// Flagged (unresolved) sequences are not counted. Throws on zero effort.
RateEstimate detection_rate(const ProjectStore& store, const std::string& species,
                            const DeploymentFilter& filter = nullptr,
                            EffortBasis basis = EffortBasis::effective);

/// All species present in the store, with their rates, sorted by descending
/// rate (ties by species code).
std::vector<RateEstimate> detection_rates(const ProjectStore& store,
                                          const DeploymentFilter& filter = nullptr,
                                          EffortBasis basis = EffortBasis::effective);

std::vector<std::string> species_list(const ProjectStore& store);

/// Deployment x species presence matrix from counted sequences.
IncidenceMatrix build_incidence(const ProjectStore& store);

/// Per-day detection history: rows deployments, columns day bins of width
/// `granularity_days`. Cells: 1 detected, 0 checked but not detected, -1 no
/// effort (downtime). Deployments with no uptime at all are omitted.
IncidenceMatrix detection_history(const ProjectStore& store, const std::string& species,
                                  int granularity_days = 1);

/// Monte Carlo rarefaction plus first-order jackknife over deployment
/// orderings. Exhaustive enumeration replaces sampling when the number of
/// orderings is at most 5040 (n <= 7). `efforts` empty means 1..n.
AccumulationCurve rarefaction(const IncidenceMatrix& inc, int n_resamples,
                              std::uint64_t seed, std::span<const int> efforts = {},
                              unsigned threads = 1);

/// First-order jackknife richness: Sobs + Q1 (n-1)/n.
double jackknife1(const IncidenceMatrix& inc);

/// Bootstrap (with replacement) bands of the mean per-deployment rate at each
/// effort level: mean, min, max and the 2.5/97.5 percentiles across resamples.
EffortBands effort_bands(std::span<const double> per_deployment_rates,
                         std::span<const int> effort_grid, int n_resamples,
                         std::uint64_t seed, unsigned threads = 1);

/// Type-7 (linear interpolation) percentile of an ascending sample, p in
/// [0, 1]; the convention the effort bands use. NaN on empty input.
double percentile(std::span<const double> sorted, double p);

/// Per-deployment rates for one species (deployments with zero effort are
/// skipped); input for effort_bands.
std::vector<double> per_deployment_rates(const ProjectStore& store,
                                         const std::string& species,
                                         EffortBasis basis = EffortBasis::effective);

struct ActivityHistogram {
  int bin_minutes = 60;
  std::vector<std::int64_t> counts;  // 1440 / bin_minutes bins from midnight UTC

  std::int64_t total() const;
};

/// Counts of sequence start times per time-of-day bin. bin_minutes must
/// divide 1440.
ActivityHistogram activity_histogram(const ProjectStore& store, const std::string& species,
                                     int bin_minutes = 60);

struct CaptureHistory {
  std::vector<std::string> individuals;    // row labels
  std::vector<std::string> occasions;      // deployment ids, time order
  IncidenceCells encounters;               // 1/0
  std::int64_t n_unidentified = 0;         // sequences excluded for lacking an ID
};

/// Individual x occasion encounter matrix for a pattern-identifiable species,
/// for export to external mark-recapture tools.
CaptureHistory capture_history_export(const ProjectStore& store, const std::string& species);

struct FailureSummary {
  std::int64_t n_cameras = 0;
  double never_failed = 0.0;
  std::int64_t n_failures = 0;
  // Shares of failure events per category (lens_blur, humidity_circuit,
  // other), summing to 1 when n_failures > 0.
  double lens_blur = 0.0;
  double humidity_circuit = 0.0;
  double other = 0.0;
};

FailureSummary failure_summary(std::span<const Camera> cameras);

struct MonthlyDistance {
  int month = 0;          // 1..12
  std::int64_t n = 0;
  double mean_m = 0.0;    // NaN when n == 0
  double se_m = 0.0;      // NaN when n < 2
};

/// Per-calendar-month mean and standard error of walk-test detection
/// distances.
std::vector<MonthlyDistance> seasonal_detection_distance(std::span<const WalkTest> walktests);

}  // namespace camtrap::stats
