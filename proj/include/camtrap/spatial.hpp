#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "camtrap/store.hpp"
#include "camtrap/types.hpp"

namespace camtrap::spatial {

struct SemivariogramBin {
  double lower_m = 0.0;
  double upper_m = 0.0;
  std::int64_t n_pairs = 0;
  double mean = 0.0;  // mean of (z_i - z_j)^2 / 2 over pairs in the class
  double se = 0.0;    // sd / sqrt(n_pairs); 0 when n_pairs < 2
  double sd = 0.0;
};

struct Semivariogram {
  std::vector<SemivariogramBin> bins;
  std::int64_t dropped_pairs = 0;  // pairs farther than the last class
};

/// 25 m distance classes out to 300 m.
std::vector<std::pair<double, double>> default_bins();

/// Empirical semivariogram of a scalar field sampled at planar points.
/// `coords_m` is n x 2 (easting, northing); `values` has one entry per row.
/// Classes are lower-inclusive, upper-exclusive; coincident points fall in the
/// first class. Throws if fewer than two points or every class ends up empty.
Semivariogram semivariogram(const VecXd& values, const MatXd& coords_m,
                            std::span<const std::pair<double, double>> bins);

struct WindowSpec {
  int window_days = 61;  // about two months
  int start_offset_days = 0;

  void validate() const;
};

struct WindowResult {
  UnixSeconds window_start = 0;
  UnixSeconds window_end = 0;
  Semivariogram variogram;
  bool skipped = false;
  std::string note;  // reason when skipped
};

/// Per-window semivariograms of one species' per-location detection rates.
/// Windows tile the full deployment span; a location is active in a window
/// when it has positive effective effort there. Windows with fewer than two
/// active locations, or with no detections of the species, are skipped with a
/// note rather than dropped silently.
std::vector<WindowResult> windowed_semivariogram(const ProjectStore& store,
                                                 const std::string& species,
                                                 const WindowSpec& window,
                                                 std::span<const std::pair<double, double>> bins);

/// Smallest camera spacing from which the field looks uncorrelated: the first
/// class lower bound such that every later non-empty class mean lies within
/// 2 SE of the sill (sill = mean over the top half of the distance classes).
/// If even the last class is elevated, returns its upper bound.
double independence_threshold(std::span<const SemivariogramBin> bins);

}  // namespace camtrap::spatial
