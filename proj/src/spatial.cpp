#include "camtrap/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "camtrap/error.hpp"

namespace camtrap::spatial {

std::vector<std::pair<double, double>> default_bins() {
  std::vector<std::pair<double, double>> bins;
  for (int i = 0; i < 12; ++i) bins.emplace_back(25.0 * i, 25.0 * (i + 1));
  return bins;
}

Semivariogram semivariogram(const VecXd& values, const MatXd& coords_m,
                            std::span<const std::pair<double, double>> bins) {
  const Eigen::Index n = values.size();
  if (coords_m.rows() != n || coords_m.cols() != 2)
    throw ValidationError("semivariogram: coords must be n x 2 matching the value vector");
  if (n < 2) throw ValidationError("semivariogram: needs at least two locations");
  if (bins.empty()) throw ValidationError("semivariogram: needs at least one distance class");
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b].first >= bins[b].second)
      throw ValidationError("semivariogram: class lower bound must be below upper bound");
    if (b > 0 && bins[b].first < bins[b - 1].second)
      throw ValidationError("semivariogram: classes must be ordered and non-overlapping");
  }

  std::vector<std::vector<double>> gamma(bins.size());
  Semivariogram out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (coords_m.row(i) - coords_m.row(j)).norm();
      const double g = 0.5 * (values[i] - values[j]) * (values[i] - values[j]);
      std::size_t b = 0;
      if (d > 0.0) {
        while (b < bins.size() && !(d >= bins[b].first && d < bins[b].second)) ++b;
      }
      if (b == bins.size()) {
        ++out.dropped_pairs;
        continue;
      }
      gamma[b].push_back(g);
    }
  }

  bool any = false;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    SemivariogramBin bin;
    bin.lower_m = bins[b].first;
    bin.upper_m = bins[b].second;
    bin.n_pairs = static_cast<std::int64_t>(gamma[b].size());
    if (bin.n_pairs > 0) {
      any = true;
      double mean = 0.0;
      for (double g : gamma[b]) mean += g;
      mean /= static_cast<double>(bin.n_pairs);
      bin.mean = mean;
      if (bin.n_pairs > 1) {
        double ss = 0.0;
        for (double g : gamma[b]) ss += (g - mean) * (g - mean);
        bin.sd = std::sqrt(ss / static_cast<double>(bin.n_pairs - 1));
        bin.se = bin.sd / std::sqrt(static_cast<double>(bin.n_pairs));
      }
    }
    out.bins.push_back(bin);
  }
  if (!any) throw ValidationError("semivariogram: every distance class is empty");
  return out;
}

void WindowSpec::validate() const {
  if (window_days < 1) throw ValidationError("window_days must be at least 1");
  if (start_offset_days < 0) throw ValidationError("start_offset_days must be non-negative");
}

namespace {

// Effective effort (days) of one deployment restricted to [a, b).
double window_effort(const ProjectStore& store, const Deployment& d, UnixSeconds a,
                     UnixSeconds b) {
  const UnixSeconds lo = std::max(a, d.start);
  const UnixSeconds hi = std::min(b, d.end);
  if (hi <= lo) return 0.0;
  std::int64_t up = hi - lo;
  for (const auto& iv : downtime_intervals(d, store.heartbeats(d.deployment_id)))
    up -= std::max<std::int64_t>(0, std::min(hi, iv.end) - std::max(lo, iv.begin));
  return static_cast<double>(std::max<std::int64_t>(0, up)) / kSecondsPerDay;
}

}  // namespace

std::vector<WindowResult> windowed_semivariogram(const ProjectStore& store,
                                                 const std::string& species,
                                                 const WindowSpec& window,
                                                 std::span<const std::pair<double, double>> bins) {
  window.validate();
  if (store.deployments().empty())
    throw ValidationError("windowed_semivariogram: store has no deployments");

  UnixSeconds span_lo = store.deployments().front().start;
  UnixSeconds span_hi = store.deployments().front().end;
  for (const auto& d : store.deployments()) {
    span_lo = std::min(span_lo, d.start);
    span_hi = std::max(span_hi, d.end);
  }
  span_lo += static_cast<std::int64_t>(window.start_offset_days) * 86400;

  // Sequence starts of this species, keyed by deployment.
  std::unordered_map<std::string, std::vector<UnixSeconds>> starts;
  {
    std::unordered_map<std::string, const Sequence*> counted;
    for (const auto& s : store.sequences())
      if (s.status != SequenceStatus::flagged) counted.emplace(s.sequence_id, &s);
    for (const auto& det : store.detections()) {
      if (det.species_code != species) continue;
      auto it = counted.find(det.sequence_id);
      if (it != counted.end()) starts[it->second->deployment_id].push_back(it->second->start);
    }
  }

  const std::int64_t step = static_cast<std::int64_t>(window.window_days) * 86400;
  std::vector<WindowResult> out;
  for (UnixSeconds w = span_lo; w < span_hi; w += step) {
    WindowResult res;
    res.window_start = w;
    res.window_end = std::min<UnixSeconds>(w + step, span_hi);

    // location -> (sequences, effort days) within the window
    std::map<std::string, std::pair<std::int64_t, double>> by_location;
    for (const auto& d : store.deployments()) {
      const double t = window_effort(store, d, res.window_start, res.window_end);
      if (t <= 0.0) continue;
      auto& cell = by_location[d.location_id];
      cell.second += t;
      if (auto it = starts.find(d.deployment_id); it != starts.end())
        for (UnixSeconds s : it->second)
          if (s >= res.window_start && s < res.window_end) ++cell.first;
    }

    if (by_location.size() < 2) {
      res.skipped = true;
      res.note = "fewer than two active locations";
      out.push_back(std::move(res));
      continue;
    }
    std::int64_t total = 0;
    for (const auto& [loc, cell] : by_location) total += cell.first;
    if (total == 0) {
      res.skipped = true;
      res.note = "no detections of " + species + " in window";
      out.push_back(std::move(res));
      continue;
    }

    VecXd values(static_cast<Eigen::Index>(by_location.size()));
    MatXd coords(static_cast<Eigen::Index>(by_location.size()), 2);
    Eigen::Index i = 0;
    for (const auto& [loc, cell] : by_location) {
      const CameraLocation* cl = store.find_location(loc);
      values[i] = static_cast<double>(cell.first) / cell.second;
      coords(i, 0) = cl->easting_m;
      coords(i, 1) = cl->northing_m;
      ++i;
    }
    res.variogram = semivariogram(values, coords, bins);
    out.push_back(std::move(res));
  }
  return out;
}

double independence_threshold(std::span<const SemivariogramBin> bins) {
  std::size_t filled = 0;
  for (const auto& b : bins)
    if (b.n_pairs > 0) ++filled;
  if (filled < 2)
    throw ValidationError("independence_threshold: needs at least two non-empty classes");

  // Sill from the top half of the distance classes, which short-range
  // structure cannot reach.
  const std::size_t half = bins.size() / 2;
  double sill = 0.0;
  std::size_t n_sill = 0;
  for (std::size_t b = half; b < bins.size(); ++b) {
    if (bins[b].n_pairs == 0) continue;
    sill += bins[b].mean;
    ++n_sill;
  }
  if (n_sill == 0)
    throw ValidationError("independence_threshold: no pairs in the upper distance classes");
  sill /= static_cast<double>(n_sill);

  const auto compatible = [&](const SemivariogramBin& b) {
    return b.n_pairs == 0 || std::abs(b.mean - sill) <= 2.0 * b.se;
  };
  for (std::size_t i = 0; i < bins.size(); ++i) {
    bool flat_from_here = true;
    for (std::size_t j = i; j < bins.size(); ++j)
      if (!compatible(bins[j])) {
        flat_from_here = false;
        break;
      }
    if (flat_from_here) return bins[i].lower_m;
  }
  return bins.back().upper_m;
}

}  // namespace camtrap::spatial
