#include "camtrap/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "camtrap/error.hpp"
#include "camtrap/parallel.hpp"
#include "camtrap/random.hpp"

namespace camtrap::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Flagged sequences are provisional (pending manual merge/split) and are not
// counted by any estimator.
std::unordered_map<std::string, const Sequence*> counted_sequences(const ProjectStore& store) {
  std::unordered_map<std::string, const Sequence*> out;
  out.reserve(store.sequences().size());
  for (const auto& s : store.sequences())
    if (s.status != SequenceStatus::flagged) out.emplace(s.sequence_id, &s);
  return out;
}

double effort_of(const ProjectStore& store, const Deployment& d, EffortBasis basis) {
  return basis == EffortBasis::nominal ? d.nominal_days : store.deployment_uptime(d).days;
}

}  // namespace

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return kNaN;
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

RateEstimate detection_rate(const ProjectStore& store, const std::string& species,
                            const DeploymentFilter& filter, EffortBasis basis) {
  std::unordered_set<std::string> selected;
  double t = 0.0;
  for (const auto& d : store.deployments()) {
    if (filter && !filter(d)) continue;
    selected.insert(d.deployment_id);
    t += effort_of(store, d, basis);
  }
  if (selected.empty() || t <= 0.0)
    throw ValidationError("detection_rate: selected deployments have zero camera-days of effort");

  const auto counted = counted_sequences(store);
  std::int64_t y = 0;
  for (const auto& det : store.detections()) {
    if (det.species_code != species) continue;
    auto it = counted.find(det.sequence_id);
    if (it != counted.end() && selected.count(it->second->deployment_id)) ++y;
  }
  return {species, y, t, static_cast<double>(y) / t};
}

std::vector<RateEstimate> detection_rates(const ProjectStore& store,
                                          const DeploymentFilter& filter, EffortBasis basis) {
  std::unordered_set<std::string> selected;
  double t = 0.0;
  for (const auto& d : store.deployments()) {
    if (filter && !filter(d)) continue;
    selected.insert(d.deployment_id);
    t += effort_of(store, d, basis);
  }
  if (selected.empty() || t <= 0.0)
    throw ValidationError("detection_rates: selected deployments have zero camera-days of effort");

  const auto counted = counted_sequences(store);
  std::map<std::string, std::int64_t> y_by_species;
  for (const auto& sp : species_list(store)) y_by_species[sp] = 0;
  for (const auto& det : store.detections()) {
    auto it = counted.find(det.sequence_id);
    if (it != counted.end() && selected.count(it->second->deployment_id))
      ++y_by_species[det.species_code];
  }

  std::vector<RateEstimate> out;
  out.reserve(y_by_species.size());
  for (const auto& [sp, y] : y_by_species)
    out.push_back({sp, y, t, static_cast<double>(y) / t});
  std::sort(out.begin(), out.end(), [](const RateEstimate& a, const RateEstimate& b) {
    if (a.rate != b.rate) return a.rate > b.rate;
    return a.species_code < b.species_code;
  });
  return out;
}

std::vector<std::string> species_list(const ProjectStore& store) {
  std::set<std::string> uniq;
  for (const auto& det : store.detections()) uniq.insert(det.species_code);
  return {uniq.begin(), uniq.end()};
}

IncidenceMatrix build_incidence(const ProjectStore& store) {
  IncidenceMatrix inc;
  inc.deployments.reserve(store.deployments().size());
  for (const auto& d : store.deployments()) inc.deployments.push_back(d.deployment_id);
  std::sort(inc.deployments.begin(), inc.deployments.end());
  inc.species = species_list(store);

  std::unordered_map<std::string, Eigen::Index> dep_row, sp_col;
  for (std::size_t i = 0; i < inc.deployments.size(); ++i)
    dep_row.emplace(inc.deployments[i], static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < inc.species.size(); ++j)
    sp_col.emplace(inc.species[j], static_cast<Eigen::Index>(j));

  inc.cells = IncidenceCells::Zero(static_cast<Eigen::Index>(inc.deployments.size()),
                                   static_cast<Eigen::Index>(inc.species.size()));
  const auto counted = counted_sequences(store);
  for (const auto& det : store.detections()) {
    auto it = counted.find(det.sequence_id);
    if (it == counted.end()) continue;
    inc.cells(dep_row.at(it->second->deployment_id), sp_col.at(det.species_code)) = 1;
  }
  return inc;
}

IncidenceMatrix detection_history(const ProjectStore& store, const std::string& species,
                                  int granularity_days) {
  if (granularity_days < 1)
    throw ValidationError("detection_history: granularity must be at least one day");
  const std::int64_t bin_s = static_cast<std::int64_t>(granularity_days) * 86400;

  std::vector<const Deployment*> deps;
  deps.reserve(store.deployments().size());
  for (const auto& d : store.deployments()) deps.push_back(&d);
  std::sort(deps.begin(), deps.end(), [](const Deployment* a, const Deployment* b) {
    return a->deployment_id < b->deployment_id;
  });

  // Sequences of this species per deployment, by start time.
  const auto counted = counted_sequences(store);
  std::unordered_map<std::string, std::vector<UnixSeconds>> starts;
  for (const auto& det : store.detections()) {
    if (det.species_code != species) continue;
    auto it = counted.find(det.sequence_id);
    if (it == counted.end()) continue;
    starts[it->second->deployment_id].push_back(it->second->start);
  }

  Eigen::Index n_cols = 0;
  std::vector<std::vector<int>> rows;
  std::vector<std::string> row_labels;
  for (const Deployment* d : deps) {
    const std::int64_t span = d->end - d->start;
    const auto n_bins = static_cast<std::size_t>((span + bin_s - 1) / bin_s);
    const auto downtime = downtime_intervals(*d, store.heartbeats(d->deployment_id));

    std::vector<int> cells(n_bins, -1);
    for (std::size_t j = 0; j < n_bins; ++j) {
      const UnixSeconds a = d->start + static_cast<std::int64_t>(j) * bin_s;
      const UnixSeconds b = std::min<UnixSeconds>(a + bin_s, d->end);
      std::int64_t up = b - a;
      for (const auto& iv : downtime)
        up -= std::max<std::int64_t>(0, std::min(b, iv.end) - std::max(a, iv.begin));
      if (up > 0) cells[j] = 0;
    }
    if (auto it = starts.find(d->deployment_id); it != starts.end()) {
      for (UnixSeconds s : it->second) {
        auto j = static_cast<std::size_t>(std::clamp<std::int64_t>((s - d->start) / bin_s, 0,
                                                                   static_cast<std::int64_t>(n_bins) - 1));
        cells[j] = 1;  // a recorded passage is direct proof the camera ran
      }
    }
    if (std::all_of(cells.begin(), cells.end(), [](int c) { return c == -1; })) continue;
    n_cols = std::max(n_cols, static_cast<Eigen::Index>(n_bins));
    rows.push_back(std::move(cells));
    row_labels.push_back(d->deployment_id);
  }

  IncidenceMatrix inc;
  inc.deployments = std::move(row_labels);
  for (Eigen::Index j = 0; j < n_cols; ++j) {
    const int first = static_cast<int>(j) * granularity_days + 1;
    inc.species.push_back(granularity_days == 1
                              ? "day_" + std::to_string(first)
                              : "days_" + std::to_string(first) + "_" +
                                    std::to_string(first + granularity_days - 1));
  }
  inc.cells = IncidenceCells::Constant(static_cast<Eigen::Index>(rows.size()), n_cols, -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      inc.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return inc;
}

namespace {

// Walks one deployment ordering, recording richness and first-order jackknife
// at each requested prefix length. `positions_at[k]` lists output slots for
// effort k; values land at `slot * stride + sample`.
void walk_permutation(const std::vector<std::vector<int>>& presence,
                      const std::vector<std::size_t>& perm,
                      const std::vector<std::vector<std::size_t>>& positions_at,
                      std::size_t sample, std::size_t stride, std::vector<double>& sobs_out,
                      std::vector<double>& jack_out, std::vector<int>& scratch_counts) {
  std::fill(scratch_counts.begin(), scratch_counts.end(), 0);
  std::size_t sobs = 0, q1 = 0;
  for (std::size_t p = 0; p < perm.size(); ++p) {
    for (int sp : presence[perm[p]]) {
      const int c = ++scratch_counts[static_cast<std::size_t>(sp)];
      if (c == 1) {
        ++sobs;
        ++q1;
      } else if (c == 2) {
        --q1;
      }
    }
    const std::size_t k = p + 1;
    for (std::size_t slot : positions_at[k]) {
      sobs_out[slot * stride + sample] = static_cast<double>(sobs);
      jack_out[slot * stride + sample] =
          static_cast<double>(sobs) +
          static_cast<double>(q1) * static_cast<double>(k - 1) / static_cast<double>(k);
    }
  }
}

}  // namespace

AccumulationCurve rarefaction(const IncidenceMatrix& inc, int n_resamples, std::uint64_t seed,
                              std::span<const int> efforts, unsigned threads) {
  if (n_resamples < 1) throw ValidationError("rarefaction: n_resamples must be at least 1");
  const std::size_t n = inc.deployments.size();
  const std::size_t n_species = inc.species.size();

  AccumulationCurve curve;
  curve.seed = seed;
  if (efforts.empty()) {
    curve.effort.resize(n);
    std::iota(curve.effort.begin(), curve.effort.end(), 1);
  } else {
    curve.effort.assign(efforts.begin(), efforts.end());
  }
  for (int k : curve.effort)
    if (k < 1 || static_cast<std::size_t>(k) > n)
      throw ValidationError("rarefaction: effort " + std::to_string(k) + " outside 1.." +
                            std::to_string(n));

  std::vector<std::vector<int>> presence(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_species; ++j)
      if (inc.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 1)
        presence[i].push_back(static_cast<int>(j));

  std::vector<std::vector<std::size_t>> positions_at(n + 1);
  for (std::size_t i = 0; i < curve.effort.size(); ++i)
    positions_at[static_cast<std::size_t>(curve.effort[i])].push_back(i);

  // All orderings fit in 7! = 5040, so enumerate instead of sampling.
  std::size_t n_perms = 0;
  curve.exhaustive = n <= 7;
  if (curve.exhaustive) {
    n_perms = 1;
    for (std::size_t i = 2; i <= n; ++i) n_perms *= i;
  } else {
    n_perms = static_cast<std::size_t>(n_resamples);
  }
  curve.n_resamples = static_cast<int>(n_perms);

  const std::size_t n_eff = curve.effort.size();
  std::vector<double> sobs_vals(n_eff * n_perms), jack_vals(n_eff * n_perms);

  if (curve.exhaustive) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> scratch(n_species);
    std::size_t sample = 0;
    do {
      walk_permutation(presence, perm, positions_at, sample++, n_perms, sobs_vals, jack_vals,
                       scratch);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    parallel_for(n_perms, threads, [&](std::size_t r) {
      Rng rng(derive_seed(seed, r));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
      std::vector<int> scratch(n_species);
      walk_permutation(presence, perm, positions_at, r, n_perms, sobs_vals, jack_vals, scratch);
    });
  }

  curve.sobs_mean.resize(n_eff);
  curve.sobs_sd.resize(n_eff);
  curve.jack1_mean.resize(n_eff);
  curve.jack1_sd.resize(n_eff);
  for (std::size_t i = 0; i < n_eff; ++i) {
    const auto moments = [&](const std::vector<double>& vals) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n_perms; ++r) mean += vals[i * n_perms + r];
      mean /= static_cast<double>(n_perms);
      double ss = 0.0;
      for (std::size_t r = 0; r < n_perms; ++r) {
        const double d = vals[i * n_perms + r] - mean;
        ss += d * d;
      }
      return std::pair{mean, std::sqrt(ss / static_cast<double>(n_perms))};
    };
    std::tie(curve.sobs_mean[i], curve.sobs_sd[i]) = moments(sobs_vals);
    std::tie(curve.jack1_mean[i], curve.jack1_sd[i]) = moments(jack_vals);
  }
  return curve;
}

double jackknife1(const IncidenceMatrix& inc) {
  const auto n = static_cast<std::size_t>(inc.cells.rows());
  if (n == 0) throw ValidationError("jackknife1: needs at least one deployment");
  std::size_t sobs = 0, q1 = 0;
  for (Eigen::Index j = 0; j < inc.cells.cols(); ++j) {
    std::size_t occ = 0;
    for (Eigen::Index i = 0; i < inc.cells.rows(); ++i)
      if (inc.cells(i, j) == 1) ++occ;
    if (occ >= 1) ++sobs;
    if (occ == 1) ++q1;
  }
  return static_cast<double>(sobs) +
         static_cast<double>(q1) * static_cast<double>(n - 1) / static_cast<double>(n);
}

EffortBands effort_bands(std::span<const double> per_deployment_rates,
                         std::span<const int> effort_grid, int n_resamples, std::uint64_t seed,
                         unsigned threads) {
  if (per_deployment_rates.empty())
    throw ValidationError("effort_bands: empty per-deployment rate list");
  if (n_resamples < 1) throw ValidationError("effort_bands: n_resamples must be at least 1");
  for (int k : effort_grid)
    if (k < 1) throw ValidationError("effort_bands: effort values must be at least 1");

  EffortBands bands;
  bands.effort.assign(effort_grid.begin(), effort_grid.end());
  bands.n_resamples = n_resamples;
  bands.seed = seed;

  const std::size_t n_eff = bands.effort.size();
  const auto m = static_cast<std::size_t>(n_resamples);
  std::vector<double> means(n_eff * m);
  parallel_for(n_eff * m, threads, [&](std::size_t task) {
    const std::size_t e = task / m;
    Rng rng(derive_seed(seed, task));
    const auto k = static_cast<std::size_t>(bands.effort[e]);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      sum += per_deployment_rates[rng.uniform_index(per_deployment_rates.size())];
    means[task] = sum / static_cast<double>(k);
  });

  bands.mean.resize(n_eff);
  bands.min.resize(n_eff);
  bands.max.resize(n_eff);
  bands.lo95.resize(n_eff);
  bands.hi95.resize(n_eff);
  for (std::size_t e = 0; e < n_eff; ++e) {
    std::vector<double> sorted(means.begin() + static_cast<std::ptrdiff_t>(e * m),
                               means.begin() + static_cast<std::ptrdiff_t>((e + 1) * m));
    std::sort(sorted.begin(), sorted.end());
    bands.min[e] = sorted.front();
    bands.max[e] = sorted.back();
    bands.lo95[e] = percentile(sorted, 0.025);
    bands.hi95[e] = percentile(sorted, 0.975);
    bands.mean[e] = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(m);
  }
  return bands;
}

std::vector<double> per_deployment_rates(const ProjectStore& store, const std::string& species,
                                         EffortBasis basis) {
  const auto counted = counted_sequences(store);
  std::unordered_map<std::string, std::int64_t> y;
  for (const auto& det : store.detections()) {
    if (det.species_code != species) continue;
    auto it = counted.find(det.sequence_id);
    if (it != counted.end()) ++y[it->second->deployment_id];
  }
  std::vector<double> rates;
  rates.reserve(store.deployments().size());
  for (const auto& d : store.deployments()) {
    const double t = effort_of(store, d, basis);
    if (t <= 0.0) continue;  // dead camera contributes no observable effort
    auto it = y.find(d.deployment_id);
    rates.push_back(static_cast<double>(it == y.end() ? 0 : it->second) / t);
  }
  return rates;
}

std::int64_t ActivityHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ActivityHistogram activity_histogram(const ProjectStore& store, const std::string& species,
                                     int bin_minutes) {
  if (bin_minutes < 1 || 1440 % bin_minutes != 0)
    throw ValidationError("activity_histogram: bin_minutes must divide 1440");
  ActivityHistogram hist;
  hist.bin_minutes = bin_minutes;
  hist.counts.assign(static_cast<std::size_t>(1440 / bin_minutes), 0);

  const auto counted = counted_sequences(store);
  for (const auto& det : store.detections()) {
    if (det.species_code != species) continue;
    auto it = counted.find(det.sequence_id);
    if (it == counted.end()) continue;
    const auto sec = seconds_of_day(it->second->start);
    ++hist.counts[static_cast<std::size_t>(sec / (static_cast<std::int64_t>(bin_minutes) * 60))];
  }
  return hist;
}

CaptureHistory capture_history_export(const ProjectStore& store, const std::string& species) {
  std::vector<const Deployment*> deps;
  deps.reserve(store.deployments().size());
  for (const auto& d : store.deployments()) deps.push_back(&d);
  std::sort(deps.begin(), deps.end(), [](const Deployment* a, const Deployment* b) {
    if (a->start != b->start) return a->start < b->start;
    return a->deployment_id < b->deployment_id;
  });
  std::unordered_map<std::string, std::size_t> occasion_of;
  CaptureHistory hist;
  for (std::size_t i = 0; i < deps.size(); ++i) {
    occasion_of.emplace(deps[i]->deployment_id, i);
    hist.occasions.push_back(deps[i]->deployment_id);
  }

  const auto counted = counted_sequences(store);
  std::map<std::string, std::set<std::size_t>> seen;
  for (const auto& det : store.detections()) {
    if (det.species_code != species) continue;
    auto it = counted.find(det.sequence_id);
    if (it == counted.end()) continue;
    if (det.individual_id.empty()) {
      ++hist.n_unidentified;
      continue;
    }
    seen[det.individual_id].insert(occasion_of.at(it->second->deployment_id));
  }
  if (seen.empty())
    throw ValidationError("capture_history: species '" + species +
                          "' has no individual_id annotations");

  hist.encounters = IncidenceCells::Zero(static_cast<Eigen::Index>(seen.size()),
                                         static_cast<Eigen::Index>(hist.occasions.size()));
  Eigen::Index row = 0;
  for (const auto& [id, occs] : seen) {
    hist.individuals.push_back(id);
    for (std::size_t o : occs) hist.encounters(row, static_cast<Eigen::Index>(o)) = 1;
    ++row;
  }
  return hist;
}

FailureSummary failure_summary(std::span<const Camera> cameras) {
  if (cameras.empty()) throw ValidationError("failure_summary: empty camera list");
  FailureSummary s;
  s.n_cameras = static_cast<std::int64_t>(cameras.size());
  std::int64_t healthy = 0, lens = 0, humidity = 0, other = 0;
  for (const auto& cam : cameras) {
    if (cam.never_failed()) ++healthy;
    for (const auto& ev : cam.failure_events) {
      switch (ev.category) {
        case FailureCategory::lens_blur: ++lens; break;
        case FailureCategory::humidity_circuit: ++humidity; break;
        case FailureCategory::other: ++other; break;
        case FailureCategory::none: break;
      }
    }
  }
  s.never_failed = static_cast<double>(healthy) / static_cast<double>(s.n_cameras);
  s.n_failures = lens + humidity + other;
  if (s.n_failures > 0) {
    s.lens_blur = static_cast<double>(lens) / static_cast<double>(s.n_failures);
    s.humidity_circuit = static_cast<double>(humidity) / static_cast<double>(s.n_failures);
    s.other = static_cast<double>(other) / static_cast<double>(s.n_failures);
  }
  return s;
}

std::vector<MonthlyDistance> seasonal_detection_distance(std::span<const WalkTest> walktests) {
  if (walktests.empty()) throw ValidationError("seasonal_detection_distance: no walk tests");
  std::array<std::vector<double>, 12> by_month;
  for (const auto& w : walktests)
    by_month[static_cast<std::size_t>(month_of(w.date) - 1)].push_back(w.detection_distance_m);

  std::vector<MonthlyDistance> out(12);
  for (int m = 0; m < 12; ++m) {
    auto& cell = out[static_cast<std::size_t>(m)];
    cell.month = m + 1;
    const auto& v = by_month[static_cast<std::size_t>(m)];
    cell.n = static_cast<std::int64_t>(v.size());
    if (v.empty()) {
      cell.mean_m = kNaN;
      cell.se_m = kNaN;
      continue;
    }
    cell.mean_m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) {
      cell.se_m = kNaN;
      continue;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - cell.mean_m) * (x - cell.mean_m);
    cell.se_m = std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                std::sqrt(static_cast<double>(v.size()));
  }
  return out;
}

}  // namespace camtrap::stats
