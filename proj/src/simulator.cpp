#include "camtrap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "camtrap/error.hpp"
#include "camtrap/ingest.hpp"
#include "camtrap/random.hpp"

namespace camtrap::sim {

std::string to_string(ActivityPattern p) {
  switch (p) {
    case ActivityPattern::cathemeral: return "cathemeral";
    case ActivityPattern::diurnal: return "diurnal";
    case ActivityPattern::nocturnal: return "nocturnal";
  }
  return "cathemeral";
}

ActivityPattern activity_pattern_from_string(const std::string& s) {
  if (s == "cathemeral") return ActivityPattern::cathemeral;
  if (s == "diurnal") return ActivityPattern::diurnal;
  if (s == "nocturnal") return ActivityPattern::nocturnal;
  throw ValidationError("unknown activity pattern '" + s + "'");
}

void CommunitySpec::validate() const {
  if (species.empty()) throw ValidationError("community needs at least one species");
  for (const auto& sp : species) {
    if (sp.code.empty()) throw ValidationError("community species code must be non-empty");
    if (sp.weight <= 0.0)
      throw ValidationError("community species '" + sp.code + "': weight must be positive");
    if (sp.trail_multiplier <= 0.0)
      throw ValidationError("community species '" + sp.code +
                            "': trail multiplier must be positive");
  }
}

CommunitySpec CommunitySpec::single(std::string code) {
  CommunitySpec spec;
  spec.species.push_back({std::move(code), 1.0, ActivityPattern::cathemeral, 1.0, false});
  return spec;
}

CommunitySpec CommunitySpec::geometric(int n_species, double ratio) {
  if (n_species < 1) throw ValidationError("geometric community needs at least one species");
  if (ratio <= 0.0 || ratio > 1.0) throw ValidationError("geometric ratio must be in (0, 1]");
  CommunitySpec spec;
  double w = 1.0;
  for (int i = 0; i < n_species; ++i) {
    char code[16];
    std::snprintf(code, sizeof code, "sp%02d", i + 1);
    const auto pattern = i % 3 == 0   ? ActivityPattern::cathemeral
                         : i % 3 == 1 ? ActivityPattern::diurnal
                                      : ActivityPattern::nocturnal;
    spec.species.push_back({code, w, pattern, 1.0, false});
    w *= ratio;
  }
  return spec;
}

void SimConfig::validate() const {
  if (density_per_km2 < 0.0) throw ValidationError("sim: density must be non-negative");
  if (speed_km_day <= 0.0) throw ValidationError("sim: speed must be positive");
  if (zone.r_eff_m <= 0.0 || zone.sigma_r_m <= 0.0)
    throw ValidationError("sim: detection zone radius must be positive");
  if (zone.theta_eff_rad <= 0.0 || zone.theta_eff_rad > std::numbers::pi)
    throw ValidationError("sim: effective angle must be in (0, pi]");
  if (n_cameras < 1) throw ValidationError("sim: needs at least one camera");
  if (deployments_per_camera < 1) throw ValidationError("sim: deployments_per_camera >= 1");
  if (days_per_deployment <= 0.0) throw ValidationError("sim: days_per_deployment > 0");
  if (camera_spacing_m <= 0.0) throw ValidationError("sim: camera spacing must be positive");
  if (trail_fraction < 0.0 || trail_fraction > 1.0)
    throw ValidationError("sim: trail fraction must be in [0, 1]");
  if (heartbeat_hours <= 0.0) throw ValidationError("sim: heartbeat interval must be positive");
  if (crossing_speed_m_s <= 0.0) throw ValidationError("sim: crossing speed must be positive");
  for (double m : monthly_r_multiplier)
    if (!(m > 0.0 && m <= 1.0))
      throw ValidationError("sim: monthly multipliers must be in (0, 1]");
  const double h = hazards.total();
  if (hazards.lens_blur < 0.0 || hazards.humidity_circuit < 0.0 || hazards.other < 0.0 ||
      h > 1.0)
    throw ValidationError("sim: failure hazards must be non-negative and sum to at most 1");
}

geom::DetectionZone zone_from_effective(double r_eff_m, double theta_eff_rad) {
  if (r_eff_m <= 0.0) throw ValidationError("zone: effective radius must be positive");
  if (theta_eff_rad <= 0.0) throw ValidationError("zone: effective angle must be positive");
  geom::DetectionZone z;
  z.r_eff_m = r_eff_m;
  z.theta_eff_rad = theta_eff_rad;
  z.sigma_r_m = r_eff_m / std::numbers::sqrt2;
  z.sigma_a_rad = theta_eff_rad / (2.0 * std::sqrt(std::numbers::pi / 2.0));
  return z;
}

namespace {

struct Passage {
  UnixSeconds start = 0;
  std::int64_t duration_s = 1;
  std::size_t species = 0;
  double r_m = 0.0;
  double a_rad = 0.0;
  int individual = -1;  // index into the species' id pool, -1 = unidentified
};

// Respects activity windows by moving the time of day, leaving counts alone:
// diurnal 06-18 h, nocturnal 19-05 h.
UnixSeconds reshape_time_of_day(UnixSeconds t, ActivityPattern pattern, Rng& rng) {
  if (pattern == ActivityPattern::cathemeral) return t;
  const UnixSeconds day_start = t - seconds_of_day(t);
  std::int64_t sod = 0;
  if (pattern == ActivityPattern::diurnal) {
    sod = 6 * 3600 + static_cast<std::int64_t>(rng.uniform() * 12.0 * 3600.0);
  } else {
    sod = (19 * 3600 + static_cast<std::int64_t>(rng.uniform() * 10.0 * 3600.0)) % 86400;
  }
  return day_start + sod;
}

}  // namespace

SimTruth simulate_community(ProjectStore& store, const SimConfig& cfg,
                            const CommunitySpec& community,
                            std::vector<FirstDetection>* first_detections) {
  cfg.validate();
  community.validate();
  if (!store.deployments().empty() || !store.images().empty())
    throw ValidationError("simulate: target store is not empty");

  double weight_sum = 0.0;
  for (const auto& sp : community.species) weight_sum += sp.weight;

  SimTruth truth;
  std::vector<double> base_rate(community.species.size());  // per cam-day, off trail
  for (std::size_t s = 0; s < community.species.size(); ++s) {
    const double share = cfg.density_per_km2 * community.species[s].weight / weight_sum;
    base_rate[s] = geom::rem_encounter_rate(share, cfg.speed_km_day * 1000.0, cfg.zone);
    truth.rate_by_species[community.species[s].code] = base_rate[s];
    truth.encounter_rate_per_camday += base_rate[s];
  }

  // Layout: square grid, one camera per location, leading locations on trails.
  store.add_plot({"P001", FruitClass::low, 1.0});
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n_cameras))));
  const int n_trail =
      static_cast<int>(std::lround(cfg.trail_fraction * static_cast<double>(cfg.n_cameras)));
  std::vector<Camera> cameras(static_cast<std::size_t>(cfg.n_cameras));
  for (int i = 0; i < cfg.n_cameras; ++i) {
    char loc[16], cam[16];
    std::snprintf(loc, sizeof loc, "L%04d", i + 1);
    std::snprintf(cam, sizeof cam, "C%04d", i + 1);
    CameraLocation cl;
    cl.location_id = loc;
    cl.plot_id = "P001";
    cl.easting_m = static_cast<double>(i % cols) * cfg.camera_spacing_m;
    cl.northing_m = static_cast<double>(i / cols) * cfg.camera_spacing_m;
    cl.placement = i < n_trail ? Placement::trail : Placement::random;
    store.add_location(cl);
    cameras[static_cast<std::size_t>(i)].camera_id = cam;
    cameras[static_cast<std::size_t>(i)].model = "sim-cam";
  }

  const auto dep_seconds =
      static_cast<std::int64_t>(std::llround(cfg.days_per_deployment * 86400.0));
  const auto heartbeat_s = static_cast<std::int64_t>(std::llround(cfg.heartbeat_hours * 3600.0));
  const ingest::SegmentationPolicy policy{};
  const auto gap_s = static_cast<std::int64_t>(policy.split_above_s) + 1;

  std::vector<ImageRecord> all_images;
  std::vector<Sequence> all_sequences;
  std::size_t dep_index = 0;
  for (int c = 0; c < cfg.n_cameras; ++c) {
    for (int j = 0; j < cfg.deployments_per_camera; ++j, ++dep_index) {
      Deployment dep;
      char id[32];
      std::snprintf(id, sizeof id, "D%04d-%02d", c + 1, j + 1);
      dep.deployment_id = id;
      dep.camera_id = cameras[static_cast<std::size_t>(c)].camera_id;
      char loc[16];
      std::snprintf(loc, sizeof loc, "L%04d", c + 1);
      dep.location_id = loc;
      dep.start = cfg.start_time + static_cast<std::int64_t>(j) * dep_seconds;
      dep.end = dep.start + dep_seconds;
      dep.nominal_days = Deployment::nominal_days_of(dep.start, dep.end);

      Rng rng(derive_seed(cfg.seed, dep_index));
      const bool on_trail = c < n_trail;

      // Failure draw: at most one failure per deployment; the camera goes
      // dark (no heartbeats, no passages) from the failure moment on.
      UnixSeconds dark_from = dep.end + 1;
      const double hazard = cfg.hazards.total();
      const double u_fail = rng.uniform();
      if (hazard > 0.0 && u_fail < hazard) {
        FailureCategory cat = FailureCategory::other;
        if (u_fail < cfg.hazards.lens_blur)
          cat = FailureCategory::lens_blur;
        else if (u_fail < cfg.hazards.lens_blur + cfg.hazards.humidity_circuit)
          cat = FailureCategory::humidity_circuit;
        dark_from = dep.start + static_cast<std::int64_t>(rng.uniform() *
                                                          static_cast<double>(dep_seconds));
        cameras[static_cast<std::size_t>(c)].failure_events.push_back(
            {dark_from - seconds_of_day(dark_from), cat});
      }

      // Passage arrivals: homogeneous Poisson per species, thinned by the
      // monthly radius multiplier, time of day reshaped per activity pattern.
      std::vector<Passage> passages;
      for (std::size_t s = 0; s < community.species.size(); ++s) {
        const auto& sp = community.species[s];
        double rate = base_rate[s];
        if (on_trail) rate *= sp.trail_multiplier;
        if (rate <= 0.0) continue;
        const double lambda = rate / 86400.0;  // per second
        double t = static_cast<double>(dep.start);
        while (true) {
          t += rng.exponential() / lambda;
          const auto ti = static_cast<UnixSeconds>(t);
          if (ti >= dep.end) break;
          const double m = cfg.monthly_r_multiplier[static_cast<std::size_t>(month_of(ti) - 1)];
          if (rng.uniform() >= m) continue;

          Passage p;
          p.start = reshape_time_of_day(ti, sp.activity, rng);
          p.species = s;
          p.r_m = rng.rayleigh(cfg.zone.sigma_r_m * m);
          p.a_rad = rng.normal(0.0, cfg.zone.sigma_a_rad);
          const double d_perp = cfg.zone.r_eff_m * rng.uniform();
          const double chord =
              2.0 * std::sqrt(cfg.zone.r_eff_m * cfg.zone.r_eff_m - d_perp * d_perp);
          p.duration_s = std::max<std::int64_t>(
              1, static_cast<std::int64_t>(std::llround(chord / cfg.crossing_speed_m_s)));
          if (sp.identifiable) p.individual = static_cast<int>(rng.uniform_index(8));
          passages.push_back(p);
        }
      }

      // Keep passages strictly separated so segmentation reproduces them
      // one-to-one: push any follower to a clean-split gap, drop what no
      // longer fits or falls after a failure.
      std::stable_sort(passages.begin(), passages.end(),
                       [](const Passage& a, const Passage& b) { return a.start < b.start; });
      std::vector<Passage> kept;
      UnixSeconds prev_end = dep.start - gap_s;
      for (Passage p : passages) {
        if (p.start < prev_end + gap_s) p.start = prev_end + gap_s;
        const UnixSeconds end = p.start + p.duration_s;
        if (end >= dep.end || end >= dark_from) continue;
        kept.push_back(p);
        prev_end = end;
      }

      // Heartbeats until failure; motion frames at 1 fps per passage.
      std::vector<ImageRecord> images;
      for (UnixSeconds t = dep.start; t <= dep.end && t < dark_from; t += heartbeat_s)
        images.push_back({dep.deployment_id, t, Trigger::timelapse, ""});
      for (const auto& p : kept)
        for (std::int64_t k = 0; k <= p.duration_s; ++k)
          images.push_back({dep.deployment_id, p.start + k, Trigger::motion, ""});
      std::stable_sort(images.begin(), images.end(),
                       [](const ImageRecord& a, const ImageRecord& b) {
                         return a.timestamp < b.timestamp;
                       });
      for (std::size_t k = 0; k < images.size(); ++k) {
        char frame[48];
        std::snprintf(frame, sizeof frame, "%s-f%06zu", dep.deployment_id.c_str(), k + 1);
        images[k].frame_ref = frame;
      }

      std::vector<ImageRecord> motion;
      for (const auto& r : images)
        if (r.trigger == Trigger::motion) motion.push_back(r);
      const auto seg = ingest::segment_sequences(motion, policy);
      if (seg.sequences.size() != kept.size())
        throw std::logic_error("simulate: segmentation does not reproduce generated passages");

      for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto& sp = community.species[kept[k].species];
        Detection det;
        det.sequence_id = seg.sequences[k].sequence_id;
        det.species_code = sp.code;
        det.group_count = 1;
        if (kept[k].individual >= 0) {
          char iid[32];
          std::snprintf(iid, sizeof iid, "%s-%02d", sp.code.c_str(), kept[k].individual + 1);
          det.individual_id = iid;
        }
        store.add_detection(det);
        if (first_detections)
          first_detections->push_back(
              {seg.sequences[k].sequence_id, kept[k].r_m, kept[k].a_rad});
      }
      truth.n_passages += static_cast<std::int64_t>(kept.size());

      // One walk test at setup; distance tracks the seasonal radius.
      const double m0 =
          cfg.monthly_r_multiplier[static_cast<std::size_t>(month_of(dep.start) - 1)];
      const double base = cfg.zone.sigma_r_m * std::sqrt(std::numbers::pi / 2.0) * m0;
      WalkTest wt;
      wt.deployment_id = dep.deployment_id;
      wt.date = dep.start;
      wt.detection_distance_m = std::max(0.1, base + rng.normal(0.0, 0.05 * base));
      store.add_walktest(wt);

      store.add_deployment(dep);
      all_images.insert(all_images.end(), images.begin(), images.end());
      all_sequences.insert(all_sequences.end(), seg.sequences.begin(), seg.sequences.end());
    }
  }

  for (auto& cam : cameras) store.add_camera(std::move(cam));
  store.set_images(std::move(all_images));
  store.set_sequences(std::move(all_sequences));
  return truth;
}

SimTruth simulate_passages(ProjectStore& store, const SimConfig& cfg,
                           std::vector<FirstDetection>* first_detections) {
  return simulate_community(store, cfg, CommunitySpec::single("simsp"), first_detections);
}

namespace {

bool in_sector(const Vec2d& q, double r, double half_angle) {
  const double d2 = q.squaredNorm();
  if (d2 > r * r) return false;
  return std::abs(std::atan2(q.x(), q.y())) <= half_angle;
}

// Entries of the segment p + s*dir (s in [0, len]) into the sector, counting
// outside-to-inside transitions at circle and radial-edge crossings.
int sector_entries(const Vec2d& p, const Vec2d& dir, double len, double r, double half_angle) {
  std::vector<double> cuts{0.0, len};

  const double b = p.dot(dir);
  const double c = p.squaredNorm() - r * r;
  const double disc = b * b - c;  // dir is unit length
  if (disc > 0.0) {
    const double sd = std::sqrt(disc);
    for (double s : {-b - sd, -b + sd})
      if (s > 0.0 && s < len) cuts.push_back(s);
  }
  for (double sign : {-1.0, 1.0}) {
    const Vec2d e{std::sin(sign * half_angle), std::cos(sign * half_angle)};
    const double denom = dir.x() * e.y() - dir.y() * e.x();
    if (std::abs(denom) < 1e-15) continue;
    // p + s dir = u e  =>  solve the 2x2 system for (s, u)
    const double s = (p.y() * e.x() - p.x() * e.y()) / denom;
    const double u = (p.y() * dir.x() - p.x() * dir.y()) / denom;
    if (s > 0.0 && s < len && u > 0.0 && u < r) cuts.push_back(s);
  }
  std::sort(cuts.begin(), cuts.end());

  int entries = 0;
  bool inside = in_sector(p + 1e-9 * dir, r, half_angle);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const bool now = in_sector(p + mid * dir, r, half_angle);
    if (now && !inside) ++entries;
    inside = now;
  }
  return entries;
}

}  // namespace

double micro_walk_encounter_rate(double density_per_km2, double speed_km_day,
                                 const geom::DetectionZone& zone, int n_days,
                                 std::uint64_t seed) {
  if (n_days < 1) throw ValidationError("micro walk: needs at least one day");
  const double step_m = speed_km_day * 1000.0;  // daily straight-line path
  const double half_angle = zone.theta_eff_rad / 2.0;
  const double r = zone.r_eff_m;
  // Any walker able to touch the sector starts within this box.
  const double half_w = r + step_m + 1.0;
  const double area_km2 = (2.0 * half_w) * (2.0 * half_w) / 1e6;
  const double mean_walkers = density_per_km2 * area_km2;

  std::int64_t entries = 0;
  for (int day = 0; day < n_days; ++day) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(day)));
    const std::int64_t n = rng.poisson(mean_walkers);
    for (std::int64_t i = 0; i < n; ++i) {
      const Vec2d p{rng.uniform(-half_w, half_w), rng.uniform(-half_w, half_w)};
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec2d dir{std::cos(phi), std::sin(phi)};
      // Cheap reject: closest approach of the full line to the camera.
      const double s_star = std::clamp(-p.dot(dir), 0.0, step_m);
      if ((p + s_star * dir).norm() > r) continue;
      entries += sector_entries(p, dir, step_m, r, half_angle);
    }
  }
  return static_cast<double>(entries) / static_cast<double>(n_days);
}

}  // namespace camtrap::sim
