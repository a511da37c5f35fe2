#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "camtrap/geometry.hpp"
#include "camtrap/store.hpp"

namespace camtrap::sim {

enum class ActivityPattern { cathemeral, diurnal, nocturnal };

std::string to_string(ActivityPattern p);
ActivityPattern activity_pattern_from_string(const std::string& s);

struct SpeciesSpec {
  std::string code;
  double weight = 1.0;  // relative abundance; density share = weight / sum
  ActivityPattern activity = ActivityPattern::cathemeral;
  double trail_multiplier = 1.0;  // encounter-rate factor at trail placements
  bool identifiable = false;      // emit individual ids for mark-recapture
};

struct CommunitySpec {
  std::vector<SpeciesSpec> species;

  void validate() const;
  static CommunitySpec single(std::string code);
  /// n species with weights ratio^k, mimicking a rank-abundance curve.
  static CommunitySpec geometric(int n_species, double ratio);
};

/// Per-deployment failure probabilities by category; total must stay <= 1.
struct FailureHazards {
  double lens_blur = 0.0;
  double humidity_circuit = 0.0;
  double other = 0.0;

  double total() const { return lens_blur + humidity_circuit + other; }
};

struct SimConfig {
  double density_per_km2 = 10.0;  // community total
  double speed_km_day = 1.0;      // day range entering the encounter rate
  geom::DetectionZone zone;       // defaulted in validate-time helper below
  int n_cameras = 20;
  int deployments_per_camera = 1;
  double days_per_deployment = 30.0;
  double camera_spacing_m = 50.0;  // square grid pitch
  double trail_fraction = 0.0;     // leading fraction of locations on trails
  UnixSeconds start_time = 1672531200;  // 2023-01-01T00:00:00Z
  double heartbeat_hours = 12.0;
  // Through-zone movement speed shaping sequence durations (1 frame/s over
  // the chord crossing time); not a biological day range.
  double crossing_speed_m_s = 0.7;
  // Month-by-month multiplier on the effective detection radius (wet-season
  // sensitivity loss); values in (0, 1].
  std::array<double, 12> monthly_r_multiplier{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  FailureHazards hazards;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Zone with the given effective radius and full effective angle (the inverse
/// of the fitted-zone invariants).
geom::DetectionZone zone_from_effective(double r_eff_m, double theta_eff_rad);

/// First-detection position attached to a generated sequence; the `zone`
/// subcommand consumes these to re-fit the detection zone.
struct FirstDetection {
  std::string sequence_id;
  double r_m = 0.0;
  double a_rad = 0.0;
};

struct SimTruth {
  // Analytic expected detections per camera-day at a random (off-trail)
  // placement with unit monthly multiplier.
  double encounter_rate_per_camday = 0.0;
  std::map<std::string, double> rate_by_species;
  std::int64_t n_passages = 0;
};

/// Populates an empty store with a full synthetic survey: grid of cameras,
/// per-deployment passage processes at the gas-model encounter rate,
/// heartbeat images, sequences exactly as the segmenter would cut them,
/// detections, walk tests, and camera failures per the hazard mix.
/// Deterministic for a given config: byte-identical tables every run.
SimTruth simulate_community(ProjectStore& store, const SimConfig& cfg,
                            const CommunitySpec& community,
                            std::vector<FirstDetection>* first_detections = nullptr);

/// Single-species convenience wrapper.
SimTruth simulate_passages(ProjectStore& store, const SimConfig& cfg,
                           std::vector<FirstDetection>* first_detections = nullptr);

/// Independent geometric oracle for the encounter-rate formula: straight-line
/// walkers sampled around the camera, counting entries of their daily path
/// into the detection sector. Returns detections per camera-day.
double micro_walk_encounter_rate(double density_per_km2, double speed_km_day,
                                 const geom::DetectionZone& zone, int n_days,
                                 std::uint64_t seed);

}  // namespace camtrap::sim
