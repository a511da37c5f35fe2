#pragma once

#include <cstdint>
#include <span>

#include "camtrap/types.hpp"

namespace camtrap::geom {

/// Image-to-ground-plane map. Camera sits at the ground origin with the
/// optical axis along +Y; units are meters on the ground.
struct CalibrationModel {
  Mat3d H = Mat3d::Identity();  // maps (u, v, 1) to homogeneous ground coords
  double rmse_m = 0.0;
  int n_points = 0;
  // Sign of the homogeneous W on the camera side of the horizon. Points whose
  // W has the other sign (or ~0) are at or beyond the horizon.
  double ground_side_sign = 1.0;
};

/// Least-squares homography from pixel/ground correspondences (rows of two
/// n x 2 matrices), via the direct linear transform with Hartley
/// normalization. H is scaled so H(2,2) = 1. Throws on n < 4, collinear
/// ground or pixel points, or a rank-deficient system.
CalibrationModel fit_homography(const MatXd& pixels, const MatXd& ground_m);

/// Ground-plane position of a pixel. Throws for points at or beyond the
/// horizon rather than returning a huge coordinate.
Vec2d project_to_ground(const CalibrationModel& model, double u, double v);

struct TrackPoint {
  double time_s = 0.0;
  double u = 0.0;
  double v = 0.0;
};

struct SpeedEstimate {
  double avg_speed_m_s = 0.0;
  double max_speed_m_s = 0.0;
  double path_length_m = 0.0;
  // Bearing of the first step relative to the optical axis (+Y), positive
  // toward +X.
  double entry_angle_rad = 0.0;
};

/// Projects a pixel track to the ground and summarizes its motion. Requires
/// at least two points with strictly increasing times.
SpeedEstimate estimate_speed(std::span<const TrackPoint> track, const CalibrationModel& model);

struct DetectionZone {
  double sigma_r_m = 0.0;        // Rayleigh scale of first-detection distance
  double sigma_a_rad = 0.0;      // half-normal scale of |detection angle|
  double r_eff_m = 0.0;          // sigma_r * sqrt(2)
  double theta_eff_rad = 0.0;    // 2 * sigma_a * sqrt(pi/2), full width
  bool degenerate_angles = false;
};

/// Closed-form MLE of the detection zone from first-detection positions:
/// distances follow a Rayleigh model (half-normal detection times linear
/// availability), angles a half-normal on |a|. Needs >= 5 points and at
/// least one positive distance.
DetectionZone fit_detection_zone(const VecXd& r_m, const VecXd& a_rad);

struct RemInputs {
  std::int64_t y = 0;          // independent detections
  double t_days = 0.0;         // camera-days of effort
  double v_m_per_day = 0.0;    // day range (travel speed)
  DetectionZone zone;
};

/// Random-encounter-model density in animals per km^2:
///   D = (y/t) * pi / (v * r_eff * (2 + theta_eff))
/// with v and r_eff converted to km before applying.
double rem_density(const RemInputs& inputs);

/// Expected detections per camera-day under the same gas model; the density
/// formula inverted, used by the passage simulator.
double rem_encounter_rate(double density_per_km2, double v_m_per_day, const DetectionZone& zone);

}  // namespace camtrap::geom
