#include "camtrap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "camtrap/error.hpp"

namespace camtrap::geom {

namespace {

// Similarity transform moving the centroid to the origin and the mean radius
// to sqrt(2) (Hartley normalization).
Mat3d normalizing_transform(const MatXd& pts) {
  const Eigen::RowVector2d centroid = pts.colwise().mean();
  const double mean_dist = (pts.rowwise() - centroid).rowwise().norm().mean();
  const double s = mean_dist > 0.0 ? std::numbers::sqrt2 / mean_dist : 1.0;
  Mat3d t = Mat3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

bool collinear(const MatXd& pts) {
  const Eigen::RowVector2d centroid = pts.colwise().mean();
  const MatXd centered = pts.rowwise() - centroid;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(centered.transpose() * centered);
  // eigenvalues come out ascending
  return es.eigenvalues()(0) <= 1e-10 * std::max(es.eigenvalues()(1), 1e-12);
}

}  // namespace

CalibrationModel fit_homography(const MatXd& pixels, const MatXd& ground_m) {
  const Eigen::Index n = pixels.rows();
  if (pixels.cols() != 2 || ground_m.cols() != 2 || ground_m.rows() != n)
    throw ValidationError("fit_homography: pixel and ground matrices must both be n x 2");
  if (n < 4) throw ValidationError("fit_homography: needs at least 4 correspondences");
  if (collinear(ground_m)) throw ValidationError("fit_homography: ground points are collinear");
  if (collinear(pixels)) throw ValidationError("fit_homography: pixel points are collinear");

  const Mat3d t_px = normalizing_transform(pixels);
  const Mat3d t_gr = normalizing_transform(ground_m);

  MatXd a = MatXd::Zero(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3d p = t_px * Vec3d(pixels(i, 0), pixels(i, 1), 1.0);
    const Vec3d g = t_gr * Vec3d(ground_m(i, 0), ground_m(i, 1), 1.0);
    a.row(2 * i) << p.x(), p.y(), 1.0, 0.0, 0.0, 0.0, -g.x() * p.x(), -g.x() * p.y(), -g.x();
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, p.x(), p.y(), 1.0, -g.y() * p.x(), -g.y() * p.y(), -g.y();
  }

  const Eigen::JacobiSVD<MatXd> svd(a, Eigen::ComputeFullV);
  if (svd.singularValues()(7) <= 1e-10 * svd.singularValues()(0))
    throw ValidationError("fit_homography: rank-deficient system, correspondences are degenerate");
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);

  Mat3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Mat3d big_h = t_gr.inverse() * hn * t_px;
  if (std::abs(big_h(2, 2)) <= 1e-14 * big_h.norm())
    throw ValidationError("fit_homography: degenerate map, cannot scale H(2,2) to 1");
  big_h /= big_h(2, 2);

  CalibrationModel model;
  model.H = big_h;
  model.n_points = static_cast<int>(n);

  double ss = 0.0;
  double sign = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3d g = big_h * Vec3d(pixels(i, 0), pixels(i, 1), 1.0);
    if (std::abs(g.z()) <= 1e-12)
      throw ValidationError("fit_homography: calibration point lands on the horizon");
    const double si = g.z() > 0.0 ? 1.0 : -1.0;
    if (sign == 0.0) sign = si;
    if (si != sign)
      throw ValidationError("fit_homography: calibration points straddle the horizon");
    ss += (Vec2d(g.x() / g.z(), g.y() / g.z()) - Vec2d(ground_m(i, 0), ground_m(i, 1)))
              .squaredNorm();
  }
  model.ground_side_sign = sign;
  model.rmse_m = std::sqrt(ss / static_cast<double>(n));
  return model;
}

Vec2d project_to_ground(const CalibrationModel& model, double u, double v) {
  const Vec3d g = model.H * Vec3d(u, v, 1.0);
  if (g.z() * model.ground_side_sign <= 1e-12)
    throw ValidationError("project_to_ground: pixel at or beyond the horizon");
  return {g.x() / g.z(), g.y() / g.z()};
}

SpeedEstimate estimate_speed(std::span<const TrackPoint> track, const CalibrationModel& model) {
  if (track.size() < 2) throw ValidationError("estimate_speed: track needs at least 2 points");
  for (std::size_t i = 1; i < track.size(); ++i)
    if (track[i].time_s <= track[i - 1].time_s)
      throw ValidationError("estimate_speed: track times must be strictly increasing");

  std::vector<Vec2d> ground;
  ground.reserve(track.size());
  for (const auto& p : track) ground.push_back(project_to_ground(model, p.u, p.v));

  SpeedEstimate est;
  const Vec2d first_step = ground[1] - ground[0];
  est.entry_angle_rad = std::atan2(first_step.x(), first_step.y());
  for (std::size_t i = 1; i < track.size(); ++i) {
    const double len = (ground[i] - ground[i - 1]).norm();
    const double dt = track[i].time_s - track[i - 1].time_s;
    est.path_length_m += len;
    est.max_speed_m_s = std::max(est.max_speed_m_s, len / dt);
  }
  est.avg_speed_m_s = est.path_length_m / (track.back().time_s - track.front().time_s);
  return est;
}

DetectionZone fit_detection_zone(const VecXd& r_m, const VecXd& a_rad) {
  if (r_m.size() != a_rad.size())
    throw ValidationError("fit_detection_zone: distance and angle vectors differ in length");
  if (r_m.size() < 5) throw ValidationError("fit_detection_zone: needs at least 5 detections");
  if ((r_m.array() < 0.0).any())
    throw ValidationError("fit_detection_zone: negative detection distance");
  const auto n = static_cast<double>(r_m.size());
  const double sum_r2 = r_m.squaredNorm();
  if (sum_r2 <= 0.0) throw ValidationError("fit_detection_zone: all distances are zero");

  DetectionZone zone;
  zone.sigma_r_m = std::sqrt(sum_r2 / (2.0 * n));
  zone.sigma_a_rad = std::sqrt(a_rad.squaredNorm() / n);
  zone.r_eff_m = zone.sigma_r_m * std::numbers::sqrt2;
  zone.theta_eff_rad = 2.0 * zone.sigma_a_rad * std::sqrt(std::numbers::pi / 2.0);
  zone.degenerate_angles = zone.sigma_a_rad == 0.0;
  return zone;
}

double rem_density(const RemInputs& inputs) {
  if (inputs.y < 0) throw ValidationError("rem_density: negative detection count");
  if (inputs.t_days <= 0.0) throw ValidationError("rem_density: effort must be positive");
  if (inputs.v_m_per_day <= 0.0) throw ValidationError("rem_density: speed must be positive");
  if (inputs.zone.r_eff_m <= 0.0)
    throw ValidationError("rem_density: detection zone has zero effective radius");
  const double v_km = inputs.v_m_per_day / 1000.0;
  const double r_km = inputs.zone.r_eff_m / 1000.0;
  return (static_cast<double>(inputs.y) / inputs.t_days) * std::numbers::pi /
         (v_km * r_km * (2.0 + inputs.zone.theta_eff_rad));
}

double rem_encounter_rate(double density_per_km2, double v_m_per_day, const DetectionZone& zone) {
  return density_per_km2 * (v_m_per_day / 1000.0) * (zone.r_eff_m / 1000.0) *
         (2.0 + zone.theta_eff_rad) / std::numbers::pi;
}

}  // namespace camtrap::geom
