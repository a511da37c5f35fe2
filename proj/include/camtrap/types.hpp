#pragma once

#include <Eigen/Dense>

namespace camtrap {

using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;
using Vec2d = Eigen::Vector2d;
using Vec3d = Eigen::Vector3d;
using Mat3d = Eigen::Matrix3d;

/// Incidence cells: 1 detected, 0 not detected, -1 missing (no effort).
using IncidenceCells = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace camtrap
