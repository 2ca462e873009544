// Reference implementations used only by the test suites. Everything here is
// built from plain trigonometry and numerical quadrature so that it shares no
// code path with the library kernels it is checking.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "snakesim/kinematics.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace oracles {

inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0,
      1.0;
  return r;
}

inline Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0.0, std::sin(a), 0.0, 1.0, 0.0, -std::sin(a), 0.0,
      std::cos(a);
  return r;
}

inline Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  r << 1.0, 0.0, 0.0, 0.0, std::cos(a), -std::sin(a), 0.0, std::sin(a),
      std::cos(a);
  return r;
}

// Pose of a single circular arc written in the classic bend-plane form:
// rotate the bend plane into place, bend about the local Y axis, rotate back.
// Uses an explicit straight branch instead of a smooth reformulation.
inline Eigen::Matrix4d cc_pose(double kappa, double phi, double s, double xi) {
  Eigen::Matrix4d htm = Eigen::Matrix4d::Identity();
  const double a = s * xi;
  if (kappa == 0.0) {
    htm(2, 3) = a;
    return htm;
  }
  const double theta = kappa * a;
  const Eigen::Matrix3d rot = rot_z(phi) * rot_y(theta) * rot_z(-phi);
  const Eigen::Vector3d in_plane((1.0 - std::cos(theta)) / kappa, 0.0,
                                 std::sin(theta) / kappa);
  htm.block<3, 3>(0, 0) = rot;
  htm.block<3, 1>(0, 3) = rot_z(phi) * in_plane;
  return htm;
}

// Chord length of an arc of curvature kappa and arc length s.
inline double cc_chord(double kappa, double s) {
  if (kappa == 0.0) return s;
  return (2.0 / kappa) * std::sin(kappa * s / 2.0);
}

// Arc length of the curve traced by actuator j (1-based), obtained by
// composite Simpson quadrature of the speed of the offset curve
//   c_j(xi) = p(xi) + R(xi) * r_p * (cos t_j, sin t_j, 0),
// with the centreline pose taken from cc_pose. No closed-form offset
// geometry is assumed.
inline double actuator_curve_length(double kappa, double phi, double s,
                                    double r_p, int j, int intervals = 2000) {
  const double t_j = (j - 1) * 2.0 * M_PI / 3.0;
  const Eigen::Vector3d offset(r_p * std::cos(t_j), r_p * std::sin(t_j), 0.0);
  auto point = [&](double xi) -> Eigen::Vector3d {
    const Eigen::Matrix4d htm = cc_pose(kappa, phi, s, xi);
    return htm.block<3, 1>(0, 3) + htm.block<3, 3>(0, 0) * offset;
  };
  auto speed = [&](double xi) {
    const double h = 1e-6;
    double lo = std::max(0.0, xi - h);
    double hi = std::min(1.0, xi + h);
    return (point(hi) - point(lo)).norm() / (hi - lo);
  };
  // Composite Simpson over [0, 1] in xi.
  const int n = intervals;
  double acc = speed(0.0) + speed(1.0);
  for (int k = 1; k < n; ++k) {
    const double xi = static_cast<double>(k) / n;
    acc += (k % 2 == 1 ? 4.0 : 2.0) * speed(xi);
  }
  return acc / (3.0 * n);
}

// Central finite difference of a vector-valued function of the generalized
// coordinates.
inline snakesim::Jacobian3Q fd_jacobian(
    const std::function<snakesim::Vec3(const snakesim::VecQ&)>& f,
    const snakesim::VecQ& q, double h = 1e-6) {
  snakesim::Jacobian3Q jac;
  for (int k = 0; k < snakesim::kDof; ++k) {
    snakesim::VecQ plus = q;
    snakesim::VecQ minus = q;
    plus[k] += h;
    minus[k] -= h;
    jac.col(k) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return jac;
}

// Draws generalized coordinates that keep the pitch angle away from the
// representation singularity and the actuator lengths strictly inside their
// stroke.
struct StateSampler {
  std::mt19937 rng;

  explicit StateSampler(unsigned seed) : rng(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

  snakesim::VecQ joint_positions(const snakesim::RobotParams& params) {
    snakesim::VecQ q;
    for (int k = 0; k < 3; ++k) q[k] = uniform(-0.5, 0.5);
    q[3] = uniform(-M_PI, M_PI);
    q[4] = uniform(-1.2, 1.2);
    q[5] = uniform(-M_PI, M_PI);
    for (int k = 0; k < snakesim::kActDof; ++k)
      q[snakesim::kBaseDof + k] = uniform(1e-4, params.dl_max);
    return q;
  }

  snakesim::VecQ joint_velocities(double scale = 1.0) {
    snakesim::VecQ qdot;
    for (int k = 0; k < snakesim::kDof; ++k) qdot[k] = uniform(-scale, scale);
    return qdot;
  }
};

}  // namespace oracles
