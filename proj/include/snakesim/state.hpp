#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "snakesim/errors.hpp"

namespace snakesim {

// Generalized coordinates: q = [x y z alpha beta gamma | l_11..l_13 l_21..l_33]
// Base pose first (position, then intrinsic ZYX Euler angles), then the nine
// PMA length changes, section-major.
inline constexpr int kBaseDof = 6;
inline constexpr int kActDof = 9;
inline constexpr int kDof = kBaseDof + kActDof;

using Vec3 = Eigen::Vector3d;
using Vec9 = Eigen::Matrix<double, kActDof, 1>;
using VecQ = Eigen::Matrix<double, kDof, 1>;
using MatQ = Eigen::Matrix<double, kDof, kDof>;
using Jacobian3Q = Eigen::Matrix<double, 3, kDof>;

struct JointState {
  VecQ q = VecQ::Zero();

  static JointState from_parts(const Eigen::Matrix<double, kBaseDof, 1>& base,
                               const Vec9& lengths) {
    JointState s;
    s.q.head<kBaseDof>() = base;
    s.q.tail<kActDof>() = lengths;
    return s;
  }

  Vec3 position() const { return q.head<3>(); }
  Vec3 euler() const { return q.segment<3>(3); }
  Vec9 lengths() const { return q.tail<kActDof>(); }

  // Commanded-length clamp into the actuation range [0, dl_max].
  JointState clamp_lengths(double dl_max) const {
    JointState s = *this;
    for (int i = 0; i < kActDof; ++i)
      s.q[kBaseDof + i] = std::clamp(s.q[kBaseDof + i], 0.0, dl_max);
    return s;
  }

  void require_finite() const {
    if (!q.allFinite())
      throw InputDomainError("JointState contains non-finite entries");
  }
};

struct SimState {
  double t = 0.0;
  VecQ q = VecQ::Zero();
  VecQ qdot = VecQ::Zero();

  JointState joints() const {
    JointState s;
    s.q = q;
    return s;
  }

  void require_finite() const {
    if (!std::isfinite(t) || !q.allFinite() || !qdot.allFinite())
      throw InputDomainError("SimState contains non-finite entries");
  }
};

}  // namespace snakesim
