#pragma once

#include <cmath>

#include "snakesim/dual.hpp"
#include "snakesim/geometry.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

// Scalar-templated constant-curvature kinematics. Everything here is the
// unvalidated kernel shared by the public kinematics API, the dynamics
// quadrature, and the contact sweep; input checking happens at the public
// entry points.

namespace snakesim {

// Euler chart of the floating base. kZyx is the canonical convention used by
// every public operation: R = Rz(gamma)*Ry(beta)*Rx(alpha). kZyxYoff appends
// a constant Ry(pi/2) so its gimbal-lock set (backbone vertical) is disjoint
// from kZyx's (body x-axis vertical); the integrator switches charts to ride
// through lock, everything else stays on kZyx.
enum class BaseChart { kZyx, kZyxYoff };

namespace detail {

inline const Mat3T<double> kChartOffsetR = rot_y(M_PI / 2.0);
inline constexpr double kArcSeriesThreshold = 1e-8;  // on theta^2

// g1(x) = sin(sqrt(x))/sqrt(x) and g2(x) = (1 - cos(sqrt(x)))/x as smooth
// functions of x = theta^2. Fourth-order series below the threshold keeps
// them exact to machine precision across the straight configuration.
template <typename T>
T arc_g1(const T& x) {
  if (scalar_value(x) < kArcSeriesThreshold)
    return 1.0 - x / 6.0 + (x * x) / 120.0;
  T t = sqrt(x);
  return sin(t) / t;
}

template <typename T>
T arc_g2(const T& x) {
  if (scalar_value(x) < kArcSeriesThreshold)
    return 0.5 - x / 24.0 + (x * x) / 720.0;
  T t = sqrt(x);
  return (1.0 - cos(t)) / x;
}

// Arc description of one section: u = kappa*cos(phi), v = kappa*sin(phi),
// s = arc length. Rational in the length changes, so smooth across kappa=0
// (phi itself is only recovered by the public arc_params).
template <typename T>
struct SectionArcT {
  T u, v, s;
};

template <typename T>
SectionArcT<T> section_arc(const T& l1, const T& l2, const T& l3,
                           const RobotParams& P) {
  T sum = l1 + l2 + l3;
  T denom = (3.0 * P.L0 + sum) * P.r_p;
  SectionArcT<T> a;
  a.u = (l2 + l3 - 2.0 * l1) / denom;
  a.v = ((l3 - l2) * std::sqrt(3.0)) / denom;
  a.s = P.L0 + sum * (1.0 / 3.0);
  return a;
}

// Pose of the backbone point at normalized parameter xi in [0, 1]: rotation
// by theta = kappa*s*xi about the in-plane axis perpendicular to the bending
// direction (no torsion), position on the circular arc. Written in terms of
// the rotation vector w = s*xi*(-v, u, 0) so the straight limit is regular.
template <typename T>
PoseT<T> arc_pose(const SectionArcT<T>& arc, double xi) {
  T a = arc.s * xi;
  T wx = -(arc.v * a);
  T wy = arc.u * a;
  T x = wx * wx + wy * wy;  // theta^2
  T g1 = arc_g1(x);
  T g2 = arc_g2(x);
  PoseT<T> out;
  T xy = g2 * (wx * wy);
  out.R.m[0][0] = 1.0 - g2 * (wy * wy);
  out.R.m[0][1] = xy;
  out.R.m[0][2] = g1 * wy;
  out.R.m[1][0] = xy;
  out.R.m[1][1] = 1.0 - g2 * (wx * wx);
  out.R.m[1][2] = -(g1 * wx);
  out.R.m[2][0] = -(g1 * wy);
  out.R.m[2][1] = g1 * wx;
  out.R.m[2][2] = 1.0 - g2 * x;
  T a2g2 = a * a * g2;
  out.p = {arc.u * a2g2, arc.v * a2g2, a * g1};
  return out;
}

// Complete tip transform of a section: arc end, rigid spacer along local Z,
// mounting rotation of the next section's PMA triplet about local Z.
template <typename T>
PoseT<T> section_tip(const SectionArcT<T>& arc, const RobotParams& P) {
  PoseT<T> t = arc_pose(arc, 1.0);
  t.p = t.p + mat_vec_c(t.R, Vec3T<double>{0.0, 0.0, P.d_rigid});
  t.R = mat_mul_c(t.R, rot_z(P.mount_offset));
  return t;
}

// Per-configuration frame chain: joint[0] is the floating base, joint[i] the
// base frame of section i+1, joint[3] the tail end-plate frame.
template <typename T>
struct FramesT {
  SectionArcT<T> arc[3];
  PoseT<T> joint[4];
};

template <typename T>
FramesT<T> build_frames(const Vec3T<T>& pos, const Vec3T<T>& eul,
                        const T lengths[kActDof], const RobotParams& P,
                        BaseChart chart) {
  FramesT<T> f;
  PoseT<T> base;
  base.R = rot_euler_zyx(eul);
  if (chart == BaseChart::kZyxYoff) base.R = mat_mul_c(base.R, kChartOffsetR);
  base.p = pos;
  f.joint[0] = base;
  for (int i = 0; i < 3; ++i) {
    f.arc[i] = section_arc(lengths[3 * i], lengths[3 * i + 1],
                           lengths[3 * i + 2], P);
    if (i > 0) {
      // PMA indexing is carried down the backbone: each mounting rotation
      // relabels the next triplet, so the bending direction counter-rotates
      // by the accumulated offset while the skin frames keep it. Identical
      // commands therefore bend every section in one world plane.
      double off = static_cast<double>(i) * P.mount_offset;
      double c = std::cos(off);
      double sn = std::sin(off);
      T u = f.arc[i].u * c + f.arc[i].v * sn;
      T v = f.arc[i].v * c - f.arc[i].u * sn;
      f.arc[i].u = u;
      f.arc[i].v = v;
    }
    f.joint[i + 1] = compose(f.joint[i], section_tip(f.arc[i], P));
  }
  return f;
}

// Backbone pose at global xi in [0, 3]: completed tips of the preceding
// sections, partial arc of section min(floor(xi)+1, 3). xi = 3 exactly maps
// to the completed tail plate so the unactuated robot spans its full 0.60 m.
template <typename T>
PoseT<T> backbone_pose(const FramesT<T>& f, double xi) {
  int sec = std::min(static_cast<int>(std::floor(xi)), 2);
  double local = xi - sec;
  if (sec == 2 && local >= 1.0) return f.joint[3];
  return compose(f.joint[sec], arc_pose(f.arc[sec], local));
}

// Skin point: radial offset r at circumferential angle sigma in the local
// cross-section plane of the backbone frame.
template <typename T>
Vec3T<T> surface_point(const PoseT<T>& bb, double sigma, double r) {
  return bb.p + mat_vec_c(bb.R, Vec3T<double>{r * std::cos(sigma),
                                              r * std::sin(sigma), 0.0});
}

// ---- dual seeding / extraction -------------------------------------------

using DualQ = Dual<double, kDof>;           // first derivatives w.r.t. q
using DualDir = Dual<DualQ, 1>;             // + directional derivative along qdot
using DualQQ = Dual<DualQ, kDof>;           // + full second derivatives

struct SeededQ {
  Vec3T<DualQ> pos, eul;
  DualQ lengths[kActDof];
};

inline SeededQ seed_first(const VecQ& q) {
  SeededQ s;
  auto mk = [&](int k) {
    DualQ d(q[k]);
    d.der[k] = 1.0;
    return d;
  };
  s.pos = {mk(0), mk(1), mk(2)};
  s.eul = {mk(3), mk(4), mk(5)};
  for (int i = 0; i < kActDof; ++i) s.lengths[i] = mk(kBaseDof + i);
  return s;
}

struct SeededDir {
  Vec3T<DualDir> pos, eul;
  DualDir lengths[kActDof];
};

// Seeds x_k = q_k + eps*qdot_k with the inner dual tracking d/dq: evaluating
// p yields p, J = dp/dq, w = J*qdot, and dw/dq (the columns of Jdot).
inline SeededDir seed_directional(const VecQ& q, const VecQ& qdot) {
  SeededDir s;
  auto mk = [&](int k) {
    DualDir d;
    d.val = DualQ(q[k]);
    d.val.der[k] = 1.0;
    d.der[0] = DualQ(qdot[k]);
    return d;
  };
  s.pos = {mk(0), mk(1), mk(2)};
  s.eul = {mk(3), mk(4), mk(5)};
  for (int i = 0; i < kActDof; ++i) s.lengths[i] = mk(kBaseDof + i);
  return s;
}

struct SeededHess {
  Vec3T<DualQQ> pos, eul;
  DualQQ lengths[kActDof];
};

inline SeededHess seed_second(const VecQ& q) {
  SeededHess s;
  auto mk = [&](int k) {
    DualQQ d;
    d.val = DualQ(q[k]);
    d.val.der[k] = 1.0;
    d.der[k] = DualQ(1.0);
    return d;
  };
  s.pos = {mk(0), mk(1), mk(2)};
  s.eul = {mk(3), mk(4), mk(5)};
  for (int i = 0; i < kActDof; ++i) s.lengths[i] = mk(kBaseDof + i);
  return s;
}

inline Vec3 value_of(const Vec3T<double>& p) { return {p.x, p.y, p.z}; }
template <typename T>
Vec3 value_of(const Vec3T<T>& p) {
  return {scalar_value(p.x), scalar_value(p.y), scalar_value(p.z)};
}

inline void extract_jacobian(const Vec3T<DualQ>& p, Jacobian3Q& J) {
  for (int k = 0; k < kDof; ++k) {
    J(0, k) = p.x.der[k];
    J(1, k) = p.y.der[k];
    J(2, k) = p.z.der[k];
  }
}

}  // namespace detail
}  // namespace snakesim
