#include "snakesim/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snakesim/kinematics_kernel.hpp"

namespace snakesim {

namespace {

void check_xi_unit(double xi) {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw InputDomainError("xi must lie in [0, 1] within a section, got " +
                           std::to_string(xi));
}

void check_offset(double sigma, double r) {
  if (!std::isfinite(sigma))
    throw InputDomainError("sigma must be finite");
  if (!(r >= 0.0) || !std::isfinite(r))
    throw InputDomainError("skin radius r must be finite and >= 0, got " +
                           std::to_string(r));
}

Eigen::Matrix4d pose_to_htm(const PoseT<double>& pose) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) T(i, j) = pose.R.m[i][j];
  T(0, 3) = pose.p.x;
  T(1, 3) = pose.p.y;
  T(2, 3) = pose.p.z;
  return T;
}

PoseT<double> skin_offset_pose(double sigma, double r) {
  PoseT<double> off;
  off.R = rot_z(sigma);
  off.p = {r, 0.0, 0.0};
  // Rz(sigma) then Trans_x(r): translation lands at r*(cos, sin, 0).
  off.p = mat_vec(off.R, off.p);
  return off;
}

detail::SectionArcT<double> arc_components(const ArcParameters& arc) {
  return {arc.kappa * std::cos(arc.phi), arc.kappa * std::sin(arc.phi), arc.s};
}

void check_lengths(const Vec3& dl, const RobotParams& params) {
  for (int j = 0; j < 3; ++j) {
    if (!std::isfinite(dl[j]))
      throw InputDomainError("PMA " + std::to_string(j + 1) +
                             " length change is not finite");
    if (dl[j] < 0.0 || dl[j] > params.dl_max)
      throw InputDomainError(
          "PMA " + std::to_string(j + 1) + " length change " +
          std::to_string(dl[j]) + " outside [0, " +
          std::to_string(params.dl_max) + "]");
  }
}

}  // namespace

ArcParameters arc_params(const Vec3& dl, const RobotParams& params) {
  check_lengths(dl, params);
  ArcParameters out;
  double sum = dl.sum();
  out.s = params.L0 + sum / 3.0;
  // Stable form of l1^2+l2^2+l3^2 - l1*l2 - l2*l3 - l3*l1 (non-negative).
  double d12 = dl[0] - dl[1], d23 = dl[1] - dl[2], d31 = dl[2] - dl[0];
  double disc = 0.5 * (d12 * d12 + d23 * d23 + d31 * d31);
  if (disc < params.eps_straight * params.eps_straight) {
    out.kappa = 0.0;
    out.phi = 0.0;
    return out;
  }
  out.kappa = 2.0 * std::sqrt(disc) / (params.r_p * (3.0 * params.L0 + sum));
  out.phi = std::atan2(std::sqrt(3.0) * (dl[2] - dl[1]),
                       dl[1] + dl[2] - 2.0 * dl[0]);
  return out;
}

Eigen::Matrix4d section_htm(const ArcParameters& arc, double xi) {
  check_xi_unit(xi);
  if (!(arc.s > 0.0) || arc.kappa < 0.0 || !std::isfinite(arc.kappa) ||
      !std::isfinite(arc.phi))
    throw InputDomainError("invalid arc parameters");
  return pose_to_htm(detail::arc_pose(arc_components(arc), xi));
}

Eigen::Matrix4d section_htm(const Vec3& lengths, double xi,
                            const RobotParams& params) {
  check_xi_unit(xi);
  check_lengths(lengths, params);
  return pose_to_htm(detail::arc_pose(
      detail::section_arc(lengths[0], lengths[1], lengths[2], params), xi));
}

Eigen::Matrix4d skin_htm(const ArcParameters& arc, double xi, double sigma,
                         double r) {
  check_offset(sigma, r);
  check_xi_unit(xi);
  PoseT<double> bb = detail::arc_pose(arc_components(arc), xi);
  return pose_to_htm(compose(bb, skin_offset_pose(sigma, r)));
}

Eigen::Matrix4d skin_htm(const Vec3& lengths, double xi, double sigma,
                         double r, const RobotParams& params) {
  check_offset(sigma, r);
  check_xi_unit(xi);
  check_lengths(lengths, params);
  PoseT<double> bb = detail::arc_pose(
      detail::section_arc(lengths[0], lengths[1], lengths[2], params), xi);
  return pose_to_htm(compose(bb, skin_offset_pose(sigma, r)));
}

Eigen::Matrix4d full_htm(const JointState& state, double xi, double sigma,
                         double r, const RobotParams& params) {
  state.require_finite();
  check_offset(sigma, r);
  if (!(xi >= 0.0 && xi <= params.n_sections))
    throw InputDomainError("xi must lie in [0, n_sections], got " +
                           std::to_string(xi));
  VecQ q = state.q;
  Vec3T<double> pos{q[0], q[1], q[2]};
  Vec3T<double> eul{q[3], q[4], q[5]};
  double lengths[kActDof];
  for (int i = 0; i < kActDof; ++i) lengths[i] = q[kBaseDof + i];
  auto frames =
      detail::build_frames(pos, eul, lengths, params, BaseChart::kZyx);
  PoseT<double> bb = detail::backbone_pose(frames, xi);
  return pose_to_htm(compose(bb, skin_offset_pose(sigma, r)));
}

Jacobian3Q position_jacobian(const JointState& state, double xi, double sigma,
                             double r, const RobotParams& params) {
  state.require_finite();
  check_offset(sigma, r);
  if (!(xi >= 0.0 && xi <= params.n_sections))
    throw InputDomainError("xi must lie in [0, n_sections], got " +
                           std::to_string(xi));
  auto seeded = detail::seed_first(state.q);
  auto frames = detail::build_frames(seeded.pos, seeded.eul, seeded.lengths,
                                     params, BaseChart::kZyx);
  auto bb = detail::backbone_pose(frames, xi);
  auto p = detail::surface_point(bb, sigma, r);
  Jacobian3Q J;
  detail::extract_jacobian(p, J);
  return J;
}

SkinGrid skin_grid(const RobotParams& params, int n_axial, int n_radial) {
  if (n_axial < 2) throw InputDomainError("skin_grid needs n_axial >= 2");
  if (n_radial < 1) throw InputDomainError("skin_grid needs n_radial >= 1");
  SkinGrid grid;
  grid.xi.resize(n_axial);
  grid.section.resize(n_axial);
  grid.local_xi.resize(n_axial);
  grid.sigma.resize(n_radial);
  grid.radius = params.r_s;
  double span = static_cast<double>(params.n_sections);
  for (int i = 0; i < n_axial; ++i) {
    double xi = span * static_cast<double>(i) / (n_axial - 1);
    int sec = std::min(static_cast<int>(std::floor(xi)) + 1, params.n_sections);
    grid.xi[i] = xi;
    grid.section[i] = sec;
    grid.local_xi[i] = xi - (sec - 1);
  }
  for (int k = 0; k < n_radial; ++k)
    grid.sigma[k] = 2.0 * M_PI * static_cast<double>(k) / n_radial;
  return grid;
}

}  // namespace snakesim
