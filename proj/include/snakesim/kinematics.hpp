#pragma once

#include <Eigen/Dense>
#include <vector>

#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace snakesim {

// Constant-curvature description of one bending section.
struct ArcParameters {
  double kappa = 0.0;  // curvature, 1/m
  double phi = 0.0;    // bending-plane angle, rad
  double s = 0.0;      // arc length, m
};

// Surface sample points used by the contact model. Axial stations are stored
// both as a global coordinate xi in [0, n_sections] and as the
// (section, local_xi) pair that full_htm resolves them to.
struct SkinGrid {
  std::vector<double> xi;        // global axial coordinate
  std::vector<int> section;      // 1-based section index
  std::vector<double> local_xi;  // position within the section, [0, 1]
  std::vector<double> sigma;     // radial angles, rad
  double radius = 0.0;           // skin radius, m

  std::size_t n_axial() const { return xi.size(); }
  std::size_t n_radial() const { return sigma.size(); }
  std::size_t size() const { return xi.size() * sigma.size(); }
};

// Maps PMA length changes of one section to its arc parameters.
ArcParameters arc_params(const Vec3& lengths, const RobotParams& params);

// Pose of the backbone point at fraction xi in [0, 1] along one section.
Eigen::Matrix4d section_htm(const Vec3& lengths, double xi,
                            const RobotParams& params);
Eigen::Matrix4d section_htm(const ArcParameters& arc, double xi);

// Backbone pose composed with rotation sigma about local Z and translation r
// along the rotated X axis.
Eigen::Matrix4d skin_htm(const Vec3& lengths, double xi, double sigma,
                         double r, const RobotParams& params);
Eigen::Matrix4d skin_htm(const ArcParameters& arc, double xi, double sigma,
                         double r);

// Pose of a surface point of the assembled robot. xi in [0, n_sections] picks
// the section and the station within it; sigma and r give the radial offset.
// Assembly rotates each junction by the PMA mounting offset and relabels the
// downstream triplet to match, so equal length commands bend all sections in
// one plane while skin angles stay section-local.
Eigen::Matrix4d full_htm(const JointState& q, double xi, double sigma,
                         double r, const RobotParams& params);

// Derivative of the full_htm position with respect to all generalized
// coordinates.
Jacobian3Q position_jacobian(const JointState& q, double xi, double sigma,
                             double r, const RobotParams& params);

// Deterministic surface sampling: n_axial stations uniform over the whole
// backbone, n_radial angles uniform on [0, 2*pi), at radius r_s.
SkinGrid skin_grid(const RobotParams& params, int n_axial = 31,
                   int n_radial = 10);

}  // namespace snakesim
