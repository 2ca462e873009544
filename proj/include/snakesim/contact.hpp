#pragma once

#include <utility>
#include <vector>

#include "snakesim/kinematics.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace snakesim {

// One skin sample with the ground reaction acting on it. Only points strictly
// below the ground plane carry force.
struct ContactPoint {
  double xi = 0.0;          // global axial coordinate
  double sigma = 0.0;       // radial angle, rad
  Vec3 p = Vec3::Zero();    // world position, m
  Vec3 v = Vec3::Zero();    // world velocity, m/s
  Vec3 F = Vec3::Zero();    // reaction force, N
  bool in_contact = false;  // p.z < 0
};

// Penalty normal force at height z and vertical rate zdot: a spring-damper
// engaged below the plane, clamped at zero so the ground never pulls.
double normal_force(double z, double zdot, const RobotParams& params);

// Ground reaction for a supporting point: anisotropic Coulomb friction with a
// tanh-regularized sign opposing the world-frame sliding velocity, plus the
// normal component.
Vec3 reaction_force(double f_z, double vx, double vy,
                    const RobotParams& params);

// Reactions over a whole skin grid mapped to generalized forces, with the
// per-point records used for contact maps.
std::pair<VecQ, std::vector<ContactPoint>> contact_wrench(
    const JointState& state, const VecQ& qdot, const SkinGrid& grid,
    const RobotParams& params);

}  // namespace snakesim
