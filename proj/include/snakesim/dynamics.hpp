#pragma once

#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace snakesim {

// All terms of M qddot + (C + D) qdot + G = tau + generalized contact force.
struct EomTerms {
  MatQ M;    // generalized inertia
  MatQ C;    // Coriolis/centrifugal matrix from Christoffel symbols
  MatQ D;    // viscous damping, actuated coordinates only
  VecQ G;    // elastic plus gravity forces
  VecQ tau;  // actuation forces, zero on the base coordinates
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double gravitational = 0.0;
  double elastic = 0.0;
  double total() const { return kinetic + gravitational + elastic; }
};

// Generalized inertia: each section contributes its mass integrated against
// the squared backbone position Jacobian.
MatQ inertia_matrix(const JointState& state, const RobotParams& params);

// Coriolis matrix assembled entry-by-entry from Christoffel symbols of the
// inertia matrix. This is the reference path; the integrator uses a fused
// product evaluation that must agree with coriolis_matrix(q, qdot) * qdot.
MatQ coriolis_matrix(const JointState& state, const VecQ& qdot,
                     const RobotParams& params);

// Product C(q, qdot) * qdot without forming C.
VecQ coriolis_times_qdot(const JointState& state, const VecQ& qdot,
                         const RobotParams& params);

MatQ damping_matrix(const RobotParams& params);

// Elastic restoring forces on the actuated coordinates plus gravity on all
// coordinates, with signs such that the terms sit on the equation's
// left-hand side.
VecQ conservative_forces(const JointState& state, const RobotParams& params);

// Generalized forces from chamber pressures in bar.
VecQ actuation_vector(const Vec9& pressures_bar, const RobotParams& params);

EomTerms eom_terms(const JointState& state, const VecQ& qdot,
                   const Vec9& pressures_bar, const RobotParams& params);

// Solves M qddot = tau + contact_generalized - (C + D) qdot - G. The solve is
// an eigendecomposition with a relative cutoff: inertia is exactly singular
// in a few degenerate configurations (e.g. the perfectly straight robot has a
// massless spin mode about its own axis), where the minimum-norm acceleration
// is the physically meaningful one.
VecQ forward_dynamics(const JointState& state, const VecQ& qdot,
                      const VecQ& tau, const VecQ& contact_generalized,
                      const RobotParams& params);

EnergyBreakdown energies(const JointState& state, const VecQ& qdot,
                         const RobotParams& params);

}  // namespace snakesim
