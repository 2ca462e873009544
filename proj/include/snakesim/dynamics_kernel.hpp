#pragma once

#include "snakesim/kinematics_kernel.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

// Chart-aware internals shared by the public dynamics API and the
// integrator. No input validation here.

namespace snakesim {
namespace detail {

// Single fused pass over the quadrature grid producing the inertia matrix,
// the Coriolis force C(q, qdot)*qdot, and the conservative forces. The
// Coriolis force uses the identity C*qdot = sum_i m_i * integral of
// J^T (Jdot qdot), obtained from one directional-derivative sweep instead of
// the full Christoffel tensor.
void eom_fast(const VecQ& q, const VecQ& qdot, BaseChart chart,
              const RobotParams& params, MatQ& inertia, VecQ& coriolis_force,
              VecQ& conservative);

// Minimum-norm solve of M x = rhs for symmetric positive semidefinite M via
// eigendecomposition with a relative eigenvalue cutoff.
VecQ solve_inertia(const MatQ& inertia, const VecQ& rhs);

// Full right-hand-side evaluation in the given chart.
VecQ accelerations(const VecQ& q, const VecQ& qdot, const VecQ& tau,
                   const VecQ& contact_generalized, BaseChart chart,
                   const RobotParams& params);

}  // namespace detail
}  // namespace snakesim
