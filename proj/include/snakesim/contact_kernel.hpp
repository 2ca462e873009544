#pragma once

#include <vector>

#include "snakesim/contact.hpp"
#include "snakesim/kinematics_kernel.hpp"

namespace snakesim::detail {

// Generalized ground reaction for the right-hand-side hot path. Overwrites
// wrench; skips building per-point records unless points is non-null.
// Summation runs in fixed grid order so trajectories reproduce exactly.
void contact_accumulate(const VecQ& q, const VecQ& qdot, BaseChart chart,
                        const SkinGrid& grid, const RobotParams& params,
                        VecQ& wrench, std::vector<ContactPoint>* points);

}  // namespace snakesim::detail
