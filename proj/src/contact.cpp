#include "snakesim/contact.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "snakesim/contact_kernel.hpp"
#include "snakesim/errors.hpp"

namespace snakesim {

double normal_force(double z, double zdot, const RobotParams& params) {
  double sgn = (z > 0.0) ? 1.0 : (z < 0.0) ? -1.0 : 0.0;
  double raw = -0.5 * (1.0 - sgn) * (params.K_g * z + params.B_g * zdot);
  return std::max(0.0, raw);
}

Vec3 reaction_force(double f_z, double vx, double vy,
                    const RobotParams& params) {
  if (!std::isfinite(f_z) || f_z < 0.0)
    throw InputDomainError("normal force must be finite and >= 0, got " +
                           std::to_string(f_z));
  return {-params.mu_x * std::tanh(vx / params.v_eps) * f_z,
          -params.mu_y * std::tanh(vy / params.v_eps) * f_z, f_z};
}

namespace detail {

void contact_accumulate(const VecQ& q, const VecQ& qdot, BaseChart chart,
                        const SkinGrid& grid, const RobotParams& params,
                        VecQ& wrench, std::vector<ContactPoint>* points) {
  wrench.setZero();
  if (points) {
    points->clear();
    points->reserve(grid.size());
  }
  SeededQ seeded = seed_first(q);
  FramesT<DualQ> frames =
      build_frames(seeded.pos, seeded.eul, seeded.lengths, params, chart);
  for (std::size_t a = 0; a < grid.n_axial(); ++a) {
    PoseT<DualQ> bb = backbone_pose(frames, grid.xi[a]);
    for (std::size_t k = 0; k < grid.n_radial(); ++k) {
      Vec3T<DualQ> pd = surface_point(bb, grid.sigma[k], grid.radius);
      Vec3 p(pd.x.val, pd.y.val, pd.z.val);
      Vec3 v = Vec3::Zero();
      for (int u = 0; u < kDof; ++u) {
        v.x() += pd.x.der[u] * qdot[u];
        v.y() += pd.y.der[u] * qdot[u];
        v.z() += pd.z.der[u] * qdot[u];
      }
      bool touching = p.z() < 0.0;
      Vec3 F = Vec3::Zero();
      if (touching) {
        F = reaction_force(normal_force(p.z(), v.z(), params), v.x(), v.y(),
                           params);
        for (int u = 0; u < kDof; ++u)
          wrench[u] += pd.x.der[u] * F.x() + pd.y.der[u] * F.y() +
                       pd.z.der[u] * F.z();
      }
      if (points)
        points->push_back({grid.xi[a], grid.sigma[k], p, v, F, touching});
    }
  }
}

}  // namespace detail

std::pair<VecQ, std::vector<ContactPoint>> contact_wrench(
    const JointState& state, const VecQ& qdot, const SkinGrid& grid,
    const RobotParams& params) {
  state.require_finite();
  if (!qdot.allFinite())
    throw InputDomainError("generalized velocity must be finite");
  if (!std::isfinite(grid.radius) || grid.radius < 0.0)
    throw InputDomainError("skin radius must be finite and >= 0, got " +
                           std::to_string(grid.radius));
  for (double xi : grid.xi)
    if (!(xi >= 0.0 && xi <= params.n_sections))
      throw InputDomainError("grid xi must lie in [0, n_sections], got " +
                             std::to_string(xi));
  VecQ wrench;
  std::vector<ContactPoint> points;
  detail::contact_accumulate(state.q, qdot, BaseChart::kZyx, grid, params,
                             wrench, &points);
  return {std::move(wrench), std::move(points)};
}

}  // namespace snakesim
