#include "snakesim/dynamics.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "snakesim/dynamics_kernel.hpp"
#include "snakesim/errors.hpp"

namespace snakesim {

namespace {

struct QuadRule {
  std::vector<double> x;  // nodes on [0, 1]
  std::vector<double> w;  // weights summing to 1
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence,
// mapped from [-1, 1] to [0, 1].
QuadRule make_gauss_legendre(int n) {
  QuadRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double deriv = 0.0;
    for (int iter = 0; iter < 60; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      deriv = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = -p1 / deriv;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double weight = 2.0 / ((1.0 - x * x) * deriv * deriv);
    rule.x[k] = 0.5 * (1.0 - x);  // descending roots fill from the left
    rule.x[n - 1 - k] = 0.5 * (1.0 + x);
    rule.w[k] = 0.5 * weight;
    rule.w[n - 1 - k] = 0.5 * weight;
  }
  return rule;
}

const QuadRule& unit_gauss_legendre(int n) {
  static std::mutex guard;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

// Backbone point of section i (0-based) at local node xi, for frames built
// with any scalar type.
template <typename T>
Vec3T<T> node_point(const detail::FramesT<T>& frames, int i, double xi) {
  return compose(frames.joint[i], detail::arc_pose(frames.arc[i], xi)).p;
}

MatQ inertia_matrix_q(const VecQ& q, BaseChart chart,
                      const RobotParams& params) {
  const QuadRule& rule = unit_gauss_legendre(params.quadrature_nodes);
  auto seeded = detail::seed_first(q);
  auto frames = detail::build_frames(seeded.pos, seeded.eul, seeded.lengths,
                                     params, chart);
  const double mi = params.section_mass();
  MatQ M = MatQ::Zero();
  Jacobian3Q J;
  for (int i = 0; i < params.n_sections; ++i) {
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      detail::extract_jacobian(node_point(frames, i, rule.x[k]), J);
      M.noalias() += (mi * rule.w[k]) * (J.transpose() * J);
    }
  }
  return 0.5 * (M + M.transpose());
}

VecQ conservative_forces_q(const VecQ& q, BaseChart chart,
                           const RobotParams& params) {
  const QuadRule& rule = unit_gauss_legendre(params.quadrature_nodes);
  auto seeded = detail::seed_first(q);
  auto frames = detail::build_frames(seeded.pos, seeded.eul, seeded.lengths,
                                     params, chart);
  const double mi = params.section_mass();
  VecQ G = VecQ::Zero();
  G.segment<kActDof>(kBaseDof) = params.K_elastic * q.segment<kActDof>(kBaseDof);
  Jacobian3Q J;
  for (int i = 0; i < params.n_sections; ++i) {
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      detail::extract_jacobian(node_point(frames, i, rule.x[k]), J);
      G.noalias() += (mi * rule.w[k] * params.g) * J.row(2).transpose();
    }
  }
  return G;
}

}  // namespace

namespace detail {

void eom_fast(const VecQ& q, const VecQ& qdot, BaseChart chart,
              const RobotParams& params, MatQ& inertia, VecQ& coriolis_force,
              VecQ& conservative) {
  const QuadRule& rule = unit_gauss_legendre(params.quadrature_nodes);
  auto seeded = seed_directional(q, qdot);
  auto frames = build_frames(seeded.pos, seeded.eul, seeded.lengths, params,
                             chart);
  const double mi = params.section_mass();
  inertia.setZero();
  coriolis_force.setZero();
  conservative.setZero();
  conservative.segment<kActDof>(kBaseDof) =
      params.K_elastic * q.segment<kActDof>(kBaseDof);
  Jacobian3Q J;      // dp/dq
  Jacobian3Q Jdot;   // d(pdot)/dq = columns of the time derivative of J
  for (int i = 0; i < params.n_sections; ++i) {
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      Vec3T<DualDir> p = node_point(frames, i, rule.x[k]);
      for (int u = 0; u < kDof; ++u) {
        J(0, u) = p.x.val.der[u];
        J(1, u) = p.y.val.der[u];
        J(2, u) = p.z.val.der[u];
        Jdot(0, u) = p.x.der[0].der[u];
        Jdot(1, u) = p.y.der[0].der[u];
        Jdot(2, u) = p.z.der[0].der[u];
      }
      const double w = mi * rule.w[k];
      inertia.noalias() += w * (J.transpose() * J);
      coriolis_force.noalias() += w * (J.transpose() * (Jdot * qdot));
      conservative.noalias() += (w * params.g) * J.row(2).transpose();
    }
  }
  inertia = 0.5 * (inertia + inertia.transpose()).eval();
}

VecQ solve_inertia(const MatQ& inertia, const VecQ& rhs) {
  if (!inertia.allFinite() || !rhs.allFinite())
    throw NumericalError(
        "non-finite values in the equations of motion",
        std::numeric_limits<double>::quiet_NaN());
  Eigen::SelfAdjointEigenSolver<MatQ> es(inertia);
  if (es.info() != Eigen::Success)
    throw NumericalError("inertia eigendecomposition failed",
                         std::numeric_limits<double>::quiet_NaN());
  const auto& lam = es.eigenvalues();
  const double lam_max = lam.maxCoeff();
  if (!(lam_max > 0.0))
    throw NumericalError(
        "inertia matrix is not positive semidefinite; smallest eigenvalue " +
            std::to_string(lam.minCoeff()),
        lam.minCoeff());
  const double cutoff = 1e-12 * lam_max;
  VecQ y = es.eigenvectors().transpose() * rhs;
  for (int k = 0; k < kDof; ++k) y[k] = lam[k] > cutoff ? y[k] / lam[k] : 0.0;
  return es.eigenvectors() * y;
}

VecQ accelerations(const VecQ& q, const VecQ& qdot, const VecQ& tau,
                   const VecQ& contact_generalized, BaseChart chart,
                   const RobotParams& params) {
  MatQ M;
  VecQ cor, G;
  eom_fast(q, qdot, chart, params, M, cor, G);
  VecQ rhs = tau + contact_generalized - cor - G;
  rhs.segment<kActDof>(kBaseDof) -=
      params.D_damp * qdot.segment<kActDof>(kBaseDof);
  return solve_inertia(M, rhs);
}

}  // namespace detail

MatQ inertia_matrix(const JointState& state, const RobotParams& params) {
  state.require_finite();
  return inertia_matrix_q(state.q, BaseChart::kZyx, params);
}

MatQ coriolis_matrix(const JointState& state, const VecQ& qdot,
                     const RobotParams& params) {
  state.require_finite();
  if (!qdot.allFinite())
    throw InputDomainError("joint velocities must be finite");
  const QuadRule& rule = unit_gauss_legendre(params.quadrature_nodes);
  auto seeded = detail::seed_second(state.q);
  auto frames = detail::build_frames(seeded.pos, seeded.eul, seeded.lengths,
                                     params, BaseChart::kZyx);
  const double mi = params.section_mass();

  // Inertia entries with their q-gradients attached.
  using detail::DualQ;
  std::array<DualQ, kDof * kDof> m_dual{};
  for (int i = 0; i < params.n_sections; ++i) {
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      Vec3T<detail::DualQQ> p = node_point(frames, i, rule.x[k]);
      const double w = mi * rule.w[k];
      for (int v = 0; v < kDof; ++v) {
        for (int u = v; u < kDof; ++u) {
          DualQ term = p.x.der[v] * p.x.der[u] + p.y.der[v] * p.y.der[u] +
                       p.z.der[v] * p.z.der[u];
          m_dual[v * kDof + u] += term * w;
        }
      }
    }
  }
  for (int v = 0; v < kDof; ++v)
    for (int u = 0; u < v; ++u) m_dual[v * kDof + u] = m_dual[u * kDof + v];

  // C_vu = 1/2 (sum_h dM_vu/dq_h qdot_h) + 1/2 (B - B^T) with
  // B_vu = sum_h dM_vh/dq_u qdot_h.
  MatQ A = MatQ::Zero(), B = MatQ::Zero();
  for (int v = 0; v < kDof; ++v) {
    for (int u = 0; u < kDof; ++u) {
      const DualQ& entry = m_dual[v * kDof + u];
      double a = 0.0;
      for (int h = 0; h < kDof; ++h) a += entry.der[h] * qdot[h];
      A(v, u) = a;
      for (int h = 0; h < kDof; ++h) B(v, h) += entry.der[h] * qdot[u];
    }
  }
  return 0.5 * (A + B - B.transpose());
}

VecQ coriolis_times_qdot(const JointState& state, const VecQ& qdot,
                         const RobotParams& params) {
  state.require_finite();
  if (!qdot.allFinite())
    throw InputDomainError("joint velocities must be finite");
  MatQ M;
  VecQ cor, G;
  detail::eom_fast(state.q, qdot, BaseChart::kZyx, params, M, cor, G);
  return cor;
}

MatQ damping_matrix(const RobotParams& params) {
  MatQ D = MatQ::Zero();
  D.diagonal().segment<kActDof>(kBaseDof).setConstant(params.D_damp);
  return D;
}

VecQ conservative_forces(const JointState& state, const RobotParams& params) {
  state.require_finite();
  return conservative_forces_q(state.q, BaseChart::kZyx, params);
}

VecQ actuation_vector(const Vec9& pressures_bar, const RobotParams& params) {
  const double area = params.a_pma_effective();
  VecQ tau = VecQ::Zero();
  for (int k = 0; k < kActDof; ++k) {
    const double p = pressures_bar[k];
    if (!std::isfinite(p) || p < 0.0 || p > params.P_max)
      throw InputDomainError(
          "pressure " + std::to_string(p) + " bar for PMA " +
          std::to_string(k / 3 + 1) + "-" + std::to_string(k % 3 + 1) +
          " outside [0, " + std::to_string(params.P_max) + "]");
    tau[kBaseDof + k] = p * 1e5 * area;
  }
  return tau;
}

EomTerms eom_terms(const JointState& state, const VecQ& qdot,
                   const Vec9& pressures_bar, const RobotParams& params) {
  EomTerms t;
  t.M = inertia_matrix(state, params);
  t.C = coriolis_matrix(state, qdot, params);
  t.D = damping_matrix(params);
  t.G = conservative_forces(state, params);
  t.tau = actuation_vector(pressures_bar, params);
  return t;
}

VecQ forward_dynamics(const JointState& state, const VecQ& qdot,
                      const VecQ& tau, const VecQ& contact_generalized,
                      const RobotParams& params) {
  state.require_finite();
  if (!qdot.allFinite() || !tau.allFinite() || !contact_generalized.allFinite())
    throw InputDomainError("forward dynamics inputs must be finite");
  return detail::accelerations(state.q, qdot, tau, contact_generalized,
                               BaseChart::kZyx, params);
}

EnergyBreakdown energies(const JointState& state, const VecQ& qdot,
                         const RobotParams& params) {
  state.require_finite();
  if (!qdot.allFinite())
    throw InputDomainError("joint velocities must be finite");
  EnergyBreakdown e;
  MatQ M = inertia_matrix_q(state.q, BaseChart::kZyx, params);
  e.kinetic = 0.5 * qdot.dot(M * qdot);
  Vec9 qr = state.q.segment<kActDof>(kBaseDof);
  e.elastic = 0.5 * params.K_elastic * qr.squaredNorm();

  const QuadRule& rule = unit_gauss_legendre(params.quadrature_nodes);
  Vec3T<double> pos{state.q[0], state.q[1], state.q[2]};
  Vec3T<double> eul{state.q[3], state.q[4], state.q[5]};
  double lengths[kActDof];
  for (int k = 0; k < kActDof; ++k) lengths[k] = state.q[kBaseDof + k];
  auto frames =
      detail::build_frames(pos, eul, lengths, params, BaseChart::kZyx);
  const double mi = params.section_mass();
  for (int i = 0; i < params.n_sections; ++i)
    for (std::size_t k = 0; k < rule.x.size(); ++k)
      e.gravitational +=
          mi * rule.w[k] * params.g * node_point(frames, i, rule.x[k]).z;
  return e;
}

}  // namespace snakesim
