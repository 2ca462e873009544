// End-to-end acceptance suite. Each numbered check prints one [PASS] or
// [FAIL] line with the measured quantity and its pinned bound; check 7 is
// informational and prints [REPORT] lines instead. The exit code is the
// number of failed gating checks, so a zero exit means the build meets all
// of them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "snakesim/contact.hpp"
#include "snakesim/dynamics.hpp"
#include "snakesim/errors.hpp"
#include "snakesim/gaits.hpp"
#include "snakesim/harness.hpp"
#include "snakesim/integrator.hpp"
#include "snakesim/kinematics.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

using namespace snakesim;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int g_failures = 0;

void gate(int id, bool ok, const std::string& what, double elapsed) {
  if (!ok) ++g_failures;
  std::printf("[%s] %2d. %s  [%.1f s]\n", ok ? "PASS" : "FAIL", id,
              what.c_str(), elapsed);
  std::fflush(stdout);
}

void report(int id, const std::string& what) {
  std::printf("[REPORT] %2d. %s\n", id, what.c_str());
  std::fflush(stdout);
}

void gate_error(int id, const std::exception& e, double elapsed) {
  gate(id, false, std::string("exception: ") + e.what(), elapsed);
}

// Inertia time derivative along the flow by Richardson-extrapolated central
// differences, accurate enough to probe the skew-symmetry identity well
// below the 1e-8 bound.
MatQ inertia_dot(const VecQ& q, const VecQ& qdot, const RobotParams& params,
                 double h = 4e-5) {
  auto central = [&](double step) {
    JointState plus, minus;
    plus.q = q + step * qdot;
    minus.q = q - step * qdot;
    return ((inertia_matrix(plus, params) - inertia_matrix(minus, params)) /
            (2.0 * step))
        .eval();
  };
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

SimState release_pose(double height) {
  SimState s;
  s.q[2] = height;
  s.q[4] = M_PI / 2.0;
  return s;
}

ControlLaw zero_pressure() {
  return [](double) { return Vec9(Vec9::Zero()); };
}

double min_skin_z(const std::vector<ContactPoint>& pts) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) m = std::min(m, p.p.z());
  return m;
}

bool within_half(double measured, double target) {
  return std::abs(measured) >= 0.5 * std::abs(target) &&
         std::abs(measured) <= 1.5 * std::abs(target);
}

}  // namespace

int main() {
  RobotParams params;
  params.validate();
  const std::filesystem::path outdir = "acceptance_out";

  // 1. Analytic position Jacobian against central finite differences.
  {
    Stopwatch sw;
    try {
      oracles::StateSampler sampler(101);
      double worst = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        JointState q;
        q.q = sampler.joint_positions(params);
        double xi = sampler.uniform(0.0, 3.0);
        double sigma = sampler.uniform(0.0, 2.0 * M_PI);
        double r = (trial % 2 == 0) ? params.r_s : 0.0;
        Jacobian3Q ad = position_jacobian(q, xi, sigma, r, params);
        Jacobian3Q fd = oracles::fd_jacobian(
            [&](const VecQ& v) -> Vec3 {
              JointState s;
              s.q = v;
              return full_htm(s, xi, sigma, r, params).block<3, 1>(0, 3);
            },
            q.q, 1e-6);
        worst = std::max(worst, (ad - fd).cwiseAbs().maxCoeff() /
                                    std::max(1e-12,
                                             fd.cwiseAbs().maxCoeff()));
      }
      gate(1, worst < 1e-4,
           "position jacobian vs central differences (h=1e-6): worst rel "
           "err " +
               num(worst) + " (bound 1e-4, 100 states)",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(1, e, sw.seconds());
    }
  }

  // 2. Inertia matrix structure. The mass model is a line of point masses,
  // so spinning the cross-sections about the backbone tangent costs no
  // kinetic energy: the inertia matrix has exactly one zero eigenvalue at
  // every configuration and is positive definite on the complement.
  {
    Stopwatch sw;
    try {
      oracles::StateSampler sampler(202);
      double worst_sym = 0.0;
      double worst_block = 0.0;
      double worst_lam0 = std::numeric_limits<double>::infinity();
      double worst_lam1 = std::numeric_limits<double>::infinity();
      for (int trial = 0; trial < 100; ++trial) {
        JointState q;
        q.q = sampler.joint_positions(params);
        MatQ M = inertia_matrix(q, params);
        worst_sym =
            std::max(worst_sym, (M - M.transpose()).cwiseAbs().maxCoeff());
        worst_block = std::max(
            worst_block,
            (M.topLeftCorner<3, 3>() -
             params.m_total * Eigen::Matrix3d::Identity())
                .cwiseAbs()
                .maxCoeff());
        Eigen::SelfAdjointEigenSolver<MatQ> eig(M);
        double lmax = eig.eigenvalues().maxCoeff();
        worst_lam0 = std::min(worst_lam0, eig.eigenvalues()[0] / lmax);
        worst_lam1 = std::min(worst_lam1, eig.eigenvalues()[1] / lmax);
      }
      bool ok = worst_sym < 1e-10 && worst_block < 1e-12 &&
                worst_lam0 > -1e-12 && worst_lam1 > 1e-9;
      gate(2, ok,
           "inertia symmetric (worst asym " + num(worst_sym) +
               " < 1e-10), top-left = m_total*I (worst dev " +
               num(worst_block) + " < 1e-12), positive semidefinite with "
               "one zero-cost spin mode (lambda0/lmax " +
               num(worst_lam0) + " > -1e-12, lambda1/lmax " +
               num(worst_lam1) + " > 1e-9, 100 states)",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(2, e, sw.seconds());
    }
  }

  // 3. Passivity: qdot' (Mdot - 2C) qdot vanishes when C is assembled from
  // Christoffel symbols.
  {
    Stopwatch sw;
    try {
      oracles::StateSampler sampler(303);
      double worst = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        JointState q;
        q.q = sampler.joint_positions(params);
        VecQ qdot = sampler.joint_velocities();
        qdot.normalize();
        MatQ S = inertia_dot(q.q, qdot, params) -
                 2.0 * coriolis_matrix(q, qdot, params);
        worst = std::max(worst, std::abs(qdot.dot(S * qdot)));
      }
      gate(3, worst < 1e-8,
           "passivity |qdot'(Mdot-2C)qdot| worst " + num(worst) +
               " < 1e-8 per unit speed squared (100 states)",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(3, e, sw.seconds());
    }
  }

  // 4. Energy conservation in ballistic flight with damping off.
  {
    Stopwatch sw;
    try {
      RobotParams frictionless = params;
      frictionless.D_damp = 0.0;
      SimState s0;
      s0.q[2] = 1.0;
      s0.q.tail<kActDof>().setConstant(0.02);
      s0.qdot[0] = 0.3;
      s0.qdot[1] = -0.2;
      s0.qdot[2] = 1.0;
      s0.qdot[3] = 0.5;
      s0.qdot[4] = 0.3;
      s0.qdot[5] = -0.4;
      IntegratorConfig cfg;
      cfg.method = Method::kExplicitAdaptive;
      cfg.rel_tol = 1e-8;
      cfg.abs_tol = 1e-10;
      IntegrateResult r = integrate(s0, zero_pressure(), 1.0, cfg,
                                    frictionless, nullptr);
      double e0 = energies(r.states.front().joints(),
                           r.states.front().qdot, frictionless)
                      .total();
      double e1 = energies(r.states.back().joints(), r.states.back().qdot,
                           frictionless)
                      .total();
      double drift = std::abs(e1 - e0) / std::abs(e0);
      gate(4, drift < 1e-4,
           "ballistic 1 s at tolerance 1e-8: relative energy drift " +
               num(drift) + " < 1e-4",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(4, e, sw.seconds());
    }
  }

  // 5. Drop test from 0.6 m: the robot comes to rest on the plane with
  // bounded penetration and stays there. Also produces the settled state
  // reused by the gait checks below.
  DropReport drop;
  bool have_drop = false;
  {
    Stopwatch sw;
    try {
      ExperimentConfig cfg;
      cfg.output_dir = (outdir / "drop").string();
      drop = run_drop_test(cfg);
      have_drop = true;
      double static_pen = std::max(0.0, -drop.final_min_z);
      double floor_after_settle = 0.0;
      for (std::size_t k = 0; k < drop.states.size(); ++k) {
        if (drop.states[k].t < drop.settle_time) continue;
        floor_after_settle = std::min(floor_after_settle,
                                      min_skin_z(drop.skin_records[k]));
      }
      double wall = sw.seconds();
      bool ok = drop.settled && drop.settle_time <= kSettleDuration &&
                drop.final_min_z >= -0.005 && drop.final_min_z <= 0.0 &&
                floor_after_settle >= -(static_pen + 0.005) && wall < 120.0;
      gate(5, ok,
           "drop from 0.6 m: settled=" +
               std::string(drop.settled ? "yes" : "no") + " at t=" +
               num(drop.settle_time) + " s (limit 2), min z " +
               num(drop.final_min_z) + " m in [-0.005, 0], post-settle "
               "floor " +
               num(floor_after_settle) + " >= " + num(-(static_pen + 0.005)),
           wall);
    } catch (const std::exception& e) {
      gate_error(5, e, sw.seconds());
    }
  }

  // 6 + 7. Rolling gaits at 3 bar / 0.5 Hz for 15 s, starting from the
  // settled pose. Check 6 gates the orderings; check 7 reports how close
  // the velocities come to the reference values without gating.
  GaitRunResult planar_run, spatial_run;
  bool have_planar = false, have_spatial = false;
  double planar_wall = 0.0, spatial_wall = 0.0;
  {
    Stopwatch sw;
    try {
      const SimState* settled = have_drop ? &drop.states.back() : nullptr;
      {
        Stopwatch swp;
        ExperimentConfig cfg;
        cfg.gait = planar_gait(params);
        cfg.output_dir = (outdir / "planar").string();
        planar_run = run_gait(cfg, settled);
        have_planar = true;
        planar_wall = swp.seconds();
      }
      {
        Stopwatch sws;
        ExperimentConfig cfg;
        cfg.gait = spatial_gait(params);
        cfg.output_dir = (outdir / "spatial").string();
        spatial_run = run_gait(cfg, settled);
        have_spatial = true;
        spatial_wall = sws.seconds();
      }
      const GaitMetrics& mp = planar_run.metrics;
      const GaitMetrics& ms = spatial_run.metrics;
      bool ok = std::abs(mp.vy_cm_s) > std::abs(mp.vx_cm_s) &&
                std::abs(ms.vx_cm_s) < std::abs(mp.vx_cm_s) &&
                mp.net_displacement_m > 0.05 &&
                ms.net_displacement_m > 0.05 && planar_wall < 600.0 &&
                spatial_wall < 600.0;
      gate(6, ok,
           "gait ordering: planar |Vy|=" + num(std::abs(mp.vy_cm_s)) +
               " > |Vx|=" + num(std::abs(mp.vx_cm_s)) + " cm/s, spatial "
               "|Vx|=" +
               num(std::abs(ms.vx_cm_s)) + " < planar |Vx|, net "
               "displacement planar " +
               num(mp.net_displacement_m) + " m / spatial " +
               num(ms.net_displacement_m) + " m > 0.05",
           sw.seconds());
      report(7, "planar (|Vx|, |Vy|) = (" + num(std::abs(mp.vx_cm_s)) +
                    ", " + num(std::abs(mp.vy_cm_s)) +
                    ") cm/s vs reference (3.51, 9.39) +-50%: Vx " +
                    (within_half(mp.vx_cm_s, 3.51) ? "within" : "outside") +
                    ", Vy " +
                    (within_half(mp.vy_cm_s, 9.39) ? "within" : "outside"));
      report(7, "spatial (|Vx|, |Vy|) = (" + num(std::abs(ms.vx_cm_s)) +
                    ", " + num(std::abs(ms.vy_cm_s)) +
                    ") cm/s vs reference (0.67, 7.77) +-50%: Vx " +
                    (within_half(ms.vx_cm_s, 0.67) ? "within" : "outside") +
                    ", Vy " +
                    (within_half(ms.vy_cm_s, 7.77) ? "within" : "outside"));
    } catch (const std::exception& e) {
      gate_error(6, e, sw.seconds());
      report(7, "skipped: gait runs unavailable");
    }
  }

  // 8. Ground reactions across the full planar run: normal components never
  // pull, and points at or above the surface carry no force.
  {
    Stopwatch sw;
    try {
      if (!have_planar) throw std::runtime_error("no gait run to inspect");
      long samples = 0, points = 0, negative_fz = 0, loaded_above = 0;
      for (const auto& recs : planar_run.skin_records) {
        ++samples;
        for (const auto& pt : recs) {
          ++points;
          if (pt.F.z() < 0.0) ++negative_fz;
          if (pt.p.z() >= 0.0 && pt.F.norm() != 0.0) ++loaded_above;
        }
      }
      bool ok = points > 0 && negative_fz == 0 && loaded_above == 0;
      gate(8, ok,
           "contact non-adhesion: " + std::to_string(negative_fz) +
               " negative F_z and " + std::to_string(loaded_above) +
               " loaded above-ground points across " +
               std::to_string(points) + " point samples (" +
               std::to_string(samples) + " frames)",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(8, e, sw.seconds());
    }
  }

  // 9. Inverse-kinematics round trip: recover known joint vectors from the
  // backbone positions they generate, starting from perturbed guesses.
  {
    Stopwatch sw;
    try {
      oracles::StateSampler sampler(909);
      double worst_err = 0.0;
      double worst_res = 0.0;
      int recovered = 0;
      const int trials = 50;
      for (int trial = 0; trial < trials; ++trial) {
        Vec9 truth;
        for (int k = 0; k < kActDof; ++k)
          truth[k] = sampler.uniform(0.1 * params.dl_max,
                                     0.9 * params.dl_max);
        JointState js = JointState::from_parts(
            Eigen::Matrix<double, 6, 1>::Zero(), truth);
        std::vector<Vec3> targets;
        for (int k = 0; k < 7; ++k)
          targets.push_back(
              full_htm(js, 3.0 * k / 6.0, 0.0, 0.0, params).block<3, 1>(0,
                                                                        3));
        Vec9 guess;
        for (int k = 0; k < kActDof; ++k)
          guess[k] = std::clamp(truth[k] + sampler.uniform(-0.005, 0.005),
                                1e-4, params.dl_max - 1e-4);
        IkReport rep;
        Vec9 fit = ik_fit(targets, guess, params, &rep);
        double err = (fit - truth).cwiseAbs().maxCoeff();
        worst_err = std::max(worst_err, err);
        worst_res = std::max(worst_res, rep.residual);
        if (err < 1e-6 && rep.residual < 1e-12) ++recovered;
      }
      gate(9, recovered == trials,
           "ik fit recovered " + std::to_string(recovered) + "/" +
               std::to_string(trials) + " generators (worst err " +
               num(worst_err) + " < 1e-6, worst residual " + num(worst_res) +
               " < 1e-12)",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(9, e, sw.seconds());
    }
  }

  // 10. Refinement: tighter tolerances barely move a 2 s gait segment, and
  // the fixed-step method lands where the adaptive implicit one does.
  {
    Stopwatch sw;
    try {
      if (!have_drop) throw std::runtime_error("no settled drop state");
      GaitSpec spec = planar_gait(params);
      ControlLaw law = gait_control(spec, params);
      SimState start = drop.states.back();
      start.t = 0.0;

      IntegratorConfig base_cfg;
      IntegrateResult coarse = integrate(start, law, 2.0, base_cfg, params);
      IntegratorConfig tight_cfg = base_cfg;
      tight_cfg.rel_tol /= 2.0;
      tight_cfg.abs_tol /= 2.0;
      IntegrateResult fine = integrate(start, law, 2.0, tight_cfg, params);
      Vec3 pa = coarse.states.back().q.head<3>();
      Vec3 pb = fine.states.back().q.head<3>();
      double gait_rel = (pa - pb).norm() / std::max(1e-3, pa.norm());

      IntegratorConfig fixed_cfg;
      fixed_cfg.method = Method::kSemiImplicitFixed;
      IntegrateResult fixed_run =
          integrate(release_pose(0.6), zero_pressure(), 2.0, fixed_cfg,
                    params);
      Vec3 pi = drop.states.back().q.head<3>();
      Vec3 pf = fixed_run.states.back().q.head<3>();
      double drop_rel = (pi - pf).norm() / std::max(1e-3, pi.norm());

      bool ok = gait_rel < 1e-3 && drop_rel < 1e-2;
      gate(10, ok,
           "refinement: tolerance halving moves 2 s gait endpoint " +
               num(gait_rel) + " relative (< 1e-3); implicit vs fixed-step "
               "drop endpoints differ " +
               num(drop_rel) + " relative (< 1e-2)",
           sw.seconds());
    } catch (const std::exception& e) {
      gate_error(10, e, sw.seconds());
    }
  }

  std::printf("%d of 9 gating checks failed (check 7 is reported only)\n",
              g_failures);
  return g_failures;
}
