#include "snakesim/kinematics.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "snakesim/errors.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

using snakesim::ArcParameters;
using snakesim::InputDomainError;
using snakesim::JointState;
using snakesim::RobotParams;
using snakesim::Vec3;
using snakesim::VecQ;

namespace {

double max_abs_diff(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

double orthonormality_defect(const Eigen::Matrix4d& htm) {
  const Eigen::Matrix3d r = htm.block<3, 3>(0, 0);
  return (r.transpose() * r - Eigen::Matrix3d::Identity())
      .cwiseAbs()
      .maxCoeff();
}

Eigen::Matrix4d spacer_offset_htm(const RobotParams& params) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.block<3, 3>(0, 0) = oracles::rot_z(params.mount_offset);
  t(2, 3) = params.d_rigid;
  return t;
}

double wrap_angle(double a) {
  return a - 2.0 * M_PI * std::round(a / (2.0 * M_PI));
}

}  // namespace

TEST_CASE("arc parameters of straight and uniformly extended sections") {
  RobotParams params;

  ArcParameters rest = snakesim::arc_params(Vec3(0, 0, 0), params);
  CHECK(rest.kappa == 0.0);
  CHECK(rest.phi == 0.0);
  CHECK(rest.s == doctest::Approx(0.15).epsilon(1e-15));

  ArcParameters uniform = snakesim::arc_params(Vec3(0.03, 0.03, 0.03), params);
  CHECK(uniform.kappa == 0.0);
  CHECK(uniform.phi == 0.0);
  CHECK(uniform.s == doctest::Approx(0.18).epsilon(1e-15));
}

TEST_CASE("arc parameters of a single extended chamber") {
  RobotParams params;
  ArcParameters arc = snakesim::arc_params(Vec3(0.03, 0.0, 0.0), params);
  CHECK(arc.kappa == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(arc.s == doctest::Approx(0.16).epsilon(1e-14));
  // Extending chamber 1 bends the section away from it.
  CHECK(arc.phi == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("arc parameters reject out-of-stroke and non-finite lengths") {
  RobotParams params;
  CHECK_THROWS_WITH_AS(snakesim::arc_params(Vec3(0, -0.01, 0), params),
                       doctest::Contains("PMA 2"), InputDomainError);
  CHECK_THROWS_WITH_AS(snakesim::arc_params(Vec3(0, 0, 0.08), params),
                       doctest::Contains("PMA 3"), InputDomainError);
  CHECK_THROWS_AS(
      snakesim::arc_params(Vec3(std::nan(""), 0, 0), params),
      InputDomainError);
}

TEST_CASE("arc parameters stay inside their documented ranges") {
  RobotParams params;
  oracles::StateSampler sampler(101);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 dl(sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max));
    ArcParameters arc = snakesim::arc_params(dl, params);
    CHECK(arc.kappa >= 0.0);
    CHECK(arc.phi > -M_PI);
    CHECK(arc.phi <= M_PI);
    CHECK(arc.s >= params.L0);
    CHECK(arc.s <= params.L0 + params.dl_max);
  }
}

TEST_CASE("cyclic chamber permutation rotates the bending plane by 120 deg") {
  RobotParams params;
  oracles::StateSampler sampler(102);
  for (int trial = 0; trial < 50; ++trial) {
    Vec3 dl(sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max));
    ArcParameters a = snakesim::arc_params(dl, params);
    ArcParameters b =
        snakesim::arc_params(Vec3(dl[2], dl[0], dl[1]), params);
    CHECK(b.kappa == doctest::Approx(a.kappa).epsilon(1e-12));
    CHECK(b.s == doctest::Approx(a.s).epsilon(1e-14));
    if (a.kappa > 0.0)
      CHECK(std::abs(wrap_angle(b.phi - a.phi - 2.0 * M_PI / 3.0)) < 1e-12);
  }
}

TEST_CASE("arc parameters invert the actuator curve geometry") {
  // Independent forward check: reconstruct each PMA's curve from the fitted
  // arc by offsetting the centreline at radius r_p, measure its length by
  // quadrature, and compare with the commanded length L0 + dl.
  RobotParams params;
  oracles::StateSampler sampler(103);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 dl(sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max));
    ArcParameters arc = snakesim::arc_params(dl, params);
    for (int j = 1; j <= 3; ++j) {
      double measured = oracles::actuator_curve_length(arc.kappa, arc.phi,
                                                       arc.s, params.r_p, j);
      CHECK(std::abs(measured - (params.L0 + dl[j - 1])) < 5e-7);
    }
  }
}

TEST_CASE("section pose of a straight section") {
  RobotParams params;
  Eigen::Matrix4d tip = snakesim::section_htm(Vec3(0, 0, 0), 1.0, params);
  CHECK(max_abs_diff(tip, oracles::cc_pose(0.0, 0.0, 0.15, 1.0)) == 0.0);
  CHECK(tip(2, 3) == doctest::Approx(0.15).epsilon(1e-15));

  Eigen::Matrix4d origin = snakesim::section_htm(Vec3(0, 0, 0), 0.0, params);
  CHECK(max_abs_diff(origin, Eigen::Matrix4d::Identity()) == 0.0);

  Eigen::Matrix4d mid = snakesim::section_htm(Vec3(0, 0, 0), 0.5, params);
  CHECK(mid(2, 3) == doctest::Approx(0.075).epsilon(1e-15));
  CHECK(orthonormality_defect(mid) == 0.0);
}

TEST_CASE("section pose of a single extended chamber matches the chord") {
  RobotParams params;
  Vec3 dl(0.03, 0.0, 0.0);
  Eigen::Matrix4d tip = snakesim::section_htm(dl, 1.0, params);
  Eigen::Vector3d p = tip.block<3, 1>(0, 3);
  // Chord of an arc with kappa = 10 1/m, s = 0.16 m:
  // (2/kappa)*sin(kappa*s/2).
  CHECK(p.norm() == doctest::Approx(0.14347121817990457).epsilon(1e-13));
  CHECK(oracles::cc_chord(10.0, 0.16) ==
        doctest::Approx(0.14347121817990457).epsilon(1e-13));

  // Full pose against the independent bend-plane construction.
  ArcParameters arc = snakesim::arc_params(dl, params);
  Eigen::Matrix4d ref = oracles::cc_pose(arc.kappa, arc.phi, arc.s, 1.0);
  CHECK(max_abs_diff(tip, ref) < 1e-13);
}

TEST_CASE("section pose matches the bend-plane construction at random arcs") {
  RobotParams params;
  oracles::StateSampler sampler(104);
  const double stations[] = {0.0, 0.3, 0.7, 1.0};
  for (int trial = 0; trial < 25; ++trial) {
    Vec3 dl(sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max));
    ArcParameters arc = snakesim::arc_params(dl, params);
    for (double xi : stations) {
      Eigen::Matrix4d got = snakesim::section_htm(dl, xi, params);
      Eigen::Matrix4d ref = oracles::cc_pose(arc.kappa, arc.phi, arc.s, xi);
      CHECK(max_abs_diff(got, ref) < 1e-12);
      CHECK(max_abs_diff(got, snakesim::section_htm(arc, xi)) < 1e-13);
    }
  }
}

TEST_CASE("section pose is continuous across the straight threshold") {
  RobotParams params;
  // With lengths (c + delta, c, c) the curvature is
  // 2*delta / (r_p*(3*L0 + 3*c + delta)); delta near 3e-9 puts the curvature
  // at the series-expansion threshold of 1e-6 1/m.
  const double c = 0.01;
  const double delta_at_threshold = 3e-9;
  Eigen::Matrix4d below = snakesim::section_htm(
      Vec3(c + delta_at_threshold * 0.999, c, c), 1.0, params);
  Eigen::Matrix4d above = snakesim::section_htm(
      Vec3(c + delta_at_threshold * 1.001, c, c), 1.0, params);
  CHECK(max_abs_diff(below, above) < 1e-9);

  // Convergence to the straight-prismatic pose as the lengths equalize.
  Eigen::Matrix4d straight = snakesim::section_htm(Vec3(c, c, c), 1.0, params);
  double prev = 1.0;
  for (double delta : {1e-7, 1e-9, 1e-11}) {
    double diff = max_abs_diff(
        snakesim::section_htm(Vec3(c + delta, c, c), 1.0, params), straight);
    CHECK(diff < 100.0 * delta);
    CHECK(diff < prev);
    prev = diff;
  }
}

TEST_CASE("skin pose reduces to the backbone at zero radius") {
  RobotParams params;
  oracles::StateSampler sampler(105);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 dl(sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max));
    double xi = sampler.uniform(0.0, 1.0);
    double sigma = sampler.uniform(0.0, 2.0 * M_PI);
    Eigen::Matrix4d skin = snakesim::skin_htm(dl, xi, sigma, 0.0, params);
    Eigen::Matrix4d bb = snakesim::section_htm(dl, xi, params);
    CHECK((skin.block<3, 1>(0, 3) - bb.block<3, 1>(0, 3)).norm() < 1e-15);
  }
}

TEST_CASE("skin pose offsets along the rotated X axis") {
  RobotParams params;
  Eigen::Matrix4d px = snakesim::skin_htm(Vec3(0, 0, 0), 0.0, 0.0, 0.03,
                                          params);
  CHECK((px.block<3, 1>(0, 3) - Eigen::Vector3d(0.03, 0, 0)).norm() < 1e-15);

  Eigen::Matrix4d py = snakesim::skin_htm(Vec3(0, 0, 0), 0.0, M_PI / 2, 0.03,
                                          params);
  CHECK((py.block<3, 1>(0, 3) - Eigen::Vector3d(0, 0.03, 0)).norm() < 1e-15);

  // The factorization is exactly backbone * Rz(sigma) * Trans_x(r).
  oracles::StateSampler sampler(106);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 dl(sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max),
            sampler.uniform(0.0, params.dl_max));
    double xi = sampler.uniform(0.0, 1.0);
    double sigma = sampler.uniform(0.0, 2.0 * M_PI);
    double r = sampler.uniform(0.0, 0.05);
    Eigen::Matrix4d rz = Eigen::Matrix4d::Identity();
    rz.block<3, 3>(0, 0) = oracles::rot_z(sigma);
    Eigen::Matrix4d tx = Eigen::Matrix4d::Identity();
    tx(0, 3) = r;
    Eigen::Matrix4d expect =
        snakesim::section_htm(dl, xi, params) * rz * tx;
    CHECK(max_abs_diff(snakesim::skin_htm(dl, xi, sigma, r, params), expect) <
          1e-14);
  }
}

TEST_CASE("assembled pose at rest reaches the full robot length") {
  RobotParams params;
  JointState q;  // all zero
  Eigen::Matrix4d tail = snakesim::full_htm(q, 3.0, 0.0, 0.0, params);
  CHECK((tail.block<3, 1>(0, 3) - Eigen::Vector3d(0, 0, 0.60)).norm() < 1e-12);
}

TEST_CASE("assembled pose passes base translation through") {
  RobotParams params;
  JointState q;
  q.q[0] = 1.0;
  q.q[1] = 2.0;
  q.q[2] = 3.0;
  Eigen::Matrix4d base = snakesim::full_htm(q, 0.0, 0.0, 0.0, params);
  CHECK((base.block<3, 1>(0, 3) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
  CHECK((base.block<3, 3>(0, 0) - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("assembled pose with a yawed base keeps the tail on the Z axis") {
  RobotParams params;
  JointState q;
  q.q[5] = M_PI;  // yaw
  Eigen::Matrix4d tail = snakesim::full_htm(q, 3.0, 0.0, 0.0, params);
  CHECK((tail.block<3, 1>(0, 3) - Eigen::Vector3d(0, 0, 0.60)).norm() < 1e-12);
}

TEST_CASE("assembled pose composes base rotation like ZYX Euler angles") {
  RobotParams params;
  oracles::StateSampler sampler(107);
  for (int trial = 0; trial < 20; ++trial) {
    JointState q;
    for (int k = 0; k < 3; ++k) q.q[k] = sampler.uniform(-0.5, 0.5);
    q.q[3] = sampler.uniform(-M_PI, M_PI);
    q.q[4] = sampler.uniform(-1.2, 1.2);
    q.q[5] = sampler.uniform(-M_PI, M_PI);
    Eigen::Matrix3d rb = oracles::rot_z(q.q[5]) * oracles::rot_y(q.q[4]) *
                         oracles::rot_x(q.q[3]);
    Eigen::Vector3d pb(q.q[0], q.q[1], q.q[2]);
    Eigen::Matrix4d tail = snakesim::full_htm(q, 3.0, 0.0, 0.0, params);
    Eigen::Vector3d expect = pb + rb * Eigen::Vector3d(0, 0, 0.60);
    CHECK((tail.block<3, 1>(0, 3) - expect).norm() < 1e-12);
    Eigen::Matrix4d base = snakesim::full_htm(q, 0.0, 0.0, 0.0, params);
    CHECK((base.block<3, 3>(0, 0) - rb).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("assembled pose is consistent across section boundaries") {
  RobotParams params;
  Eigen::Matrix4d joint = spacer_offset_htm(params);
  oracles::StateSampler sampler(108);
  for (int trial = 0; trial < 10; ++trial) {
    JointState q;
    q.q = sampler.joint_positions(params);
    for (double boundary : {1.0, 2.0, 3.0}) {
      Eigen::Matrix4d at = snakesim::full_htm(q, boundary, 0.0, 0.0, params);
      Eigen::Matrix4d just_before =
          snakesim::full_htm(q, boundary - 1e-9, 0.0, 0.0, params);
      CHECK(max_abs_diff(at, just_before * joint) < 1e-7);
    }
  }
}

TEST_CASE("assembled pose rejects stations outside the robot") {
  RobotParams params;
  JointState q;
  CHECK_THROWS_AS(snakesim::full_htm(q, 3.2, 0.0, 0.0, params),
                  InputDomainError);
  CHECK_THROWS_AS(snakesim::full_htm(q, -0.1, 0.0, 0.0, params),
                  InputDomainError);
  CHECK_THROWS_AS(snakesim::full_htm(q, 1.0, 0.0, -0.01, params),
                  InputDomainError);
}

TEST_CASE("assembled poses are orthonormal everywhere") {
  RobotParams params;
  oracles::StateSampler sampler(109);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    JointState q;
    q.q = sampler.joint_positions(params);
    double xi = sampler.uniform(0.0, 3.0);
    double sigma = sampler.uniform(0.0, 2.0 * M_PI);
    Eigen::Matrix4d htm = snakesim::full_htm(q, xi, sigma, params.r_s, params);
    worst = std::max(worst, orthonormality_defect(htm));
    CHECK(htm.block<3, 3>(0, 0).determinant() ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("position jacobian: base translation columns are the identity") {
  RobotParams params;
  oracles::StateSampler sampler(110);
  for (int trial = 0; trial < 5; ++trial) {
    JointState q;
    q.q = sampler.joint_positions(params);
    snakesim::Jacobian3Q jac = snakesim::position_jacobian(
        q, sampler.uniform(0.0, 3.0), sampler.uniform(0.0, 2.0 * M_PI),
        params.r_s, params);
    CHECK((jac.block<3, 3>(0, 0) - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("position jacobian: base origin does not move with the actuators") {
  RobotParams params;
  JointState q;
  snakesim::Jacobian3Q jac =
      snakesim::position_jacobian(q, 0.0, 0.0, 0.0, params);
  CHECK(jac.block<3, 9>(0, snakesim::kBaseDof).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("position jacobian matches central finite differences") {
  RobotParams params;
  oracles::StateSampler sampler(111);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    JointState q;
    q.q = sampler.joint_positions(params);
    double xi = sampler.uniform(0.0, 3.0);
    double sigma = sampler.uniform(0.0, 2.0 * M_PI);
    double r = (trial % 2 == 0) ? params.r_s : 0.0;
    snakesim::Jacobian3Q ad =
        snakesim::position_jacobian(q, xi, sigma, r, params);
    snakesim::Jacobian3Q fd = oracles::fd_jacobian(
        [&](const VecQ& v) -> snakesim::Vec3 {
          JointState s;
          s.q = v;
          return snakesim::full_htm(s, xi, sigma, r, params)
              .block<3, 1>(0, 3);
        },
        q.q);
    double rel = (ad - fd).cwiseAbs().maxCoeff() /
                 std::max(1e-12, fd.cwiseAbs().maxCoeff());
    worst_rel = std::max(worst_rel, rel);
    CHECK((ad - fd).cwiseAbs().maxCoeff() < 1e-7);
  }
  CHECK(worst_rel < 1e-4);
}

TEST_CASE("skin grid covers the surface deterministically") {
  RobotParams params;
  snakesim::SkinGrid grid = snakesim::skin_grid(params);
  CHECK(grid.size() == 310);
  CHECK(grid.n_axial() == 31);
  CHECK(grid.n_radial() == 10);
  CHECK(grid.radius == params.r_s);
  CHECK(grid.xi.front() == 0.0);
  CHECK(grid.xi.back() == 3.0);
  CHECK(grid.sigma.front() == 0.0);
  CHECK(grid.sigma[1] == doctest::Approx(2.0 * M_PI / 10).epsilon(1e-15));
  // Station 10 sits exactly on the first section boundary and is attributed
  // to the start of section 2.
  CHECK(grid.xi[10] == 1.0);
  CHECK(grid.section[10] == 2);
  CHECK(grid.local_xi[10] == 0.0);
  CHECK(grid.section[30] == 3);
  CHECK(grid.local_xi[30] == 1.0);
  for (std::size_t i = 0; i < grid.n_axial(); ++i)
    CHECK(grid.xi[i] ==
          doctest::Approx(grid.section[i] - 1 + grid.local_xi[i])
              .epsilon(1e-15));

  snakesim::SkinGrid tiny = snakesim::skin_grid(params, 2, 1);
  CHECK(tiny.size() == 2);
  CHECK(tiny.xi.front() == 0.0);
  CHECK(tiny.xi.back() == 3.0);
  CHECK(tiny.sigma.front() == 0.0);
}

TEST_CASE("skin grid points of the rest pose lie on a cylinder") {
  RobotParams params;
  snakesim::SkinGrid grid = snakesim::skin_grid(params);
  JointState q;
  for (std::size_t i = 0; i < grid.n_axial(); ++i) {
    for (std::size_t k = 0; k < grid.n_radial(); ++k) {
      Eigen::Matrix4d htm = snakesim::full_htm(q, grid.xi[i], grid.sigma[k],
                                               grid.radius, params);
      double radial = std::hypot(htm(0, 3), htm(1, 3));
      CHECK(radial == doctest::Approx(params.r_s).epsilon(1e-12));
    }
  }
}
