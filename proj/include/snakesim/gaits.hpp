#pragma once

#include <string>
#include <utility>
#include <vector>

#include "snakesim/errors.hpp"
#include "snakesim/integrator.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace snakesim {

enum class GaitKind { kPlanarRolling, kSpatialRolling };

// Rolling-gait waveform description. Planar rolling drives all sections in
// one rotating bending plane; spatial rolling staggers the sections by a
// constant phase, producing a helix-like shape.
struct GaitSpec {
  GaitKind kind = GaitKind::kPlanarRolling;
  double amplitude = 0.0;     // peak PMA length change, m
  double frequency = 0.5;     // Hz
  double phase_shift = 0.0;   // rad between adjacent sections
  double duration = 15.0;     // s
  double max_pressure = 3.0;  // bar, command ceiling

  void validate(const RobotParams& params) const;
};

GaitSpec planar_gait(const RobotParams& params);
GaitSpec spatial_gait(const RobotParams& params);

// Commanded jointspace and pressure trajectory, sampled on a fixed grid.
struct JointTrajectory {
  struct Sample {
    double t = 0.0;  // s
    Vec9 lengths = Vec9::Zero();    // m
    Vec9 pressures = Vec9::Zero();  // bar
  };
  std::vector<Sample> samples;
};

// PMA length changes at time t: l_ij = (A/2)(1 + sin(2 pi f t +
// (j-1) 2 pi/3 + (i-1) phase_shift)) for PMA j of section i.
Vec9 rolling_lengths(const GaitSpec& spec, double t,
                     const RobotParams& params);

// Affine length-to-pressure calibration P = l / c with
// c = dl_max / P_max by default.
Vec9 length_to_pressure(const Vec9& lengths, const RobotParams& params);

// Pressure command law for the integrator: the calibrated pressures of the
// rolling waveform, capped at the spec's command ceiling.
ControlLaw gait_control(const GaitSpec& spec, const RobotParams& params);

// The control law sampled over the gait duration at the given rate.
JointTrajectory sample_trajectory(const GaitSpec& spec,
                                  const RobotParams& params,
                                  double rate = 30.0);

// CSV import/export; one header row declaring units, then t-major rows.
void save_trajectory(const std::string& path, const JointTrajectory& traj);
JointTrajectory load_trajectory(const std::string& path);

// Convergence trace of an inverse-kinematics fit.
struct IkReport {
  int iterations = 0;
  double residual = 0.0;                 // final sum of squared distances
  std::vector<double> residual_history;  // per accepted iterate
};

// The fit stalled before reaching the convergence thresholds; carries the
// best iterate found.
class IkError : public Error {
 public:
  IkError(const std::string& msg, Vec9 best, double residual)
      : Error("ik_convergence", msg),
        best_(std::move(best)),
        residual_(residual) {}
  const Vec9& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  Vec9 best_;
  double residual_;
};

// Fits PMA length changes so the base-relative backbone passes through the
// targets, which sample the backbone uniformly in xi over [0, 3] (at least
// four points, endpoints included). Box-constrained Levenberg-Marquardt
// least squares on [0, dl_max]^9.
Vec9 ik_fit(const std::vector<Vec3>& targets, const Vec9& initial_guess,
            const RobotParams& params, IkReport* report = nullptr);

}  // namespace snakesim
