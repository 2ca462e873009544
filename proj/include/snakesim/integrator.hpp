#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "snakesim/contact.hpp"
#include "snakesim/errors.hpp"
#include "snakesim/kinematics.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace snakesim {

// Time-stepping scheme. The adaptive Rosenbrock method handles the stiff
// ground-contact dynamics at practical step sizes; the fixed-step linearly
// implicit Euler fallback exists for cross-checking and debugging; the
// explicit adaptive pair is the economical choice for non-stiff runs such
// as ballistic flight at tight tolerances.
enum class Method { kImplicitAdaptive, kSemiImplicitFixed, kExplicitAdaptive };

struct IntegratorConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double max_step = 1e-2;              // s
  Method method = Method::kImplicitAdaptive;
  double output_rate = 30.0;           // Hz
  double fixed_step = 1e-4;            // s, used by kSemiImplicitFixed

  void validate() const;
};

struct IntegrationStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evals = 0;
  long jacobian_evals = 0;
  long chart_switches = 0;
  double min_step = 0.0;               // smallest accepted step, s
  double max_step = 0.0;               // largest accepted step, s
};

// Trajectory resampled at the output rate. states[j] is the state at
// t0 + j / output_rate; contacts[j] holds the per-point ground records
// there (empty lists when contact is disabled).
struct IntegrateResult {
  std::vector<SimState> states;
  std::vector<std::vector<ContactPoint>> contacts;
  IntegrationStats stats;
};

// Pressure command for each PMA at a given time, bar.
using ControlLaw = std::function<Vec9(double)>;

// 30-vector [qdot; qddot] used by the state-space form.
using StateRate = Eigen::Matrix<double, 2 * kDof, 1>;

// The adaptive step size collapsed; the problem is too stiff for the
// configured tolerances. Carries the last state that integrated cleanly.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& msg, SimState last_valid, double step)
      : Error("stiffness", msg),
        last_valid_(std::move(last_valid)),
        last_step_(step) {}
  const SimState& last_valid() const { return last_valid_; }
  double last_step() const { return last_step_; }

 private:
  SimState last_valid_;
  double last_step_;
};

// The state stopped being finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, SimState last_valid)
      : Error("divergence", msg), last_valid_(std::move(last_valid)) {}
  const SimState& last_valid() const { return last_valid_; }

 private:
  SimState last_valid_;
};

// State-space derivative [qdot; qddot] under the given pressures, with
// ground contact over the default skin grid.
StateRate rhs(const SimState& state, const Vec9& pressures,
              const RobotParams& params);

// Variant with an explicit grid; pass nullptr for ballistic motion.
StateRate rhs(const SimState& state, const Vec9& pressures,
              const RobotParams& params, const SkinGrid* grid);

// Advances the state for `duration` seconds under the control law and
// returns the trajectory resampled at cfg.output_rate, including the first
// and (when duration is a multiple of the sample period) final instants.
IntegrateResult integrate(const SimState& initial, const ControlLaw& control,
                          double duration, const IntegratorConfig& cfg,
                          const RobotParams& params);

// Variant with an explicit grid; pass nullptr to disable ground contact.
IntegrateResult integrate(const SimState& initial, const ControlLaw& control,
                          double duration, const IntegratorConfig& cfg,
                          const RobotParams& params, const SkinGrid* grid);

}  // namespace snakesim
