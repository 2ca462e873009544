#include "snakesim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "snakesim/contact_kernel.hpp"
#include "snakesim/dynamics.hpp"
#include "snakesim/dynamics_kernel.hpp"
#include "snakesim/geometry.hpp"

namespace snakesim {
namespace {

// Stepper state: [q; qdot; t]. Carrying time as a coordinate makes the
// system autonomous, so the finite-difference Jacobian picks up the control
// law's explicit time dependence through its last column.
constexpr int kAug = 2 * kDof + 1;
using VecY = Eigen::Matrix<double, kAug, 1>;
using MatY = Eigen::Matrix<double, kAug, kAug>;

constexpr double kMinStep = 1e-12;           // s, below this the run aborts
constexpr double kChartExitBeta = 1.1;       // rad, leave a chart beyond this
constexpr double kChartMargin = 0.1;         // rad, required gain to switch

VecY pack(const SimState& s) {
  VecY y;
  y.head<kDof>() = s.q;
  y.segment<kDof>(kDof) = s.qdot;
  y[2 * kDof] = s.t;
  return y;
}

SimState unpack(const VecY& y) {
  SimState s;
  s.q = y.head<kDof>();
  s.qdot = y.segment<kDof>(kDof);
  s.t = y[2 * kDof];
  return s;
}

Eigen::Matrix3d chart_rotation(const Eigen::Vector3d& eul, BaseChart chart) {
  Eigen::Matrix3d r = to_eigen(rot_euler_zyx(Vec3T<double>{
      eul.x(), eul.y(), eul.z()}));
  if (chart == BaseChart::kZyxYoff) r *= to_eigen(detail::kChartOffsetR);
  return r;
}

Eigen::Vector3d chart_euler_from_world(const Eigen::Matrix3d& r_world,
                                       BaseChart chart) {
  Eigen::Matrix3d r = r_world;
  if (chart == BaseChart::kZyxYoff)
    r *= to_eigen(detail::kChartOffsetR).transpose();
  return euler_zyx_from_R(r);
}

// Re-expresses the base attitude block of y in another chart, preserving
// the world rotation and angular velocity.
void rechart(VecY& y, BaseChart from, BaseChart to) {
  Eigen::Vector3d eul = y.segment<3>(3);
  Eigen::Vector3d euldot = y.segment<3>(kDof + 3);
  Eigen::Matrix3d r_world = chart_rotation(eul, from);
  Eigen::Vector3d omega = euler_zyx_rate_map(eul) * euldot;
  Eigen::Vector3d eul_new = chart_euler_from_world(r_world, to);
  y.segment<3>(3) = eul_new;
  y.segment<3>(kDof + 3) = euler_rates_from_omega_pinv(eul_new, omega);
}

// Switches to the other chart when the pitch angle nears the gimbal lock of
// the current one and the other chart is meaningfully better off.
bool maybe_switch_chart(VecY& y, BaseChart& chart) {
  if (std::abs(y[4]) <= kChartExitBeta) return false;
  BaseChart other = chart == BaseChart::kZyx ? BaseChart::kZyxYoff
                                             : BaseChart::kZyx;
  Eigen::Vector3d eul_other = chart_euler_from_world(
      chart_rotation(y.segment<3>(3), chart), other);
  if (std::abs(eul_other.y()) >= std::abs(y[4]) - kChartMargin) return false;
  rechart(y, chart, other);
  chart = other;
  return true;
}

struct RhsContext {
  const ControlLaw* control = nullptr;
  const RobotParams* params = nullptr;
  const SkinGrid* grid = nullptr;
  const BaseChart* chart = nullptr;  // tracks the stepper's current chart
  long evals = 0;

  VecY operator()(const VecY& y) {
    ++evals;
    VecQ q = y.head<kDof>();
    VecQ qdot = y.segment<kDof>(kDof);
    VecQ tau = actuation_vector((*control)(y[2 * kDof]), *params);
    VecQ wrench = VecQ::Zero();
    if (grid)
      detail::contact_accumulate(q, qdot, *chart, *grid, *params, wrench,
                                 nullptr);
    VecY f;
    f.head<kDof>() = qdot;
    f.segment<kDof>(kDof) =
        detail::accelerations(q, qdot, tau, wrench, *chart, *params);
    f[2 * kDof] = 1.0;
    return f;
  }

  // Trial stages may wander into states where the dynamics degenerate;
  // report that as a failed stage instead of aborting the run.
  std::optional<VecY> try_eval(const VecY& y) {
    if (!y.allFinite()) return std::nullopt;
    try {
      return (*this)(y);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  }
};

MatY fd_jacobian(RhsContext& f, const VecY& y, const VecY& f0) {
  constexpr double sqrt_eps = 1.4901161193847656e-08;
  MatY J;
  VecY yp = y;
  for (int j = 0; j < kAug; ++j) {
    double h = sqrt_eps * (1.0 + std::abs(y[j]));
    yp[j] = y[j] + h;
    J.col(j) = (f(yp) - f0) / h;
    yp[j] = y[j];
  }
  return J;
}

double error_norm(const VecY& err, const VecY& y0, const VecY& y1,
                  const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (int i = 0; i < kAug; ++i) {
    double sc = cfg.abs_tol +
                cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / kAug);
}

// Cubic Hermite interpolation on one accepted step.
VecY hermite(double t, double t0, double t1, const VecY& y0, const VecY& f0,
             const VecY& y1, const VecY& f1) {
  double h = t1 - t0;
  double u = (t - t0) / h;
  double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * f0 +
         (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * f1;
}

class Emitter {
 public:
  Emitter(const SimState& initial, double duration,
          const IntegratorConfig& cfg, const RobotParams& params,
          const SkinGrid* grid)
      : t0_(initial.t),
        period_(1.0 / cfg.output_rate),
        n_samples_(static_cast<long>(
            std::floor(duration * cfg.output_rate + 1e-9)) + 1),
        params_(params),
        grid_(grid) {
    result_.states.reserve(n_samples_);
    result_.contacts.reserve(n_samples_);
    emit(pack(initial), BaseChart::kZyx);
  }

  // Emits every pending sample inside the accepted step (t0, t1].
  void cover(double t_lo, double t_hi, const VecY& y0, const VecY& f0,
             const VecY& y1, const VecY& f1, BaseChart chart) {
    while (next_ < n_samples_) {
      double ts = t0_ + next_ * period_;
      if (ts > t_hi + 1e-9) break;
      emit(hermite(std::min(ts, t_hi), t_lo, t_hi, y0, f0, y1, f1), chart);
    }
  }

  long pending() const { return n_samples_ - next_; }

  IntegrateResult take() { return std::move(result_); }

 private:
  void emit(VecY y, BaseChart chart) {
    if (chart != BaseChart::kZyx) rechart(y, chart, BaseChart::kZyx);
    SimState s = unpack(y);
    s.t = t0_ + next_ * period_;
    result_.states.push_back(s);
    std::vector<ContactPoint> points;
    if (grid_) {
      VecQ wrench;
      detail::contact_accumulate(s.q, s.qdot, BaseChart::kZyx, *grid_,
                                 params_, wrench, &points);
    }
    result_.contacts.push_back(std::move(points));
    ++next_;
  }

  IntegrateResult result_;
  double t0_;
  double period_;
  long n_samples_;
  long next_ = 0;
  const RobotParams& params_;
  const SkinGrid* grid_;
};

void record_step(IntegrationStats& stats, double h) {
  ++stats.steps_accepted;
  if (stats.min_step == 0.0 || h < stats.min_step) stats.min_step = h;
  if (h > stats.max_step) stats.max_step = h;
}

// One-step linearly implicit Rosenbrock pair with an embedded error
// estimate; L-stable, so the ground-contact stiffness does not limit the
// step size.
void run_adaptive(VecY& y, BaseChart& chart, double t_end, RhsContext& f,
                  const IntegratorConfig& cfg, Emitter& emitter,
                  IntegrationStats& stats) {
  const double d = 1.0 / (2.0 + std::sqrt(2.0));
  const double e32 = 6.0 + std::sqrt(2.0);
  const MatY identity = MatY::Identity();

  double h = std::min(cfg.max_step, 1e-3);
  VecY f0 = f(y);
  bool f0_fresh = true;

  while (y[2 * kDof] < t_end - 1e-12) {
    if (!y.allFinite())
      throw DivergenceError("state became non-finite", unpack(y));
    if (!f0_fresh) f0 = f(y);
    f0_fresh = true;
    if (!f0.allFinite())
      throw DivergenceError("derivative became non-finite", unpack(y));

    h = std::min(h, t_end - y[2 * kDof]);
    MatY J = fd_jacobian(f, y, f0);
    ++stats.jacobian_evals;

    for (;;) {
      if (h < kMinStep)
        throw StiffnessError(
            "step size underflow at t = " + std::to_string(y[2 * kDof]),
            unpack(y), h);
      Eigen::PartialPivLU<MatY> w_lu(identity - (h * d) * J);
      VecY k1 = w_lu.solve(f0);
      std::optional<VecY> f1 = f.try_eval(y + (0.5 * h) * k1);
      if (!f1) {
        h *= 0.2;
        ++stats.steps_rejected;
        continue;
      }
      VecY k2 = w_lu.solve(*f1 - k1) + k1;
      VecY y1 = y + h * k2;
      std::optional<VecY> f2 = f.try_eval(y1);
      if (!f2) {
        h *= 0.2;
        ++stats.steps_rejected;
        continue;
      }
      VecY k3 = w_lu.solve(*f2 - e32 * (k2 - *f1) - 2.0 * (k1 - f0));
      double err = error_norm((h / 6.0) * (k1 - 2.0 * k2 + k3), y, y1, cfg);

      if (!(err <= 1.0)) {
        h *= std::min(0.5, std::max(0.2, 0.8 * std::pow(err, -1.0 / 3.0)));
        ++stats.steps_rejected;
        continue;
      }

      emitter.cover(y[2 * kDof], y1[2 * kDof], y, f0, y1, *f2, chart);
      record_step(stats, h);
      y = y1;
      f0 = *f2;
      if (maybe_switch_chart(y, chart)) {
        ++stats.chart_switches;
        f0_fresh = false;  // derivative components change with the chart
      }
      h = std::min(cfg.max_step,
                   h * std::min(5.0, std::max(0.2, 0.8 * std::pow(
                                                        std::max(err, 1e-10),
                                                        -1.0 / 3.0))));
      break;
    }
  }
}

// Classic embedded 5(4) explicit pair with first-same-as-last reuse. No
// Jacobians, six fresh derivative evaluations per step; wrong tool for the
// contact stiffness but far cheaper on smooth ballistic arcs.
void run_explicit(VecY& y, BaseChart& chart, double t_end, RhsContext& f,
                  const IntegratorConfig& cfg, Emitter& emitter,
                  IntegrationStats& stats) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double h = std::min(cfg.max_step, 1e-3);
  VecY f0 = f(y);
  bool f0_fresh = true;

  while (y[2 * kDof] < t_end - 1e-12) {
    if (!y.allFinite())
      throw DivergenceError("state became non-finite", unpack(y));
    if (!f0_fresh) f0 = f(y);
    f0_fresh = true;
    if (!f0.allFinite())
      throw DivergenceError("derivative became non-finite", unpack(y));

    h = std::min(h, t_end - y[2 * kDof]);

    for (;;) {
      if (h < kMinStep)
        throw StiffnessError(
            "step size underflow at t = " + std::to_string(y[2 * kDof]),
            unpack(y), h);
      std::optional<VecY> k2, k3, k4, k5, k6, k7;
      VecY y1;
      k2 = f.try_eval(y + h * (a21 * f0));
      if (k2) k3 = f.try_eval(y + h * (a31 * f0 + a32 * *k2));
      if (k3) k4 = f.try_eval(y + h * (a41 * f0 + a42 * *k2 + a43 * *k3));
      if (k4)
        k5 = f.try_eval(y + h * (a51 * f0 + a52 * *k2 + a53 * *k3 +
                                 a54 * *k4));
      if (k5)
        k6 = f.try_eval(y + h * (a61 * f0 + a62 * *k2 + a63 * *k3 +
                                 a64 * *k4 + a65 * *k5));
      if (k6) {
        y1 = y + h * (b1 * f0 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
        k7 = f.try_eval(y1);
      }
      if (!k7) {
        h *= 0.2;
        ++stats.steps_rejected;
        continue;
      }
      VecY err_vec = h * (e1 * f0 + e3 * *k3 + e4 * *k4 + e5 * *k5 +
                          e6 * *k6 + e7 * *k7);
      double err = error_norm(err_vec, y, y1, cfg);

      if (!(err <= 1.0)) {
        h *= std::min(0.5, std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0)));
        ++stats.steps_rejected;
        continue;
      }

      emitter.cover(y[2 * kDof], y1[2 * kDof], y, f0, y1, *k7, chart);
      record_step(stats, h);
      y = y1;
      f0 = *k7;
      if (maybe_switch_chart(y, chart)) {
        ++stats.chart_switches;
        f0_fresh = false;
      }
      h = std::min(cfg.max_step,
                   h * std::min(5.0, std::max(0.2, 0.9 * std::pow(
                                                        std::max(err, 1e-12),
                                                        -1.0 / 5.0))));
      break;
    }
  }
}

// Fixed-step linearly implicit Euler; the Jacobian is refreshed every 25
// steps, which is ample at dt = 1e-4 s.
void run_fixed(VecY& y, BaseChart& chart, double t_end, RhsContext& f,
               const IntegratorConfig& cfg, Emitter& emitter,
               IntegrationStats& stats) {
  const MatY identity = MatY::Identity();
  Eigen::PartialPivLU<MatY> w_lu;
  long since_refresh = -1;

  while (y[2 * kDof] < t_end - 1e-12) {
    if (!y.allFinite())
      throw DivergenceError("state became non-finite", unpack(y));
    double h = std::min(cfg.fixed_step, t_end - y[2 * kDof]);
    VecY f0 = f(y);
    if (!f0.allFinite())
      throw DivergenceError("derivative became non-finite", unpack(y));
    if (since_refresh < 0 || since_refresh >= 25 ||
        h != cfg.fixed_step) {
      w_lu.compute(identity - h * fd_jacobian(f, y, f0));
      ++stats.jacobian_evals;
      since_refresh = 0;
    }
    VecY y1 = y + h * w_lu.solve(f0);
    std::optional<VecY> f1 = f.try_eval(y1);
    if (!f1)
      throw DivergenceError(
          "state became non-finite at t = " + std::to_string(y1[2 * kDof]),
          unpack(y));
    emitter.cover(y[2 * kDof], y1[2 * kDof], y, f0, y1, *f1, chart);
    record_step(stats, h);
    y = y1;
    ++since_refresh;
    if (maybe_switch_chart(y, chart)) {
      ++stats.chart_switches;
      since_refresh = -1;
    }
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw InputDomainError("integrator tolerances must be > 0");
  if (!(max_step > 0.0))
    throw InputDomainError("max_step must be > 0, got " +
                           std::to_string(max_step));
  if (!(output_rate > 0.0))
    throw InputDomainError("output_rate must be > 0, got " +
                           std::to_string(output_rate));
  if (!(fixed_step > 0.0))
    throw InputDomainError("fixed_step must be > 0, got " +
                           std::to_string(fixed_step));
}

StateRate rhs(const SimState& state, const Vec9& pressures,
              const RobotParams& params) {
  SkinGrid grid = skin_grid(params);
  return rhs(state, pressures, params, &grid);
}

StateRate rhs(const SimState& state, const Vec9& pressures,
              const RobotParams& params, const SkinGrid* grid) {
  state.require_finite();
  VecQ tau = actuation_vector(pressures, params);
  VecQ wrench = VecQ::Zero();
  if (grid)
    detail::contact_accumulate(state.q, state.qdot, BaseChart::kZyx, *grid,
                               params, wrench, nullptr);
  StateRate f;
  f.head<kDof>() = state.qdot;
  f.tail<kDof>() = detail::accelerations(state.q, state.qdot, tau, wrench,
                                         BaseChart::kZyx, params);
  return f;
}

IntegrateResult integrate(const SimState& initial, const ControlLaw& control,
                          double duration, const IntegratorConfig& cfg,
                          const RobotParams& params) {
  SkinGrid grid = skin_grid(params);
  return integrate(initial, control, duration, cfg, params, &grid);
}

IntegrateResult integrate(const SimState& initial, const ControlLaw& control,
                          double duration, const IntegratorConfig& cfg,
                          const RobotParams& params, const SkinGrid* grid) {
  initial.require_finite();
  cfg.validate();
  params.validate();
  if (!(duration > 0.0))
    throw InputDomainError("duration must be > 0, got " +
                           std::to_string(duration));
  if (!control) throw InputDomainError("control law must be callable");

  Emitter emitter(initial, duration, cfg, params, grid);
  IntegrationStats stats;

  RhsContext f;
  f.control = &control;
  f.params = &params;
  f.grid = grid;

  VecY y = pack(initial);
  BaseChart chart = BaseChart::kZyx;
  if (maybe_switch_chart(y, chart)) ++stats.chart_switches;
  f.chart = &chart;

  double t_end = initial.t + duration;
  switch (cfg.method) {
    case Method::kImplicitAdaptive:
      run_adaptive(y, chart, t_end, f, cfg, emitter, stats);
      break;
    case Method::kExplicitAdaptive:
      run_explicit(y, chart, t_end, f, cfg, emitter, stats);
      break;
    case Method::kSemiImplicitFixed:
      run_fixed(y, chart, t_end, f, cfg, emitter, stats);
      break;
  }

  stats.rhs_evals = f.evals;
  IntegrateResult result = emitter.take();
  result.stats = stats;
  return result;
}

}  // namespace snakesim
