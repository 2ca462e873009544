#include "snakesim/gaits.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "snakesim/kinematics.hpp"

namespace snakesim {
namespace {

constexpr int kPmasPerSection = 3;

const char* kTrajectoryHeader =
    "t_s,l_11_m,l_12_m,l_13_m,l_21_m,l_22_m,l_23_m,l_31_m,l_32_m,l_33_m,"
    "P_11_bar,P_12_bar,P_13_bar,P_21_bar,P_22_bar,P_23_bar,P_31_bar,"
    "P_32_bar,P_33_bar";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void GaitSpec::validate(const RobotParams& params) const {
  params.validate();
  if (!std::isfinite(amplitude) || amplitude <= 0.0 ||
      amplitude > params.dl_max)
    throw InputDomainError("GaitSpec.amplitude must be in (0, dl_max]");
  if (!std::isfinite(frequency) || frequency <= 0.0)
    throw InputDomainError("GaitSpec.frequency must be finite and > 0");
  if (!std::isfinite(phase_shift) || phase_shift < 0.0 ||
      phase_shift >= 2.0 * M_PI)
    throw InputDomainError("GaitSpec.phase_shift must be in [0, 2*pi)");
  if (!std::isfinite(duration) || duration <= 0.0)
    throw InputDomainError("GaitSpec.duration must be finite and > 0");
  if (!std::isfinite(max_pressure) || max_pressure <= 0.0 ||
      max_pressure > params.P_max)
    throw InputDomainError("GaitSpec.max_pressure must be in (0, P_max]");
}

GaitSpec planar_gait(const RobotParams& params) {
  GaitSpec spec;
  spec.kind = GaitKind::kPlanarRolling;
  spec.amplitude = 0.75 * params.dl_max;
  spec.phase_shift = 0.0;
  return spec;
}

GaitSpec spatial_gait(const RobotParams& params) {
  GaitSpec spec;
  spec.kind = GaitKind::kSpatialRolling;
  spec.amplitude = 0.75 * params.dl_max;
  spec.phase_shift = M_PI / 3.0;
  return spec;
}

Vec9 rolling_lengths(const GaitSpec& spec, double t,
                     const RobotParams& params) {
  spec.validate(params);
  if (!std::isfinite(t)) throw InputDomainError("gait time must be finite");
  Vec9 lengths;
  for (int i = 0; i < params.n_sections; ++i) {
    for (int j = 0; j < kPmasPerSection; ++j) {
      double phase = 2.0 * M_PI * spec.frequency * t +
                     j * 2.0 * M_PI / kPmasPerSection + i * spec.phase_shift;
      lengths[kPmasPerSection * i + j] =
          0.5 * spec.amplitude * (1.0 + std::sin(phase));
    }
  }
  return lengths;
}

Vec9 length_to_pressure(const Vec9& lengths, const RobotParams& params) {
  params.validate();
  if (!lengths.allFinite())
    throw InputDomainError("lengths contain non-finite entries");
  double c = params.pressure_length_coeff();
  Vec9 pressures;
  for (int i = 0; i < kActDof; ++i) {
    if (lengths[i] < 0.0 || lengths[i] > params.dl_max)
      throw InputDomainError(
          "commanded length outside the actuation range [0, dl_max]");
    pressures[i] = lengths[i] / c;
  }
  return pressures;
}

ControlLaw gait_control(const GaitSpec& spec, const RobotParams& params) {
  spec.validate(params);
  return [spec, params](double t) {
    Vec9 p = length_to_pressure(rolling_lengths(spec, t, params), params);
    return p.cwiseMin(spec.max_pressure).eval();
  };
}

JointTrajectory sample_trajectory(const GaitSpec& spec,
                                  const RobotParams& params, double rate) {
  spec.validate(params);
  if (!std::isfinite(rate) || rate <= 0.0)
    throw InputDomainError("sample rate must be finite and > 0");
  ControlLaw law = gait_control(spec, params);
  long n = static_cast<long>(std::floor(spec.duration * rate + 1e-9)) + 1;
  JointTrajectory traj;
  traj.samples.reserve(n);
  for (long k = 0; k < n; ++k) {
    JointTrajectory::Sample s;
    s.t = k / rate;
    s.lengths = rolling_lengths(spec, s.t, params);
    s.pressures = law(s.t);
    traj.samples.push_back(s);
  }
  return traj;
}

void save_trajectory(const std::string& path, const JointTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trajectory file for writing: " + path);
  out << kTrajectoryHeader << "\n";
  for (const auto& s : traj.samples) {
    out << format_double(s.t);
    for (int i = 0; i < kActDof; ++i) out << "," << format_double(s.lengths[i]);
    for (int i = 0; i < kActDof; ++i)
      out << "," << format_double(s.pressures[i]);
    out << "\n";
  }
  if (!out) throw IoError("write failed for trajectory file: " + path);
}

JointTrajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader)
    throw IoError("unexpected trajectory header in " + path);
  JointTrajectory traj;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        values.push_back(v);
      } catch (const std::exception&) {
        throw IoError("bad number '" + field + "' at " + path + ":" +
                      std::to_string(line_no));
      }
    }
    if (values.size() != 1 + 2 * kActDof)
      throw IoError("expected 19 columns at " + path + ":" +
                    std::to_string(line_no));
    JointTrajectory::Sample s;
    s.t = values[0];
    for (int i = 0; i < kActDof; ++i) {
      s.lengths[i] = values[1 + i];
      s.pressures[i] = values[1 + kActDof + i];
    }
    if (!std::isfinite(s.t) || !s.lengths.allFinite() ||
        !s.pressures.allFinite())
      throw IoError("non-finite value at " + path + ":" +
                    std::to_string(line_no));
    traj.samples.push_back(s);
  }
  return traj;
}

namespace {

// Residual stack p(xi_k) - target_k of the base-relative backbone, with its
// Jacobian in the nine length coordinates.
struct IkProblem {
  const std::vector<Vec3>& targets;
  const RobotParams& params;
  std::vector<double> stations;

  IkProblem(const std::vector<Vec3>& t, const RobotParams& p)
      : targets(t), params(p) {
    stations.resize(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k)
      stations[k] =
          params.n_sections * static_cast<double>(k) / (targets.size() - 1);
  }

  static JointState state_of(const Vec9& q_r) {
    JointState js;
    js.q.tail<kActDof>() = q_r;
    return js;
  }

  Eigen::VectorXd residual(const Vec9& q_r) const {
    JointState js = state_of(q_r);
    Eigen::VectorXd r(3 * targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
      Eigen::Matrix4d htm = full_htm(js, stations[k], 0.0, 0.0, params);
      r.segment<3>(3 * k) = htm.block<3, 1>(0, 3) - targets[k];
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Vec9& q_r) const {
    JointState js = state_of(q_r);
    Eigen::MatrixXd J(3 * targets.size(), kActDof);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      Jacobian3Q full = position_jacobian(js, stations[k], 0.0, 0.0, params);
      J.block<3, kActDof>(3 * k, 0) = full.rightCols<kActDof>();
    }
    return J;
  }
};

}  // namespace

Vec9 ik_fit(const std::vector<Vec3>& targets, const Vec9& initial_guess,
            const RobotParams& params, IkReport* report) {
  params.validate();
  if (targets.size() < 4)
    throw InputDomainError("ik_fit needs at least 4 backbone targets");
  for (const auto& p : targets)
    if (!p.allFinite())
      throw InputDomainError("ik_fit targets contain non-finite entries");
  if (!initial_guess.allFinite())
    throw InputDomainError("ik_fit guess contains non-finite entries");
  for (int i = 0; i < kActDof; ++i)
    if (initial_guess[i] < 0.0 || initial_guess[i] > params.dl_max)
      throw InputDomainError("ik_fit guess outside the bounds [0, dl_max]");

  constexpr int kMaxIterations = 500;
  constexpr double kGradientTol = 1e-8;
  constexpr double kImprovementTol = 1e-12;

  IkProblem problem(targets, params);
  Vec9 q = initial_guess;
  Eigen::VectorXd r = problem.residual(q);
  double ssr = r.squaredNorm();
  IkReport trace;
  trace.residual_history.push_back(ssr);

  auto finish = [&](const Vec9& q_fit, double ssr_fit) {
    trace.residual = ssr_fit;
    if (report) *report = trace;
    return q_fit;
  };
  auto stalled = [&](const char* why) -> IkError {
    trace.residual = ssr;
    if (report) *report = trace;
    return IkError(std::string("ik_fit did not converge: ") + why, q, ssr);
  };

  double lambda = 1e-3;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Eigen::MatrixXd J = problem.jacobian(q);
    Eigen::Matrix<double, kActDof, 1> g = 2.0 * J.transpose() * r;

    // First-order optimality with the box active set: a coordinate pinned at
    // a bound with the gradient pushing outward is already optimal there.
    Eigen::Matrix<double, kActDof, 1> g_free = g;
    for (int i = 0; i < kActDof; ++i) {
      if (q[i] <= 0.0 && g[i] > 0.0) g_free[i] = 0.0;
      if (q[i] >= params.dl_max && g[i] < 0.0) g_free[i] = 0.0;
    }
    if (g_free.norm() < kGradientTol) return finish(q, ssr);

    Eigen::Matrix<double, kActDof, kActDof> A = J.transpose() * J;
    Eigen::Matrix<double, kActDof, 1> damping =
        A.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix<double, kActDof, kActDof> lhs = A;
      lhs.diagonal() += lambda * damping;
      Eigen::Matrix<double, kActDof, 1> delta =
          lhs.ldlt().solve((-0.5 * g).eval());
      Vec9 q_trial = q + delta;
      for (int i = 0; i < kActDof; ++i)
        q_trial[i] = std::clamp(q_trial[i], 0.0, params.dl_max);
      Eigen::VectorXd r_trial = problem.residual(q_trial);
      double ssr_trial = r_trial.squaredNorm();
      if (std::isfinite(ssr_trial) && ssr_trial < ssr) {
        double improvement = ssr - ssr_trial;
        q = q_trial;
        r = std::move(r_trial);
        ssr = ssr_trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        ++trace.iterations;
        trace.residual_history.push_back(ssr);
        if (improvement < kImprovementTol) return finish(q, ssr);
        accepted = true;
      } else {
        lambda *= 3.0;
        if (lambda > 1e12) throw stalled("damping limit reached");
      }
    }
  }
  throw stalled("iteration limit reached");
}

}  // namespace snakesim
