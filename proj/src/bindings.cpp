#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "snakesim/contact.hpp"
#include "snakesim/dynamics.hpp"
#include "snakesim/gaits.hpp"
#include "snakesim/harness.hpp"
#include "snakesim/integrator.hpp"
#include "snakesim/kinematics.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace py = pybind11;
using namespace snakesim;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Spatial dynamics of a three-section pneumatic soft robotic snake: "
      "constant-curvature kinematics, Lagrangian dynamics, distributed "
      "ground contact, gaits, and experiment harness";

  // most-derived first is not required: pybind11 matches translators in
  // reverse registration order, so register the base before the leaves
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputDomainError>(m, "InputDomainError",
                                           PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("BASE_DOF") = kBaseDof;
  m.attr("ACT_DOF") = kActDof;
  m.attr("DOF") = kDof;
  m.attr("SETTLE_DURATION") = kSettleDuration;

  py::class_<RobotParams>(m, "RobotParams")
      .def(py::init<>())
      .def_readwrite("n_sections", &RobotParams::n_sections)
      .def_readwrite("L0", &RobotParams::L0)
      .def_readwrite("r_p", &RobotParams::r_p)
      .def_readwrite("r_s", &RobotParams::r_s)
      .def_readwrite("d_rigid", &RobotParams::d_rigid)
      .def_readwrite("m_total", &RobotParams::m_total)
      .def_readwrite("mount_offset", &RobotParams::mount_offset)
      .def_readwrite("dl_max", &RobotParams::dl_max)
      .def_readwrite("K_elastic", &RobotParams::K_elastic)
      .def_readwrite("D_damp", &RobotParams::D_damp)
      .def_readwrite("K_g", &RobotParams::K_g)
      .def_readwrite("B_g", &RobotParams::B_g)
      .def_readwrite("mu_x", &RobotParams::mu_x)
      .def_readwrite("mu_y", &RobotParams::mu_y)
      .def_readwrite("g", &RobotParams::g)
      .def_readwrite("P_max", &RobotParams::P_max)
      .def_readwrite("A_pma", &RobotParams::A_pma)
      .def_readwrite("v_eps", &RobotParams::v_eps)
      .def_readwrite("eps_straight", &RobotParams::eps_straight)
      .def_readwrite("quadrature_nodes", &RobotParams::quadrature_nodes)
      .def("a_pma_effective", &RobotParams::a_pma_effective)
      .def("total_length", &RobotParams::total_length)
      .def("section_mass", &RobotParams::section_mass)
      .def("pressure_length_coeff", &RobotParams::pressure_length_coeff)
      .def("validate", &RobotParams::validate);

  py::class_<ArcParameters>(m, "ArcParameters")
      .def_readonly("kappa", &ArcParameters::kappa)
      .def_readonly("phi", &ArcParameters::phi)
      .def_readonly("s", &ArcParameters::s);

  py::class_<SkinGrid>(m, "SkinGrid")
      .def(py::init<>())
      .def_readwrite("xi", &SkinGrid::xi)
      .def_readwrite("section", &SkinGrid::section)
      .def_readwrite("local_xi", &SkinGrid::local_xi)
      .def_readwrite("sigma", &SkinGrid::sigma)
      .def_readwrite("radius", &SkinGrid::radius)
      .def("n_axial", &SkinGrid::n_axial)
      .def("n_radial", &SkinGrid::n_radial)
      .def("size", &SkinGrid::size);

  py::class_<JointState>(m, "JointState")
      .def(py::init<>())
      .def_readwrite("q", &JointState::q)
      .def_static("from_parts", &JointState::from_parts, py::arg("base"),
                  py::arg("lengths"))
      .def("position", &JointState::position)
      .def("euler", &JointState::euler)
      .def("lengths", &JointState::lengths)
      .def("clamp_lengths", &JointState::clamp_lengths, py::arg("dl_max"));

  py::class_<SimState>(m, "SimState")
      .def(py::init<>())
      .def_readwrite("t", &SimState::t)
      .def_readwrite("q", &SimState::q)
      .def_readwrite("qdot", &SimState::qdot)
      .def("joints", &SimState::joints);

  m.def("arc_params", &arc_params, py::arg("lengths"), py::arg("params"));
  m.def("section_htm",
        py::overload_cast<const Vec3&, double, const RobotParams&>(
            &section_htm),
        py::arg("lengths"), py::arg("xi"), py::arg("params"));
  m.def("skin_htm",
        py::overload_cast<const Vec3&, double, double, double,
                          const RobotParams&>(&skin_htm),
        py::arg("lengths"), py::arg("xi"), py::arg("sigma"), py::arg("r"),
        py::arg("params"));
  m.def("full_htm", &full_htm, py::arg("state"), py::arg("xi"),
        py::arg("sigma"), py::arg("r"), py::arg("params"));
  m.def("position_jacobian", &position_jacobian, py::arg("state"),
        py::arg("xi"), py::arg("sigma"), py::arg("r"), py::arg("params"));
  m.def("skin_grid", &skin_grid, py::arg("params"), py::arg("n_axial") = 31,
        py::arg("n_radial") = 10);

  py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
      .def_readonly("kinetic", &EnergyBreakdown::kinetic)
      .def_readonly("gravitational", &EnergyBreakdown::gravitational)
      .def_readonly("elastic", &EnergyBreakdown::elastic)
      .def("total", &EnergyBreakdown::total);

  m.def("inertia_matrix", &inertia_matrix, py::arg("state"),
        py::arg("params"));
  m.def("coriolis_matrix", &coriolis_matrix, py::arg("state"),
        py::arg("qdot"), py::arg("params"));
  m.def("coriolis_times_qdot", &coriolis_times_qdot, py::arg("state"),
        py::arg("qdot"), py::arg("params"));
  m.def("damping_matrix", &damping_matrix, py::arg("params"));
  m.def("conservative_forces", &conservative_forces, py::arg("state"),
        py::arg("params"));
  m.def("actuation_vector", &actuation_vector, py::arg("pressures_bar"),
        py::arg("params"));
  m.def("forward_dynamics", &forward_dynamics, py::arg("state"),
        py::arg("qdot"), py::arg("tau"), py::arg("contact_generalized"),
        py::arg("params"));
  m.def("energies", &energies, py::arg("state"), py::arg("qdot"),
        py::arg("params"));

  py::class_<ContactPoint>(m, "ContactPoint")
      .def_readonly("xi", &ContactPoint::xi)
      .def_readonly("sigma", &ContactPoint::sigma)
      .def_readonly("p", &ContactPoint::p)
      .def_readonly("v", &ContactPoint::v)
      .def_readonly("F", &ContactPoint::F)
      .def_readonly("in_contact", &ContactPoint::in_contact);

  m.def("normal_force", &normal_force, py::arg("z"), py::arg("zdot"),
        py::arg("params"));
  m.def("reaction_force", &reaction_force, py::arg("f_z"), py::arg("vx"),
        py::arg("vy"), py::arg("params"));
  m.def("contact_wrench", &contact_wrench, py::arg("state"), py::arg("qdot"),
        py::arg("grid"), py::arg("params"));

  py::enum_<Method>(m, "Method")
      .value("IMPLICIT_ADAPTIVE", Method::kImplicitAdaptive)
      .value("SEMI_IMPLICIT_FIXED", Method::kSemiImplicitFixed)
      .value("EXPLICIT_ADAPTIVE", Method::kExplicitAdaptive);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("rel_tol", &IntegratorConfig::rel_tol)
      .def_readwrite("abs_tol", &IntegratorConfig::abs_tol)
      .def_readwrite("max_step", &IntegratorConfig::max_step)
      .def_readwrite("method", &IntegratorConfig::method)
      .def_readwrite("output_rate", &IntegratorConfig::output_rate)
      .def_readwrite("fixed_step", &IntegratorConfig::fixed_step)
      .def("validate", &IntegratorConfig::validate);

  py::class_<IntegrationStats>(m, "IntegrationStats")
      .def_readonly("steps_accepted", &IntegrationStats::steps_accepted)
      .def_readonly("steps_rejected", &IntegrationStats::steps_rejected)
      .def_readonly("rhs_evals", &IntegrationStats::rhs_evals)
      .def_readonly("jacobian_evals", &IntegrationStats::jacobian_evals)
      .def_readonly("chart_switches", &IntegrationStats::chart_switches)
      .def_readonly("min_step", &IntegrationStats::min_step)
      .def_readonly("max_step", &IntegrationStats::max_step);

  py::class_<IntegrateResult>(m, "IntegrateResult")
      .def_readonly("states", &IntegrateResult::states)
      .def_readonly("contacts", &IntegrateResult::contacts)
      .def_readonly("stats", &IntegrateResult::stats);

  m.def(
      "integrate",
      [](const SimState& initial, const ControlLaw& control, double duration,
         const IntegratorConfig& cfg, const RobotParams& params,
         const std::optional<SkinGrid>& grid) {
        return integrate(initial, control, duration, cfg, params,
                         grid ? &*grid : nullptr);
      },
      py::arg("initial"), py::arg("control"), py::arg("duration"),
      py::arg("config"), py::arg("params"), py::arg("grid") = py::none(),
      "Integrate the equations of motion; grid=None runs without ground "
      "contact, pass skin_grid(params) to enable it");

  py::enum_<GaitKind>(m, "GaitKind")
      .value("PLANAR_ROLLING", GaitKind::kPlanarRolling)
      .value("SPATIAL_ROLLING", GaitKind::kSpatialRolling);

  py::class_<GaitSpec>(m, "GaitSpec")
      .def(py::init<>())
      .def_readwrite("kind", &GaitSpec::kind)
      .def_readwrite("amplitude", &GaitSpec::amplitude)
      .def_readwrite("frequency", &GaitSpec::frequency)
      .def_readwrite("phase_shift", &GaitSpec::phase_shift)
      .def_readwrite("duration", &GaitSpec::duration)
      .def_readwrite("max_pressure", &GaitSpec::max_pressure)
      .def("validate", &GaitSpec::validate, py::arg("params"));

  m.def("planar_gait", &planar_gait, py::arg("params"));
  m.def("spatial_gait", &spatial_gait, py::arg("params"));
  m.def("rolling_lengths", &rolling_lengths, py::arg("spec"), py::arg("t"),
        py::arg("params"));
  m.def("length_to_pressure", &length_to_pressure, py::arg("lengths"),
        py::arg("params"));
  m.def("gait_control", &gait_control, py::arg("spec"), py::arg("params"));

  py::class_<JointTrajectory::Sample>(m, "TrajectorySample")
      .def_readonly("t", &JointTrajectory::Sample::t)
      .def_readonly("lengths", &JointTrajectory::Sample::lengths)
      .def_readonly("pressures", &JointTrajectory::Sample::pressures);

  py::class_<JointTrajectory>(m, "JointTrajectory")
      .def(py::init<>())
      .def_readwrite("samples", &JointTrajectory::samples);

  m.def("sample_trajectory", &sample_trajectory, py::arg("spec"),
        py::arg("params"), py::arg("rate") = 30.0);
  m.def("save_trajectory", &save_trajectory, py::arg("path"),
        py::arg("trajectory"));
  m.def("load_trajectory", &load_trajectory, py::arg("path"));

  py::class_<IkReport>(m, "IkReport")
      .def_readonly("iterations", &IkReport::iterations)
      .def_readonly("residual", &IkReport::residual)
      .def_readonly("residual_history", &IkReport::residual_history);

  m.def(
      "ik_fit",
      [](const std::vector<Vec3>& targets, const Vec9& guess,
         const RobotParams& params) {
        IkReport report;
        Vec9 fit = ik_fit(targets, guess, params, &report);
        return std::make_pair(fit, report);
      },
      py::arg("targets"), py::arg("initial_guess"), py::arg("params"),
      "Returns (lengths, report)");

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("robot", &ExperimentConfig::robot)
      .def_readwrite("integrator", &ExperimentConfig::integrator)
      .def_readwrite("gait", &ExperimentConfig::gait)
      .def_readwrite("drop_height", &ExperimentConfig::drop_height)
      .def_readwrite("contact_enabled", &ExperimentConfig::contact_enabled)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def("validate", &ExperimentConfig::validate);

  m.def("config_from_json", &config_from_json, py::arg("text"));
  m.def("config_to_json", &config_to_json, py::arg("config"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("save_config", &save_config, py::arg("path"), py::arg("config"));

  py::class_<DropReport>(m, "DropReport")
      .def_readonly("settled", &DropReport::settled)
      .def_readonly("free_fall", &DropReport::free_fall)
      .def_readonly("settle_time", &DropReport::settle_time)
      .def_readonly("final_min_z", &DropReport::final_min_z)
      .def_readonly("final_base_z", &DropReport::final_base_z)
      .def_readonly("states", &DropReport::states)
      .def_readonly("skin_records", &DropReport::skin_records)
      .def_readonly("stats", &DropReport::stats);

  py::class_<GaitMetrics>(m, "GaitMetrics")
      .def_readonly("vx_cm_s", &GaitMetrics::vx_cm_s)
      .def_readonly("vy_cm_s", &GaitMetrics::vy_cm_s)
      .def_readonly("net_displacement_m", &GaitMetrics::net_displacement_m)
      .def_readonly("cycles_used", &GaitMetrics::cycles_used);

  py::class_<GaitRunResult>(m, "GaitRunResult")
      .def_readonly("settled_state", &GaitRunResult::settled_state)
      .def_readonly("states", &GaitRunResult::states)
      .def_readonly("skin_records", &GaitRunResult::skin_records)
      .def_readonly("metrics", &GaitRunResult::metrics)
      .def_readonly("stats", &GaitRunResult::stats);

  m.def("run_drop_test", &run_drop_test, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_gait",
      [](const ExperimentConfig& cfg,
         const std::optional<SimState>& presettled) {
        py::gil_scoped_release release;
        return run_gait(cfg, presettled ? &*presettled : nullptr);
      },
      py::arg("config"), py::arg("presettled") = py::none());
  m.def("compute_metrics", &compute_metrics, py::arg("trajectory"),
        py::arg("gait"));
  m.def("export_plots", &export_plots, py::arg("result"), py::arg("robot"),
        py::arg("output_dir"));
}
