#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "snakesim/harness.hpp"

namespace {

using json = nlohmann::ordered_json;
using snakesim::ExperimentConfig;
using snakesim::GaitSpec;

std::string error_json(const std::string& kind, const std::string& message) {
  json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  return j.dump(2) + "\n";
}

// Optional command-line values layered over the loaded config.
struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<double> drop_height;
  bool contact_on = false, contact_off = false;
  std::optional<double> rel_tol, abs_tol, max_step, output_rate, fixed_step;
  std::optional<std::string> method;
  std::optional<double> k_g, b_g, k_elastic, d_damp, mu_x, mu_y, m_total;
  std::optional<std::string> kind;
  std::optional<double> amplitude, frequency, phase_shift, duration,
      max_pressure;
  std::optional<unsigned long> seed;

  void apply(ExperimentConfig& cfg) const {
    if (output_dir) cfg.output_dir = *output_dir;
    if (drop_height) cfg.drop_height = *drop_height;
    if (contact_on) cfg.contact_enabled = true;
    if (contact_off) cfg.contact_enabled = false;
    if (rel_tol) cfg.integrator.rel_tol = *rel_tol;
    if (abs_tol) cfg.integrator.abs_tol = *abs_tol;
    if (max_step) cfg.integrator.max_step = *max_step;
    if (output_rate) cfg.integrator.output_rate = *output_rate;
    if (fixed_step) cfg.integrator.fixed_step = *fixed_step;
    if (method) {
      if (*method == "implicit_adaptive")
        cfg.integrator.method = snakesim::Method::kImplicitAdaptive;
      else if (*method == "semi_implicit_fixed")
        cfg.integrator.method = snakesim::Method::kSemiImplicitFixed;
      else if (*method == "explicit_adaptive")
        cfg.integrator.method = snakesim::Method::kExplicitAdaptive;
      else
        throw snakesim::InputDomainError("unknown method '" + *method + "'");
    }
    if (k_g) cfg.robot.K_g = *k_g;
    if (b_g) cfg.robot.B_g = *b_g;
    if (k_elastic) cfg.robot.K_elastic = *k_elastic;
    if (d_damp) cfg.robot.D_damp = *d_damp;
    if (mu_x) cfg.robot.mu_x = *mu_x;
    if (mu_y) cfg.robot.mu_y = *mu_y;
    if (m_total) cfg.robot.m_total = *m_total;
    if (seed) cfg.seed = *seed;

    if (kind || amplitude || frequency || phase_shift || duration ||
        max_pressure) {
      if (!cfg.gait)
        cfg.gait = (kind && *kind == "spatial_rolling")
                       ? snakesim::spatial_gait(cfg.robot)
                       : snakesim::planar_gait(cfg.robot);
      else if (kind)
        cfg.gait->kind = *kind == "spatial_rolling"
                             ? snakesim::GaitKind::kSpatialRolling
                             : snakesim::GaitKind::kPlanarRolling;
      if (kind) {
        // re-apply the per-kind phase default unless overridden below
        cfg.gait->phase_shift =
            cfg.gait->kind == snakesim::GaitKind::kSpatialRolling
                ? M_PI / 3.0
                : 0.0;
      }
      if (amplitude) cfg.gait->amplitude = *amplitude;
      if (frequency) cfg.gait->frequency = *frequency;
      if (phase_shift) cfg.gait->phase_shift = *phase_shift;
      if (duration) cfg.gait->duration = *duration;
      if (max_pressure) cfg.gait->max_pressure = *max_pressure;
    }
  }
};

void add_common_options(CLI::App* cmd, std::string& config_path,
                        Overrides& ov) {
  cmd->add_option("--config", config_path, "Experiment config JSON file");
  cmd->add_option("-o,--out", ov.output_dir, "Output directory");
  cmd->add_option("--drop-height", ov.drop_height, "Release height [m]");
  cmd->add_flag("--contact", ov.contact_on, "Enable ground contact");
  cmd->add_flag("--no-contact", ov.contact_off, "Disable ground contact");
  cmd->add_option("--rel-tol", ov.rel_tol, "Integrator relative tolerance");
  cmd->add_option("--abs-tol", ov.abs_tol, "Integrator absolute tolerance");
  cmd->add_option("--max-step", ov.max_step, "Integrator max step [s]");
  cmd->add_option("--output-rate", ov.output_rate, "Sample rate [Hz]");
  cmd->add_option("--fixed-step", ov.fixed_step, "Fixed-method step [s]");
  cmd->add_option("--method", ov.method, "Integration method")
      ->check(CLI::IsMember({"implicit_adaptive", "semi_implicit_fixed",
                             "explicit_adaptive"}));
  cmd->add_option("--K-g", ov.k_g, "Ground normal stiffness [N/m]");
  cmd->add_option("--B-g", ov.b_g, "Ground normal damping [N*s/m]");
  cmd->add_option("--K-elastic", ov.k_elastic, "PMA stiffness [N/m]");
  cmd->add_option("--D-damp", ov.d_damp, "Joint damping [N*s/m]");
  cmd->add_option("--mu-x", ov.mu_x, "Friction coefficient, world X");
  cmd->add_option("--mu-y", ov.mu_y, "Friction coefficient, world Y");
  cmd->add_option("--m-total", ov.m_total, "Robot mass [kg]");
  cmd->add_option("--seed", ov.seed,
                  "Seed for randomized test utilities (the dynamics are "
                  "deterministic)");
}

void add_gait_options(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--kind", ov.kind, "Gait kind")
      ->check(CLI::IsMember({"planar_rolling", "spatial_rolling"}));
  cmd->add_option("--amplitude", ov.amplitude, "Peak PMA length change [m]");
  cmd->add_option("--frequency", ov.frequency, "Gait frequency [Hz]");
  cmd->add_option("--phase-shift", ov.phase_shift,
                  "Phase between sections [rad]");
  cmd->add_option("--duration", ov.duration, "Gait duration [s]");
  cmd->add_option("--max-pressure", ov.max_pressure,
                  "Command ceiling [bar]");
}

ExperimentConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return ExperimentConfig{};
  return snakesim::load_config(config_path);
}

json drop_summary(const snakesim::DropReport& rep,
                  const ExperimentConfig& cfg) {
  json j;
  j["settled"] = rep.settled;
  j["free_fall"] = rep.free_fall;
  j["settle_time_s"] = rep.settle_time;
  j["final_min_z_m"] = rep.final_min_z;
  j["final_base_z_m"] = rep.final_base_z;
  j["steps_accepted"] = rep.stats.steps_accepted;
  j["output_dir"] = cfg.output_dir;
  return j;
}

json gait_summary(const snakesim::GaitRunResult& res,
                  const ExperimentConfig& cfg) {
  json j;
  j["vx_cm_s"] = res.metrics.vx_cm_s;
  j["vy_cm_s"] = res.metrics.vy_cm_s;
  j["net_displacement_m"] = res.metrics.net_displacement_m;
  j["cycles_used"] = res.metrics.cycles_used;
  j["steps_accepted"] = res.stats.steps_accepted;
  j["output_dir"] = cfg.output_dir;
  return j;
}

// Runs each sweep config on a worker pool, each into its own subdirectory.
json run_sweep(const std::vector<std::string>& paths, const Overrides& ov,
               bool gait_mode) {
  std::vector<json> results(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= paths.size()) return;
      json& out = results[k];
      out["config"] = paths[k];
      try {
        ExperimentConfig cfg = snakesim::load_config(paths[k]);
        ov.apply(cfg);
        cfg.output_dir =
            (std::filesystem::path(cfg.output_dir) /
             ("sweep_" + std::to_string(k)))
                .string();
        if (gait_mode) {
          snakesim::GaitRunResult res = snakesim::run_gait(cfg);
          out["ok"] = true;
          out["result"] = gait_summary(res, cfg);
        } else {
          snakesim::DropReport rep = snakesim::run_drop_test(cfg);
          out["ok"] = true;
          out["result"] = drop_summary(rep, cfg);
        }
      } catch (const snakesim::Error& e) {
        out["ok"] = false;
        out["error"]["kind"] = e.kind();
        out["error"]["message"] = e.what();
      } catch (const std::exception& e) {
        out["ok"] = false;
        out["error"]["kind"] = "internal";
        out["error"]["message"] = e.what();
      }
    }
  };
  unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, paths.size());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return json(results);
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          const std::string& header,
                                          std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw snakesim::IoError("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw snakesim::IoError("empty csv file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw snakesim::IoError("unexpected header in " + path + " (want '" +
                            header + "')");
  std::vector<std::vector<double>> rows;
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
        throw snakesim::IoError("bad number '" + field + "' at " + path +
                                ":" + std::to_string(line_no));
      }
    }
    if (values.size() != columns)
      throw snakesim::IoError("wrong column count at " + path + ":" +
                              std::to_string(line_no));
    rows.push_back(std::move(values));
  }
  return rows;
}

constexpr const char* kBaseHeader = "t_s,x_m,y_m,z_m";
constexpr const char* kOrientationHeader = "t_s,alpha_rad,beta_rad,gamma_rad";
constexpr const char* kJointHeader =
    "t_s,l_11_m,l_12_m,l_13_m,l_21_m,l_22_m,l_23_m,l_31_m,l_32_m,l_33_m";
constexpr const char* kContactHeader = "t_s,xi,sigma_rad,F_z_N";

std::vector<snakesim::SimState> states_from_series(const std::string& dir) {
  namespace fs = std::filesystem;
  auto base = read_csv((fs::path(dir) / "gait_base_position.csv").string(),
                       kBaseHeader, 4);
  auto orient =
      read_csv((fs::path(dir) / "gait_base_orientation.csv").string(),
               kOrientationHeader, 4);
  auto joints = read_csv((fs::path(dir) / "gait_joint_lengths.csv").string(),
                         kJointHeader, 10);
  if (orient.size() != base.size() || joints.size() != base.size())
    throw snakesim::IoError("series files in " + dir +
                            " have mismatched row counts");
  std::vector<snakesim::SimState> states(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    states[k].t = base[k][0];
    for (int c = 0; c < 3; ++c) states[k].q[c] = base[k][1 + c];
    for (int c = 0; c < 3; ++c) states[k].q[3 + c] = orient[k][1 + c];
    for (int c = 0; c < snakesim::kActDof; ++c)
      states[k].q[snakesim::kBaseDof + c] = joints[k][1 + c];
  }
  return states;
}

int cmd_drop(const std::string& config_path, const Overrides& ov,
             const std::vector<std::string>& sweep) {
  if (!sweep.empty()) {
    json all = run_sweep(sweep, ov, false);
    std::cout << all.dump(2) << "\n";
    for (const auto& item : all)
      if (!item["ok"].get<bool>()) return 1;
    return 0;
  }
  ExperimentConfig cfg = load_or_default(config_path);
  ov.apply(cfg);
  snakesim::DropReport rep = snakesim::run_drop_test(cfg);
  std::cout << drop_summary(rep, cfg).dump(2) << "\n";
  return 0;
}

int cmd_gait(const std::string& config_path, const Overrides& ov,
             const std::vector<std::string>& sweep) {
  if (!sweep.empty()) {
    json all = run_sweep(sweep, ov, true);
    std::cout << all.dump(2) << "\n";
    for (const auto& item : all)
      if (!item["ok"].get<bool>()) return 1;
    return 0;
  }
  ExperimentConfig cfg = load_or_default(config_path);
  ov.apply(cfg);
  if (!cfg.gait) cfg.gait = snakesim::planar_gait(cfg.robot);
  snakesim::GaitRunResult res = snakesim::run_gait(cfg);
  std::cout << gait_summary(res, cfg).dump(2) << "\n";
  return 0;
}

int cmd_metrics(const std::string& input, double frequency) {
  namespace fs = std::filesystem;
  std::string path = input;
  if (fs::is_directory(path))
    path = (fs::path(path) / "gait_base_position.csv").string();
  auto rows = read_csv(path, kBaseHeader, 4);
  std::vector<snakesim::SimState> states(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    states[k].t = rows[k][0];
    states[k].q[0] = rows[k][1];
    states[k].q[1] = rows[k][2];
    states[k].q[2] = rows[k][3];
  }
  GaitSpec gait;
  gait.frequency = frequency;
  snakesim::GaitMetrics m = snakesim::compute_metrics(states, gait);
  json j;
  j["vx_cm_s"] = m.vx_cm_s;
  j["vy_cm_s"] = m.vy_cm_s;
  j["net_displacement_m"] = m.net_displacement_m;
  j["cycles_used"] = m.cycles_used;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_plot(const std::string& input, const std::string& out,
             const std::string& config_path) {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = load_or_default(config_path);
  snakesim::GaitRunResult res;
  res.states = states_from_series(input);

  auto contact = read_csv((fs::path(input) / "gait_contact_map.csv").string(),
                          kContactHeader, 4);
  res.skin_records.resize(res.states.size());
  std::size_t cursor = 0;
  for (const auto& row : contact) {
    while (cursor + 1 < res.states.size() &&
           res.states[cursor].t < row[0] - 1e-9)
      ++cursor;
    snakesim::ContactPoint cp;
    cp.xi = row[1];
    cp.sigma = row[2];
    cp.F = snakesim::Vec3(0.0, 0.0, row[3]);
    cp.in_contact = true;
    res.skin_records[cursor].push_back(cp);
  }

  snakesim::export_plots(res, cfg.robot, out.empty() ? input : out);
  std::cout << "{\n  \"plotted\": " << res.states.size()
            << ",\n  \"output_dir\": \""
            << (out.empty() ? input : out) << "\"\n}\n";
  return 0;
}

int cmd_validate(const std::string& config_path) {
  ExperimentConfig cfg = snakesim::load_config(config_path);
  cfg.validate();
  json j;
  j["ok"] = true;
  j["normalized"] = json::parse(snakesim::config_to_json(cfg));
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Spatial-dynamics simulator for a three-section pneumatic soft "
      "robotic snake"};
  app.require_subcommand(1);

  std::string drop_config, gait_config, metrics_input, plot_input, plot_out,
      plot_config, validate_path;
  double metrics_frequency = 0.5;
  std::vector<std::string> drop_sweep, gait_sweep;
  Overrides drop_ov, gait_ov;

  CLI::App* drop =
      app.add_subcommand("drop", "Release from a height and report settling");
  add_common_options(drop, drop_config, drop_ov);
  drop->add_option("--sweep", drop_sweep,
                   "Run these config files on a worker pool, each into its "
                   "own sweep_<k> subdirectory");

  CLI::App* gait = app.add_subcommand(
      "gait", "Settle, roll, and write series, plots, and metrics");
  add_common_options(gait, gait_config, gait_ov);
  add_gait_options(gait, gait_ov);
  gait->add_option("--sweep", gait_sweep,
                   "Run these config files on a worker pool, each into its "
                   "own sweep_<k> subdirectory");

  CLI::App* metrics = app.add_subcommand(
      "metrics", "Recompute velocity metrics from a saved base series");
  metrics
      ->add_option("-i,--input", metrics_input,
                   "Output directory or base-series CSV file")
      ->required();
  metrics->add_option("--frequency", metrics_frequency,
                      "Gait frequency used for the cycle window [Hz]");

  CLI::App* plot = app.add_subcommand(
      "plot", "Re-render SVG plots from saved series CSVs");
  plot->add_option("-i,--input", plot_input,
                   "Directory holding the series CSVs")
      ->required();
  plot->add_option("-o,--out", plot_out,
                   "Output directory (default: the input directory)");
  plot->add_option("--config", plot_config,
                   "Config JSON for the robot geometry");

  CLI::App* validate =
      app.add_subcommand("validate-config", "Parse and validate a config");
  validate->add_option("--config", validate_path, "Config JSON file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << error_json("cli", e.what());
    return e.get_exit_code();
  }

  try {
    if (drop->parsed()) return cmd_drop(drop_config, drop_ov, drop_sweep);
    if (gait->parsed()) return cmd_gait(gait_config, gait_ov, gait_sweep);
    if (metrics->parsed())
      return cmd_metrics(metrics_input, metrics_frequency);
    if (plot->parsed()) return cmd_plot(plot_input, plot_out, plot_config);
    if (validate->parsed()) return cmd_validate(validate_path);
  } catch (const snakesim::Error& e) {
    std::cerr << error_json(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what());
    return 1;
  }
  return 0;
}
