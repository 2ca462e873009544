#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snakesim/contact.hpp"
#include "snakesim/gaits.hpp"
#include "snakesim/integrator.hpp"
#include "snakesim/params.hpp"
#include "snakesim/state.hpp"

namespace snakesim {

// One experiment: a drop test (no gait) or a settle-then-roll gait run.
struct ExperimentConfig {
  RobotParams robot;
  IntegratorConfig integrator;
  std::optional<GaitSpec> gait;  // empty = drop test only
  double drop_height = 0.6;      // m, release height of the backbone
  bool contact_enabled = true;
  std::string output_dir = "out";
  unsigned long seed = 0;  // consumed only by randomized test utilities

  void validate() const;
};

// JSON round trip; unknown keys are rejected, missing keys take defaults.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& cfg);

// Duration of the release-and-settle phase preceding every gait run.
inline constexpr double kSettleDuration = 2.0;  // s
// A sample is quiet when every skin point moves vertically slower than this.
inline constexpr double kSettleZdotTol = 1e-3;  // m/s

struct DropReport {
  bool settled = false;
  // still gaining downward speed at the end of the window
  bool free_fall = false;
  double settle_time = 0.0;   // s, first sample after which all stay quiet
  double final_min_z = 0.0;   // m, lowest skin point at the last sample
  double final_base_z = 0.0;  // m
  std::vector<SimState> states;
  std::vector<std::vector<ContactPoint>> skin_records;  // all grid points
  IntegrationStats stats;
};

// Releases the robot from drop_height with zero pressure commands and tracks
// the settling; writes drop_z.csv and drop_z.svg into output_dir.
DropReport run_drop_test(const ExperimentConfig& cfg);

struct GaitMetrics {
  double vx_cm_s = 0.0;
  double vy_cm_s = 0.0;
  double net_displacement_m = 0.0;  // base XY travel over the fitted window
  int cycles_used = 0;              // complete cycles in the fitted window
};

struct GaitRunResult {
  SimState settled_state;  // state handed to the gait phase, t = 0
  std::vector<SimState> states;
  std::vector<std::vector<ContactPoint>> skin_records;
  GaitMetrics metrics;
  IntegrationStats stats;
};

// Settles the robot (drop + 2 s, skipped when presettled is given), runs the
// gait, computes metrics, and writes all series/plot files plus
// gait_metrics.json into output_dir.
GaitRunResult run_gait(const ExperimentConfig& cfg,
                       const SimState* presettled = nullptr);

// Least-squares base velocity over an integer number of gait cycles, first
// cycle discarded; needs at least 3 complete cycles of trajectory.
GaitMetrics compute_metrics(const std::vector<SimState>& trajectory,
                            const GaitSpec& gait);

// Deterministic SVG plots with CSV twins: base position/orientation series,
// joint lengths, contact map, and the backbone X-Y projection.
void export_plots(const GaitRunResult& result, const RobotParams& robot,
                  const std::string& output_dir);

}  // namespace snakesim
