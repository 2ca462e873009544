#include "snakesim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "snakesim/kinematics.hpp"

namespace snakesim {
namespace {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " +
                        ec.message());
}

std::string join_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

// --- config serialization ---------------------------------------------

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &it.value();
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const char* context) {
  if (!j.is_object())
    throw IoError(std::string("config section '") + context +
                  "' must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw IoError(std::string("unknown config key '") + item.key() +
                    "' in " + context);
}

double num_field(const json& j, const char* key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number())
    throw IoError(std::string("config field '") + key + "' must be a number");
  return v->get<double>();
}

int int_field(const json& j, const char* key, int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw IoError(std::string("config field '") + key +
                  "' must be an integer");
  return v->get<int>();
}

bool bool_field(const json& j, const char* key, bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean())
    throw IoError(std::string("config field '") + key + "' must be a bool");
  return v->get<bool>();
}

std::string str_field(const json& j, const char* key,
                      const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string())
    throw IoError(std::string("config field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kImplicitAdaptive: return "implicit_adaptive";
    case Method::kSemiImplicitFixed: return "semi_implicit_fixed";
    case Method::kExplicitAdaptive: return "explicit_adaptive";
  }
  throw IoError("unknown integrator method enum value");
}

Method method_from_name(const std::string& name) {
  if (name == "implicit_adaptive") return Method::kImplicitAdaptive;
  if (name == "semi_implicit_fixed") return Method::kSemiImplicitFixed;
  if (name == "explicit_adaptive") return Method::kExplicitAdaptive;
  throw IoError("unknown integrator method '" + name + "'");
}

std::string kind_name(GaitKind k) {
  return k == GaitKind::kPlanarRolling ? "planar_rolling" : "spatial_rolling";
}

GaitKind kind_from_name(const std::string& name) {
  if (name == "planar_rolling") return GaitKind::kPlanarRolling;
  if (name == "spatial_rolling") return GaitKind::kSpatialRolling;
  throw IoError("unknown gait kind '" + name + "'");
}

RobotParams robot_from_json(const json& j) {
  check_keys(j, {"n_sections", "L0", "r_p", "r_s", "d_rigid", "m_total",
                 "mount_offset", "dl_max", "K_elastic", "D_damp", "K_g",
                 "B_g", "mu_x", "mu_y", "g", "P_max", "A_pma", "v_eps",
                 "eps_straight", "quadrature_nodes"},
             "robot");
  RobotParams p;
  p.n_sections = int_field(j, "n_sections", p.n_sections);
  p.L0 = num_field(j, "L0", p.L0);
  p.r_p = num_field(j, "r_p", p.r_p);
  p.r_s = num_field(j, "r_s", p.r_s);
  p.d_rigid = num_field(j, "d_rigid", p.d_rigid);
  p.m_total = num_field(j, "m_total", p.m_total);
  p.mount_offset = num_field(j, "mount_offset", p.mount_offset);
  p.dl_max = num_field(j, "dl_max", p.dl_max);
  p.K_elastic = num_field(j, "K_elastic", p.K_elastic);
  p.D_damp = num_field(j, "D_damp", p.D_damp);
  p.K_g = num_field(j, "K_g", p.K_g);
  p.B_g = num_field(j, "B_g", p.B_g);
  p.mu_x = num_field(j, "mu_x", p.mu_x);
  p.mu_y = num_field(j, "mu_y", p.mu_y);
  p.g = num_field(j, "g", p.g);
  p.P_max = num_field(j, "P_max", p.P_max);
  p.A_pma = num_field(j, "A_pma", p.A_pma);
  p.v_eps = num_field(j, "v_eps", p.v_eps);
  p.eps_straight = num_field(j, "eps_straight", p.eps_straight);
  p.quadrature_nodes = int_field(j, "quadrature_nodes", p.quadrature_nodes);
  return p;
}

json robot_to_json(const RobotParams& p) {
  json j;
  j["n_sections"] = p.n_sections;
  j["L0"] = p.L0;
  j["r_p"] = p.r_p;
  j["r_s"] = p.r_s;
  j["d_rigid"] = p.d_rigid;
  j["m_total"] = p.m_total;
  j["mount_offset"] = p.mount_offset;
  j["dl_max"] = p.dl_max;
  j["K_elastic"] = p.K_elastic;
  j["D_damp"] = p.D_damp;
  j["K_g"] = p.K_g;
  j["B_g"] = p.B_g;
  j["mu_x"] = p.mu_x;
  j["mu_y"] = p.mu_y;
  j["g"] = p.g;
  j["P_max"] = p.P_max;
  j["A_pma"] = p.A_pma;
  j["v_eps"] = p.v_eps;
  j["eps_straight"] = p.eps_straight;
  j["quadrature_nodes"] = p.quadrature_nodes;
  return j;
}

IntegratorConfig integrator_from_json(const json& j) {
  check_keys(j, {"rel_tol", "abs_tol", "max_step", "method", "output_rate",
                 "fixed_step"},
             "integrator");
  IntegratorConfig c;
  c.rel_tol = num_field(j, "rel_tol", c.rel_tol);
  c.abs_tol = num_field(j, "abs_tol", c.abs_tol);
  c.max_step = num_field(j, "max_step", c.max_step);
  c.method = method_from_name(str_field(j, "method", method_name(c.method)));
  c.output_rate = num_field(j, "output_rate", c.output_rate);
  c.fixed_step = num_field(j, "fixed_step", c.fixed_step);
  return c;
}

json integrator_to_json(const IntegratorConfig& c) {
  json j;
  j["rel_tol"] = c.rel_tol;
  j["abs_tol"] = c.abs_tol;
  j["max_step"] = c.max_step;
  j["method"] = method_name(c.method);
  j["output_rate"] = c.output_rate;
  j["fixed_step"] = c.fixed_step;
  return j;
}

GaitSpec gait_from_json(const json& j, const RobotParams& robot) {
  check_keys(j, {"kind", "amplitude", "frequency", "phase_shift", "duration",
                 "max_pressure"},
             "gait");
  GaitSpec g;
  g.kind = kind_from_name(str_field(j, "kind", kind_name(g.kind)));
  // per-kind phase default, overridable below
  g.phase_shift = g.kind == GaitKind::kSpatialRolling ? M_PI / 3.0 : 0.0;
  g.amplitude = num_field(j, "amplitude", 0.75 * robot.dl_max);
  g.frequency = num_field(j, "frequency", g.frequency);
  g.phase_shift = num_field(j, "phase_shift", g.phase_shift);
  g.duration = num_field(j, "duration", g.duration);
  g.max_pressure = num_field(j, "max_pressure", g.max_pressure);
  return g;
}

json gait_to_json(const GaitSpec& g) {
  json j;
  j["kind"] = kind_name(g.kind);
  j["amplitude"] = g.amplitude;
  j["frequency"] = g.frequency;
  j["phase_shift"] = g.phase_shift;
  j["duration"] = g.duration;
  j["max_pressure"] = g.max_pressure;
  return j;
}

// --- skin sampling ----------------------------------------------------

std::vector<std::vector<ContactPoint>> recorded_skin(
    IntegrateResult& r, bool contact_enabled, const SkinGrid& grid,
    const RobotParams& params) {
  if (contact_enabled) return std::move(r.contacts);
  std::vector<std::vector<ContactPoint>> records;
  records.reserve(r.states.size());
  for (const SimState& s : r.states)
    records.push_back(contact_wrench(s.joints(), s.qdot, grid, params).second);
  return records;
}

double max_abs_zdot(const std::vector<ContactPoint>& points) {
  double m = 0.0;
  for (const ContactPoint& cp : points) m = std::max(m, std::abs(cp.v.z()));
  return m;
}

double min_z(const std::vector<ContactPoint>& points) {
  double m = std::numeric_limits<double>::infinity();
  for (const ContactPoint& cp : points) m = std::min(m, cp.p.z());
  return std::isfinite(m) ? m : 0.0;
}

SimState release_state(const ExperimentConfig& cfg) {
  SimState init;
  init.q[2] = cfg.drop_height;
  init.q[4] = M_PI / 2.0;  // straight robot lying along world +X
  return init;
}

Vec9 zero_pressures(double) { return Vec9::Zero(); }

// --- SVG plotting -----------------------------------------------------

constexpr double kSvgW = 840.0, kSvgH = 520.0;
constexpr double kPlotL = 70.0, kPlotR = 810.0, kPlotT = 42.0,
                 kPlotB = 478.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22"};
constexpr int kPaletteSize = 9;

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct Axes {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;

  void fit(const std::vector<const std::vector<double>*>& xs,
           const std::vector<const std::vector<double>*>& ys) {
    x_lo = y_lo = std::numeric_limits<double>::infinity();
    x_hi = y_hi = -std::numeric_limits<double>::infinity();
    for (const auto* v : xs)
      for (double d : *v) {
        x_lo = std::min(x_lo, d);
        x_hi = std::max(x_hi, d);
      }
    for (const auto* v : ys)
      for (double d : *v) {
        y_lo = std::min(y_lo, d);
        y_hi = std::max(y_hi, d);
      }
    pad(x_lo, x_hi);
    pad(y_lo, y_hi);
  }

  static void pad(double& lo, double& hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      double mid = std::isfinite(lo) ? lo : 0.0;
      lo = mid - 1.0;
      hi = mid + 1.0;
      return;
    }
    double p = 0.05 * (hi - lo);
    lo -= p;
    hi += p;
  }

  double px(double x) const {
    return kPlotL + (x - x_lo) / (x_hi - x_lo) * (kPlotR - kPlotL);
  }
  double py(double y) const {
    return kPlotB - (y - y_lo) / (y_hi - y_lo) * (kPlotB - kPlotT);
  }
};

std::string svg_open(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const Axes& ax) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"840\" "
       "height=\"520\" viewBox=\"0 0 840 520\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"840\" height=\"520\" fill=\"#ffffff\"/>"
       "\n";
  s += "<text x=\"420\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-"
       "serif\" font-size=\"16\">" + title + "</text>\n";
  s += "<rect x=\"" + fmt("%.1f", kPlotL) + "\" y=\"" + fmt("%.1f", kPlotT) +
       "\" width=\"" + fmt("%.1f", kPlotR - kPlotL) + "\" height=\"" +
       fmt("%.1f", kPlotB - kPlotT) +
       "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = ax.x_lo + i * (ax.x_hi - ax.x_lo) / 5.0;
    double yv = ax.y_lo + i * (ax.y_hi - ax.y_lo) / 5.0;
    double xp = ax.px(xv), yp = ax.py(yv);
    s += "<line x1=\"" + fmt("%.2f", xp) + "\" y1=\"" + fmt("%.1f", kPlotB) +
         "\" x2=\"" + fmt("%.2f", xp) + "\" y2=\"" +
         fmt("%.1f", kPlotB + 5.0) + "\" stroke=\"#444444\"/>\n";
    s += "<text x=\"" + fmt("%.2f", xp) + "\" y=\"" +
         fmt("%.1f", kPlotB + 20.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + fmt("%.4g", xv) + "</text>\n";
    s += "<line x1=\"" + fmt("%.1f", kPlotL - 5.0) + "\" y1=\"" +
         fmt("%.2f", yp) + "\" x2=\"" + fmt("%.1f", kPlotL) + "\" y2=\"" +
         fmt("%.2f", yp) + "\" stroke=\"#444444\"/>\n";
    s += "<text x=\"" + fmt("%.1f", kPlotL - 8.0) + "\" y=\"" +
         fmt("%.2f", yp + 4.0) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + fmt("%.4g", yv) + "</text>\n";
  }
  s += "<text x=\"440\" y=\"510\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"13\">" + xlabel + "</text>\n";
  s += "<text x=\"16\" y=\"260\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
       "16 260)\">" + ylabel + "</text>\n";
  return s;
}

std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel,
                      const std::vector<PlotSeries>& series) {
  Axes ax;
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  ax.fit(xs, ys);
  std::string svg = svg_open(title, xlabel, ylabel, ax);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % kPaletteSize];
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (i) svg += " ";
      svg += fmt("%.2f", ax.px(series[k].x[i])) + "," +
             fmt("%.2f", ax.py(series[k].y[i]));
    }
    svg += "\"/>\n";
    double ly = kPlotT + 16.0 + 16.0 * k;
    svg += "<rect x=\"" + fmt("%.1f", kPlotR - 130.0) + "\" y=\"" +
           fmt("%.1f", ly - 9.0) + "\" width=\"10\" height=\"10\" fill=\"";
    svg += color;
    svg += "\"/>\n<text x=\"" + fmt("%.1f", kPlotR - 115.0) + "\" y=\"" +
           fmt("%.1f", ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           series[k].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r = static_cast<int>(std::lround(255.0 + t * (240.0 - 255.0)));
  int g = static_cast<int>(std::lround(237.0 + t * (59.0 - 237.0)));
  int b = static_cast<int>(std::lround(160.0 + t * (32.0 - 160.0)));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", r, g, b);
  return buf;
}

std::string scatter_plot(const std::string& title, const std::string& xlabel,
                         const std::string& ylabel,
                         const std::vector<double>& x,
                         const std::vector<double>& y,
                         const std::vector<double>& weight) {
  Axes ax;
  ax.fit({&x}, {&y});
  double w_max = 0.0;
  for (double w : weight) w_max = std::max(w_max, w);
  std::string svg = svg_open(title, xlabel, ylabel, ax);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = w_max > 0.0 ? weight[i] / w_max : 0.0;
    svg += "<circle cx=\"" + fmt("%.2f", ax.px(x[i])) + "\" cy=\"" +
           fmt("%.2f", ax.py(y[i])) + "\" r=\"2\" fill=\"" + heat_color(t) +
           "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// --- CSV twins --------------------------------------------------------

std::string csv_of_series(const char* header,
                          const std::vector<std::vector<double>>& columns) {
  std::string out(header);
  out += "\n";
  if (columns.empty()) return out;
  std::size_t rows = columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ",";
      out += format_double(columns[c][r]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

// --- config -----------------------------------------------------------

void ExperimentConfig::validate() const {
  robot.validate();
  integrator.validate();
  if (gait) gait->validate(robot);
  if (!std::isfinite(drop_height) || drop_height <= 0.0)
    throw InputDomainError("ExperimentConfig.drop_height must be > 0");
  if (output_dir.empty())
    throw InputDomainError("ExperimentConfig.output_dir must be set");
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("config parse error: ") + e.what());
  }
  check_keys(j, {"robot", "integrator", "gait", "drop_height",
                 "contact_enabled", "output_dir", "seed"},
             "config");
  ExperimentConfig cfg;
  if (const json* r = find(j, "robot")) cfg.robot = robot_from_json(*r);
  if (const json* i = find(j, "integrator"))
    cfg.integrator = integrator_from_json(*i);
  if (const json* g = find(j, "gait"); g && !g->is_null())
    cfg.gait = gait_from_json(*g, cfg.robot);
  cfg.drop_height = num_field(j, "drop_height", cfg.drop_height);
  cfg.contact_enabled = bool_field(j, "contact_enabled", cfg.contact_enabled);
  cfg.output_dir = str_field(j, "output_dir", cfg.output_dir);
  const json* s = find(j, "seed");
  if (s) {
    if (!s->is_number_integer() || s->get<long long>() < 0)
      throw IoError("config field 'seed' must be a non-negative integer");
    cfg.seed = s->get<unsigned long>();
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["robot"] = robot_to_json(cfg.robot);
  j["integrator"] = integrator_to_json(cfg.integrator);
  j["gait"] = cfg.gait ? gait_to_json(*cfg.gait) : json(nullptr);
  j["drop_height"] = cfg.drop_height;
  j["contact_enabled"] = cfg.contact_enabled;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
  write_text_file(path, config_to_json(cfg));
}

// --- drop test --------------------------------------------------------

DropReport run_drop_test(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.output_dir);
  SkinGrid grid = skin_grid(cfg.robot);
  IntegrateResult r =
      integrate(release_state(cfg), zero_pressures, kSettleDuration,
                cfg.integrator, cfg.robot,
                cfg.contact_enabled ? &grid : nullptr);

  DropReport rep;
  rep.stats = r.stats;
  rep.skin_records = recorded_skin(r, cfg.contact_enabled, grid, cfg.robot);
  rep.states = std::move(r.states);

  std::size_t n = rep.states.size();
  std::vector<double> quiet(n), z_min(n), z_base(n), t(n);
  for (std::size_t k = 0; k < n; ++k) {
    quiet[k] = max_abs_zdot(rep.skin_records[k]);
    z_min[k] = min_z(rep.skin_records[k]);
    z_base[k] = rep.states[k].q[2];
    t[k] = rep.states[k].t;
  }

  std::size_t first_quiet = n;
  for (std::size_t k = n; k-- > 0;) {
    if (quiet[k] < kSettleZdotTol)
      first_quiet = k;
    else
      break;
  }
  rep.settled = first_quiet < n;
  rep.settle_time = rep.settled ? t[first_quiet] : kSettleDuration;
  rep.final_min_z = z_min.back();
  rep.final_base_z = z_base.back();
  rep.free_fall = !rep.settled && rep.states.back().qdot[2] < -1.0;

  write_text_file(
      join_path(cfg.output_dir, "drop_z.csv"),
      csv_of_series("t_s,base_z_m,min_skin_z_m,max_abs_skin_zdot_m_s",
                    {t, z_base, z_min, quiet}));
  write_text_file(
      join_path(cfg.output_dir, "drop_z.svg"),
      line_plot("Drop test height", "t [s]", "z [m]",
                {{"base z", t, z_base}, {"lowest skin point", t, z_min}}));
  return rep;
}

// --- metrics ----------------------------------------------------------

GaitMetrics compute_metrics(const std::vector<SimState>& trajectory,
                            const GaitSpec& gait) {
  if (trajectory.size() < 2)
    throw InputDomainError("metrics need a trajectory with >= 2 samples");
  if (!std::isfinite(gait.frequency) || gait.frequency <= 0.0)
    throw InputDomainError("metrics need a gait frequency > 0");

  double period = 1.0 / gait.frequency;
  double t0 = trajectory.front().t;
  double span = trajectory.back().t - t0;
  long cycles = static_cast<long>(std::floor(span / period + 1e-9));
  if (cycles < 3)
    throw InputDomainError(
        "metrics need at least 3 complete gait cycles of trajectory");

  // keep an integer number of cycles, first cycle dropped as transient
  double lo = t0 + period, hi = t0 + cycles * period;
  std::vector<double> t, x, y;
  for (const SimState& s : trajectory) {
    if (s.t < lo - 1e-9 || s.t > hi + 1e-9) continue;
    t.push_back(s.t);
    x.push_back(s.q[0]);
    y.push_back(s.q[1]);
  }
  if (t.size() < 2)
    throw InputDomainError("metrics window contains fewer than 2 samples");

  double t_mean = 0.0, x_mean = 0.0, y_mean = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t_mean += t[k];
    x_mean += x[k];
    y_mean += y[k];
  }
  t_mean /= t.size();
  x_mean /= t.size();
  y_mean /= t.size();
  double stt = 0.0, stx = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    double dt = t[k] - t_mean;
    stt += dt * dt;
    stx += dt * (x[k] - x_mean);
    sty += dt * (y[k] - y_mean);
  }
  if (!(stt > 0.0))
    throw InputDomainError("metrics window has no time spread");

  GaitMetrics m;
  m.vx_cm_s = 100.0 * stx / stt;
  m.vy_cm_s = 100.0 * sty / stt;
  m.net_displacement_m = std::hypot(x.back() - x.front(), y.back() - y.front());
  m.cycles_used = static_cast<int>(cycles - 1);
  return m;
}

// --- plots ------------------------------------------------------------

void export_plots(const GaitRunResult& result, const RobotParams& robot,
                  const std::string& output_dir) {
  ensure_dir(output_dir);
  const auto& states = result.states;
  std::size_t n = states.size();

  std::vector<double> t(n);
  std::vector<std::vector<double>> base(6, std::vector<double>(n));
  std::vector<std::vector<double>> joints(kActDof, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = states[k].t;
    for (int c = 0; c < 6; ++c) base[c][k] = states[k].q[c];
    for (int c = 0; c < kActDof; ++c)
      joints[c][k] = states[k].q[kBaseDof + c];
  }

  write_text_file(join_path(output_dir, "gait_base_position.csv"),
                  csv_of_series("t_s,x_m,y_m,z_m",
                                {t, base[0], base[1], base[2]}));
  write_text_file(join_path(output_dir, "gait_base_position.svg"),
                  line_plot("Base position", "t [s]", "position [m]",
                            {{"x", t, base[0]},
                             {"y", t, base[1]},
                             {"z", t, base[2]}}));

  write_text_file(join_path(output_dir, "gait_base_orientation.csv"),
                  csv_of_series("t_s,alpha_rad,beta_rad,gamma_rad",
                                {t, base[3], base[4], base[5]}));
  write_text_file(join_path(output_dir, "gait_base_orientation.svg"),
                  line_plot("Base orientation (ZYX Euler)", "t [s]",
                            "angle [rad]",
                            {{"alpha", t, base[3]},
                             {"beta", t, base[4]},
                             {"gamma", t, base[5]}}));

  {
    std::vector<std::vector<double>> cols;
    cols.push_back(t);
    for (int c = 0; c < kActDof; ++c) cols.push_back(joints[c]);
    write_text_file(
        join_path(output_dir, "gait_joint_lengths.csv"),
        csv_of_series("t_s,l_11_m,l_12_m,l_13_m,l_21_m,l_22_m,l_23_m,"
                      "l_31_m,l_32_m,l_33_m",
                      cols));
    std::vector<PlotSeries> series;
    const char* names[] = {"l_11", "l_12", "l_13", "l_21", "l_22",
                           "l_23", "l_31", "l_32", "l_33"};
    for (int c = 0; c < kActDof; ++c)
      series.push_back({names[c], t, joints[c]});
    write_text_file(join_path(output_dir, "gait_joint_lengths.svg"),
                    line_plot("PMA length changes", "t [s]", "length [m]",
                              series));
  }

  {
    std::vector<double> ct, cxi, csigma, cfz;
    for (std::size_t k = 0; k < result.skin_records.size(); ++k)
      for (const ContactPoint& cp : result.skin_records[k])
        if (cp.in_contact) {
          ct.push_back(k < n ? states[k].t : 0.0);
          cxi.push_back(cp.xi);
          csigma.push_back(cp.sigma);
          cfz.push_back(cp.F.z());
        }
    write_text_file(join_path(output_dir, "gait_contact_map.csv"),
                    csv_of_series("t_s,xi,sigma_rad,F_z_N",
                                  {ct, cxi, csigma, cfz}));
    write_text_file(join_path(output_dir, "gait_contact_map.svg"),
                    scatter_plot("Contact map (shade = normal force)",
                                 "t [s]", "backbone coordinate xi", ct, cxi,
                                 cfz));
  }

  {
    constexpr int kStations = 31;
    std::vector<double> pt, pxi, px, py;
    pt.reserve(n * kStations);
    for (std::size_t k = 0; k < n; ++k) {
      JointState js = states[k].joints();
      for (int a = 0; a < kStations; ++a) {
        double xi = robot.n_sections * a / double(kStations - 1);
        Eigen::Matrix4d htm = full_htm(js, xi, 0.0, 0.0, robot);
        pt.push_back(states[k].t);
        pxi.push_back(xi);
        px.push_back(htm(0, 3));
        py.push_back(htm(1, 3));
      }
    }
    write_text_file(join_path(output_dir, "gait_xy_projection.csv"),
                    csv_of_series("t_s,xi,x_m,y_m", {pt, pxi, px, py}));

    std::vector<PlotSeries> series;
    PlotSeries path{"base path", {}, {}};
    for (std::size_t k = 0; k < n; ++k) {
      path.x.push_back(states[k].q[0]);
      path.y.push_back(states[k].q[1]);
    }
    series.push_back(std::move(path));
    if (n > 1) {
      std::size_t stride = std::max<std::size_t>(1, (n - 1) / 15);
      for (std::size_t k = 0; k < n; k += stride) {
        PlotSeries snap{"t=" + fmt("%.1f", states[k].t), {}, {}};
        for (int a = 0; a < kStations; ++a) {
          snap.x.push_back(px[k * kStations + a]);
          snap.y.push_back(py[k * kStations + a]);
        }
        series.push_back(std::move(snap));
      }
    }
    write_text_file(join_path(output_dir, "gait_xy_projection.svg"),
                    line_plot("Backbone X-Y projection", "x [m]", "y [m]",
                              series));
  }
}

// --- gait experiment --------------------------------------------------

GaitRunResult run_gait(const ExperimentConfig& cfg,
                       const SimState* presettled) {
  cfg.validate();
  if (!cfg.gait)
    throw InputDomainError("config has no gait section to run");
  ensure_dir(cfg.output_dir);
  SkinGrid grid = skin_grid(cfg.robot);
  const SkinGrid* grid_ptr = cfg.contact_enabled ? &grid : nullptr;

  SimState start;
  if (presettled) {
    start = *presettled;
    start.require_finite();
  } else {
    IntegrateResult settle =
        integrate(release_state(cfg), zero_pressures, kSettleDuration,
                  cfg.integrator, cfg.robot, grid_ptr);
    start = settle.states.back();
  }
  start.t = 0.0;

  ControlLaw law = gait_control(*cfg.gait, cfg.robot);
  IntegrateResult r = integrate(start, law, cfg.gait->duration,
                                cfg.integrator, cfg.robot, grid_ptr);

  GaitRunResult result;
  result.settled_state = start;
  result.stats = r.stats;
  result.skin_records = recorded_skin(r, cfg.contact_enabled, grid, cfg.robot);
  result.states = std::move(r.states);
  result.metrics = compute_metrics(result.states, *cfg.gait);

  export_plots(result, cfg.robot, cfg.output_dir);

  json m;
  m["kind"] = kind_name(cfg.gait->kind);
  m["amplitude_m"] = cfg.gait->amplitude;
  m["frequency_hz"] = cfg.gait->frequency;
  m["phase_shift_rad"] = cfg.gait->phase_shift;
  m["duration_s"] = cfg.gait->duration;
  m["vx_cm_s"] = result.metrics.vx_cm_s;
  m["vy_cm_s"] = result.metrics.vy_cm_s;
  m["net_displacement_m"] = result.metrics.net_displacement_m;
  m["cycles_used"] = result.metrics.cycles_used;
  m["settled_from_drop"] = presettled == nullptr;
  write_text_file(join_path(cfg.output_dir, "gait_metrics.json"),
                  m.dump(2) + "\n");
  return result;
}

}  // namespace snakesim
