#pragma once

#include <cmath>
#include <string>

#include "snakesim/errors.hpp"

namespace snakesim {

// Physical and numerical constants of the three-section pneumatic snake.
// Defaults describe the 0.60 m / 0.35 kg prototype; every field can be
// overridden from the experiment config.
struct RobotParams {
  int n_sections = 3;
  double L0 = 0.15;         // m, unactuated PMA length per section
  double r_p = 0.0125;      // m, PMA mounting radius about the backbone
  double r_s = 0.03;        // m, outer skin radius for contact points
  double d_rigid = 0.05;    // m, rigid spacer between/after sections
  double m_total = 0.35;    // kg, distributed along the backbone
  double mount_offset = M_PI / 3.0;  // rad, Z rotation between sections
  double dl_max = 0.075;    // m, max PMA extension (50% at P_max)
  double K_elastic = 1900.0;  // N/m, PMA axial stiffness
  double D_damp = 90.0;     // N*s/m, damping on each actuated coordinate
  double K_g = 1000.0;      // N/m, ground normal stiffness per point
  double B_g = 130.0;       // N*s/m, ground normal damping per point
  double mu_x = 0.6;        // friction coefficient, world X
  double mu_y = 0.2;        // friction coefficient, world Y
  double g = 9.81;          // m/s^2
  double P_max = 4.0;       // bar, actuation ceiling
  double A_pma = 0.0;       // m^2 effective area; 0 = derive from statics
  double v_eps = 1e-3;      // m/s, friction regularization velocity
  double eps_straight = 1e-6;  // 1/m, straight-fallback curvature threshold
  int quadrature_nodes = 11;   // Gauss-Legendre nodes per section

  // Effective PMA area such that P_max statically balances K_elastic*dl_max.
  double a_pma_effective() const {
    return A_pma > 0.0 ? A_pma : K_elastic * dl_max / (P_max * 1e5);
  }
  double total_length() const { return n_sections * (L0 + d_rigid); }
  double section_mass() const { return m_total / n_sections; }
  // m per bar in the commanded-length -> pressure map.
  double pressure_length_coeff() const { return dl_max / P_max; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InputDomainError(std::string("RobotParams.") + name +
                               " must be finite and > 0");
    };
    if (n_sections != 3)
      throw InputDomainError("RobotParams.n_sections must be 3");
    positive(L0, "L0");
    positive(r_p, "r_p");
    positive(r_s, "r_s");
    positive(d_rigid, "d_rigid");
    positive(m_total, "m_total");
    positive(dl_max, "dl_max");
    positive(K_elastic, "K_elastic");
    positive(K_g, "K_g");
    positive(P_max, "P_max");
    positive(v_eps, "v_eps");
    positive(eps_straight, "eps_straight");
    if (D_damp < 0.0 || B_g < 0.0 || mu_x < 0.0 || mu_y < 0.0)
      throw InputDomainError("RobotParams damping/friction must be >= 0");
    if (!std::isfinite(g))
      throw InputDomainError("RobotParams.g must be finite");
    if (!std::isfinite(mount_offset))
      throw InputDomainError("RobotParams.mount_offset must be finite");
    if (A_pma < 0.0)
      throw InputDomainError("RobotParams.A_pma must be >= 0 (0 = derive)");
    if (quadrature_nodes < 2 || quadrature_nodes > 64)
      throw InputDomainError("RobotParams.quadrature_nodes must be in [2, 64]");
  }
};

}  // namespace snakesim
