#pragma once

#include "kghdmr/design_space.hpp"
#include "kghdmr/objective.hpp"

#include <map>
#include <string>

namespace kghdmr::heat_sink {

/// Pin-fin array on a 70 x 30 mm base plate. Lengths in mm, angle in degrees.
/// Rows alternate m_l and m_l - 1 fins; there are 2 m_w - 1 rows across the width.
struct Geometry {
  double h_d = 2.0;
  double h_f = 10.0;
  double r = 1.5;
  int m_l = 7;
  int m_w = 3;
  int n_sides = 4;
  double theta = 45.0;
};

struct Material {
  double rho = 2700.0; // kg/m^3
  double c_p = 890.0;  // J/(kg K)
  double k = 155.0;    // W/(m K)
};

/// Constants of the lumped thermal model. The convection coefficient is
/// h = h0 * (1 + d_w / dw_ref)^(-gamma).
struct ModelConstants {
  double heat_flux = 2000.0;  // W/m^2
  double inlet_temp = 25.0;   // deg C
  double h0 = 60.0;           // W/(m^2 K)
  double dw_ref = 3.0;        // mm
  double gamma = 0.5;
  double base_length = 70.0;  // mm
  double base_width = 30.0;   // mm

  static ModelConstants from_params(const std::map<std::string, double> &params);
};

/// Clear distance between neighbouring fin circumcircles along the length, mm.
double fin_spacing_length(const Geometry &g);
/// Clear distance between neighbouring fin circumcircles across the width, mm.
double fin_spacing_width(const Geometry &g);
int fin_count(const Geometry &g);

/// Throws InfeasibleGeometry when either spacing is non-positive or n < 3.
void check_feasible(const Geometry &g);

double convection_coefficient(const Geometry &g, const ModelConstants &c);

/// Lumped estimate of the maximum base temperature, deg C.
///
/// Not a CFD substitute: classic straight-fin efficiency with an
/// adiabatic tip, fin tips counted as exposed base area, 1-D conduction
/// through the base plate. The phase angle theta has no effect.
double max_base_temperature(const Geometry &g, const Material &m, const ModelConstants &c = {});

/// Variables h_d, h_f, r, m_l, m_w, n, theta, rho, C_p, k with the bounds of
/// the sensitivity study.
DesignSpace full_design_space();
/// The seven structural variables of the optimization problem.
DesignSpace structural_design_space();

/// Problem over any space whose variable names are a subset of
/// full_design_space(); unnamed variables keep their baseline values.
Problem make_problem(DesignSpace space, const ModelConstants &c = {});

} // namespace kghdmr::heat_sink
