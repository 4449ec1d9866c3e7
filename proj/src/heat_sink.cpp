#include "kghdmr/heat_sink.hpp"

#include "kghdmr/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kghdmr::heat_sink {

ModelConstants ModelConstants::from_params(const std::map<std::string, double> &params) {
  ModelConstants c;
  for (const auto &[key, value] : params) {
    if (key == "heat_flux")
      c.heat_flux = value;
    else if (key == "inlet_temp")
      c.inlet_temp = value;
    else if (key == "h0")
      c.h0 = value;
    else if (key == "dw_ref")
      c.dw_ref = value;
    else if (key == "gamma")
      c.gamma = value;
    else
      throw ConfigError("heat_sink does not take parameter '" + key + "'");
  }
  if (!(c.h0 > 0.0) || !(c.dw_ref > 0.0) || !(c.gamma >= 0.0) || !(c.heat_flux >= 0.0))
    throw ConfigError("heat_sink constants need h0 > 0, dw_ref > 0, gamma >= 0, heat_flux >= 0");
  return c;
}

double fin_spacing_length(const Geometry &g) {
  const double d = (70.0 - 2.0 * g.m_l * g.r) / g.m_l;
  if (!(d > 0.0)) {
    std::ostringstream os;
    os << "infeasible geometry: d_l = " << d << " mm for m_l = " << g.m_l << ", r = " << g.r;
    throw InfeasibleGeometry(os.str());
  }
  return d;
}

double fin_spacing_width(const Geometry &g) {
  const double rows = 2.0 * g.m_w - 1.0;
  const double d = (30.0 - 2.0 * rows * g.r) / rows;
  if (!(d > 0.0)) {
    std::ostringstream os;
    os << "infeasible geometry: d_w = " << d << " mm for m_w = " << g.m_w << ", r = " << g.r;
    throw InfeasibleGeometry(os.str());
  }
  return d;
}

int fin_count(const Geometry &g) { return g.m_w * g.m_l + (g.m_w - 1) * (g.m_l - 1); }

void check_feasible(const Geometry &g) {
  if (g.n_sides < 3)
    throw InfeasibleGeometry("fin section needs at least 3 sides");
  if (g.m_l < 1 || g.m_w < 1)
    throw InfeasibleGeometry("fin counts must be positive");
  fin_spacing_length(g);
  fin_spacing_width(g);
}

double convection_coefficient(const Geometry &g, const ModelConstants &c) {
  return c.h0 * std::pow(1.0 + fin_spacing_width(g) / c.dw_ref, -c.gamma);
}

double max_base_temperature(const Geometry &g, const Material &mat, const ModelConstants &c) {
  check_feasible(g);
  using std::numbers::pi;
  const double r = g.r * 1e-3;
  const double h_f = g.h_f * 1e-3;
  const double h_d = g.h_d * 1e-3;
  const double n = g.n_sides;

  const double perimeter = 2.0 * n * r * std::sin(pi / n);
  const double section = 0.5 * n * r * r * std::sin(2.0 * pi / n);
  const double a_base = c.base_length * c.base_width * 1e-6;
  const int fins = fin_count(g);

  const double h = convection_coefficient(g, c);
  const double m = std::sqrt(h * perimeter / (mat.k * section));
  const double mh = m * h_f;
  const double efficiency = mh > 0.0 ? std::tanh(mh) / mh : 1.0;

  // Exposed base (a_base - fins * section) plus the fin tips (fins * section);
  // the bare-plate limit is recovered exactly at h_f = 0.
  const double exposed = (a_base - fins * section) + fins * section;
  const double conductance = h * (exposed + efficiency * fins * perimeter * h_f);
  const double r_base = h_d / (mat.k * a_base);
  return c.inlet_temp + c.heat_flux * a_base * (r_base + 1.0 / conductance);
}

namespace {

struct Baseline {
  const char *name;
  VariableKind kind;
  double lower, upper, initial;
  const char *unit;
};

constexpr std::array<Baseline, 10> kVariables{{
    {"h_d", VariableKind::Continuous, 1, 3, 2, "mm"},
    {"h_f", VariableKind::Continuous, 5, 15, 10, "mm"},
    {"r", VariableKind::Continuous, 1, 2, 1.5, "mm"},
    {"m_l", VariableKind::DiscreteInteger, 2, 15, 7, "-"},
    {"m_w", VariableKind::DiscreteInteger, 2, 5, 3, "-"},
    {"n", VariableKind::DiscreteInteger, 3, 10, 4, "-"},
    {"theta", VariableKind::Continuous, 0, 120, 45, "deg"},
    {"rho", VariableKind::Continuous, 2700, 10530, 2700, "kg/m^3"},
    {"C_p", VariableKind::Continuous, 233, 890, 890, "J/(kg K)"},
    {"k", VariableKind::Continuous, 155, 412, 155, "W/(m K)"},
}};

DesignSpace space_of(std::size_t count) {
  std::vector<VariableSpec> vars;
  for (std::size_t i = 0; i < count; ++i) {
    const auto &b = kVariables[i];
    vars.push_back({b.name, b.kind, b.lower, b.upper, b.unit});
  }
  return DesignSpace(std::move(vars));
}

} // namespace

DesignSpace full_design_space() { return space_of(10); }
DesignSpace structural_design_space() { return space_of(7); }

Problem make_problem(DesignSpace space, const ModelConstants &c) {
  // slot[i] = index into the space, or -1 to keep the baseline value
  std::array<int, kVariables.size()> slot;
  slot.fill(-1);
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    bool found = false;
    for (std::size_t b = 0; b < kVariables.size(); ++b) {
      if (space[i].name == kVariables[b].name) {
        slot[b] = static_cast<int>(i);
        found = true;
      }
    }
    if (!found)
      throw ConfigError("heat_sink has no variable named '" + space[i].name + "'");
  }

  Evaluator eval = [slot, c](std::span<const double> x) {
    std::array<double, kVariables.size()> v;
    for (std::size_t b = 0; b < v.size(); ++b)
      v[b] = slot[b] >= 0 ? x[static_cast<std::size_t>(slot[b])] : kVariables[b].initial;
    Geometry g{v[0], v[1], v[2], static_cast<int>(std::lround(v[3])),
               static_cast<int>(std::lround(v[4])), static_cast<int>(std::lround(v[5])), v[6]};
    Material m{v[7], v[8], v[9]};
    return max_base_temperature(g, m, c);
  };
  return {"heat_sink", std::move(space), std::move(eval)};
}

} // namespace kghdmr::heat_sink
