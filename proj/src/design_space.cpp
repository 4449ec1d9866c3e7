#include "kghdmr/design_space.hpp"

#include "kghdmr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace kghdmr {

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::Continuous ? "continuous" : "discrete-integer";
}

VariableKind parse_variable_kind(std::string_view text) {
  if (text == "continuous")
    return VariableKind::Continuous;
  if (text == "discrete-integer" || text == "discrete" || text == "integer")
    return VariableKind::DiscreteInteger;
  throw ConfigError("unknown variable kind '" + std::string(text) + "'");
}

double round_half_up_clamped(double value, double lower, double upper) {
  return std::clamp(std::floor(value + 0.5), lower, upper);
}

DesignSpace::DesignSpace(std::vector<VariableSpec> variables) : variables_(std::move(variables)) {
  if (variables_.empty())
    throw ConfigError("design space needs at least one variable");
  std::set<std::string> seen;
  for (const auto &v : variables_) {
    if (v.name.empty())
      throw ConfigError("design variable with empty name");
    if (!seen.insert(v.name).second)
      throw ConfigError("duplicate design variable '" + v.name + "'");
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper) || !(v.lower < v.upper))
      throw ConfigError("variable '" + v.name + "' needs finite bounds with lower < upper");
    if (v.is_discrete() && (v.lower != std::floor(v.lower) || v.upper != std::floor(v.upper)))
      throw ConfigError("discrete variable '" + v.name + "' needs integer bounds");
  }
}

std::optional<std::size_t> DesignSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name)
      return i;
  return std::nullopt;
}

std::vector<std::string> DesignSpace::names() const {
  std::vector<std::string> out;
  out.reserve(variables_.size());
  for (const auto &v : variables_)
    out.push_back(v.name);
  return out;
}

void DesignSpace::check_dimension(std::size_t n) const {
  if (n != variables_.size()) {
    std::ostringstream os;
    os << "point has " << n << " components, design space has " << variables_.size();
    throw ConfigError(os.str());
  }
}

void DesignSpace::validate(std::span<const double> p) const {
  check_dimension(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto &v = variables_[i];
    if (!(p[i] >= v.lower && p[i] <= v.upper)) {
      std::ostringstream os;
      os << "variable '" << v.name << "' = " << p[i] << " outside [" << v.lower << ", " << v.upper
         << "]";
      throw BoundsError(v.name, os.str());
    }
    if (v.is_discrete() && p[i] != std::floor(p[i])) {
      std::ostringstream os;
      os << "discrete variable '" << v.name << "' = " << p[i] << " is not an integer";
      throw BoundsError(v.name, os.str());
    }
  }
}

UnitPoint DesignSpace::normalize(std::span<const double> p) const {
  check_dimension(p.size());
  UnitPoint u(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto &v = variables_[i];
    if (!(p[i] >= v.lower && p[i] <= v.upper)) {
      std::ostringstream os;
      os << "variable '" << v.name << "' = " << p[i] << " outside [" << v.lower << ", " << v.upper
         << "]";
      throw BoundsError(v.name, os.str());
    }
    u[i] = (p[i] - v.lower) / v.width();
  }
  return u;
}

DesignPoint DesignSpace::denormalize(std::span<const double> u) const {
  check_dimension(u.size());
  DesignPoint p(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0)) {
      std::ostringstream os;
      os << "unit coordinate " << i << " (" << variables_[i].name << ") = " << u[i]
         << " outside [0, 1]";
      throw RangeError(os.str());
    }
    const auto &v = variables_[i];
    p[i] = v.lower + u[i] * v.width();
  }
  return round_discrete(p);
}

double DesignSpace::snap_unit(std::size_t i, double t) const {
  const auto &v = variables_.at(i);
  if (!v.is_discrete())
    return t;
  const double level = round_half_up_clamped(v.lower + t * v.width(), v.lower, v.upper);
  return (level - v.lower) / v.width();
}

UnitPoint DesignSpace::snap_unit(std::span<const double> u) const {
  check_dimension(u.size());
  UnitPoint out(u.begin(), u.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = snap_unit(i, out[i]);
  return out;
}

DesignPoint DesignSpace::round_discrete(std::span<const double> p) const {
  check_dimension(p.size());
  DesignPoint out(p.begin(), p.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto &v = variables_[i];
    if (v.is_discrete())
      out[i] = round_half_up_clamped(out[i], v.lower, v.upper);
  }
  return out;
}

DesignPoint DesignSpace::center() const {
  DesignPoint c(variables_.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = 0.5 * (variables_[i].lower + variables_[i].upper);
  return round_discrete(c);
}

} // namespace kghdmr
