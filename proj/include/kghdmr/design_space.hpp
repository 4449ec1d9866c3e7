#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kghdmr {

enum class VariableKind { Continuous, DiscreteInteger };

std::string_view to_string(VariableKind kind);
VariableKind parse_variable_kind(std::string_view text);

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::Continuous;
  double lower = 0.0;
  double upper = 1.0;
  std::string unit;

  bool is_discrete() const noexcept { return kind == VariableKind::DiscreteInteger; }
  double width() const noexcept { return upper - lower; }
};

// Values in physical units, one per variable.
using DesignPoint = std::vector<double>;
// Coordinates in the unit hypercube [0, 1]^n.
using UnitPoint = std::vector<double>;

/// Ordered, immutable set of box-bounded design variables.
///
/// Sampling and surrogate fitting work on unit-cube coordinates; the true
/// objective is always called with physical values whose discrete
/// components have been rounded (round-half-up, clamped to bounds).
class DesignSpace {
public:
  DesignSpace() = default;
  explicit DesignSpace(std::vector<VariableSpec> variables);

  std::size_t dimension() const noexcept { return variables_.size(); }
  const VariableSpec &operator[](std::size_t i) const { return variables_.at(i); }
  const std::vector<VariableSpec> &variables() const noexcept { return variables_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  /// Throws BoundsError naming the first offending variable.
  void validate(std::span<const double> p) const;

  UnitPoint normalize(std::span<const double> p) const;
  /// Maps unit coordinates to physical values and rounds discrete components.
  DesignPoint denormalize(std::span<const double> u) const;
  DesignPoint round_discrete(std::span<const double> p) const;
  /// Unit coordinate of the level a discrete variable rounds to; identity
  /// for continuous variables.
  double snap_unit(std::size_t i, double t) const;
  UnitPoint snap_unit(std::span<const double> u) const;

  /// Midpoint of every range, discrete components rounded.
  DesignPoint center() const;

private:
  void check_dimension(std::size_t n) const;

  std::vector<VariableSpec> variables_;
};

/// Round-half-up to the nearest integer, then clamp to [lower, upper].
double round_half_up_clamped(double value, double lower, double upper);

} // namespace kghdmr
