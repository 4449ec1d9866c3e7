#pragma once

#include "kghdmr/hdmr.hpp"
#include "kghdmr/objective.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace kghdmr {

/// max - min of f_i over a dense scan of its range.
double sensitivity_coefficient(const HdmrModel &model, std::size_t i, std::size_t grid = 1001);
/// max - min of f_ij over a dense grid x grid scan; 0 when the pair has no term.
double coupling_coefficient(const HdmrModel &model, std::size_t i, std::size_t j,
                            std::size_t grid = 101);

// Surrogate accuracy metrics. STD uses 1/N normalization.
double r2(std::span<const double> y_true, std::span<const double> y_pred);
double raae(std::span<const double> y_true, std::span<const double> y_pred);
double rmae(std::span<const double> y_true, std::span<const double> y_pred);

struct Metrics {
  double r2 = 0.0;
  double raae = 0.0;
  double rmae = 0.0;
  std::size_t samples = 0;
};

/// Compares the model with fresh truth evaluations at n_test Latin
/// hypercube points (discrete components rounded). Infeasible points are
/// skipped.
Metrics validate_model(const HdmrModel &model, Objective &objective, std::size_t n_test,
                       std::uint64_t seed);

struct CurveSample {
  double t;     // unit coordinate
  double x;     // physical value
  double value; // f_i
};

struct SurfaceData {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t grid = 0;
  // row-major over (t_i, t_j)
  std::vector<double> values;
};

struct SensitivityReport {
  std::vector<std::string> names;
  std::vector<double> s;
  // symmetric, zero diagonal
  std::vector<std::vector<double>> c;
  std::vector<std::vector<double>> screened_c;
  double threshold = 1.0;
  std::set<std::string> exempt;
  std::vector<bool> linear_flags;
  std::optional<Metrics> metrics;
  std::vector<std::vector<CurveSample>> curves;
  std::vector<SurfaceData> surfaces;
  int kernel_exponent = 2;
  std::size_t total_samples = 0;
};

struct GsaOptions {
  double threshold = 1.0;
  std::set<std::string> exempt;
  std::size_t sensitivity_grid = 1001;
  std::size_t coupling_grid = 101;
  std::size_t curve_points = 101;
  std::size_t surface_points = 41;
};

/// Coefficients, screening and plot data for a built model.
SensitivityReport analyze(const HdmrModel &model, const GsaOptions &options = {});

/// Zeros every coupling below `threshold` unless one of its variables is
/// exempt. Idempotent.
SensitivityReport screen(SensitivityReport report, double threshold,
                         const std::set<std::string> &exempt);

} // namespace kghdmr
