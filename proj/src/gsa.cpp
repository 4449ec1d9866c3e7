#include "kghdmr/gsa.hpp"

#include "kghdmr/errors.hpp"
#include "kghdmr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kghdmr {

namespace {

double grid_t(std::size_t k, std::size_t grid) {
  return grid < 2 ? 0.5 : static_cast<double>(k) / static_cast<double>(grid - 1);
}

void check_metric_input(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw UndefinedMetric("metric inputs differ in length");
  if (y.size() < 2)
    throw UndefinedMetric("metrics need at least two samples");
}

double mean(std::span<const double> y) {
  double s = 0.0;
  for (double v : y)
    s += v;
  return s / static_cast<double>(y.size());
}

double population_std(std::span<const double> y) {
  const double m = mean(y);
  double s = 0.0;
  for (double v : y)
    s += (v - m) * (v - m);
  const double sd = std::sqrt(s / static_cast<double>(y.size()));
  if (!(sd > 0.0))
    throw UndefinedMetric("true responses are constant; metric undefined");
  return sd;
}

} // namespace

double sensitivity_coefficient(const HdmrModel &model, std::size_t i, std::size_t grid) {
  const auto &term = model.first_order.at(i);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < grid; ++k) {
    const double v = term(model.space.snap_unit(i, grid_t(k, grid)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

double coupling_coefficient(const HdmrModel &model, std::size_t i, std::size_t j,
                            std::size_t grid) {
  const auto *term = model.coupling(i, j);
  if (!term)
    return 0.0;
  const bool swapped = i > j;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t a = 0; a < grid; ++a) {
    for (std::size_t b = 0; b < grid; ++b) {
      const double ta = model.space.snap_unit(i, grid_t(a, grid));
      const double tb = model.space.snap_unit(j, grid_t(b, grid));
      const double v = swapped ? (*term)(tb, ta) : (*term)(ta, tb);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi - lo;
}

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
  check_metric_input(y_true, y_pred);
  const double m = mean(y_true);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    ss_res += (y_true[k] - y_pred[k]) * (y_true[k] - y_pred[k]);
    ss_tot += (y_true[k] - m) * (y_true[k] - m);
  }
  if (!(ss_tot > 0.0))
    throw UndefinedMetric("true responses are constant; R2 undefined");
  return 1.0 - ss_res / ss_tot;
}

double raae(std::span<const double> y_true, std::span<const double> y_pred) {
  check_metric_input(y_true, y_pred);
  const double sd = population_std(y_true);
  double s = 0.0;
  for (std::size_t k = 0; k < y_true.size(); ++k)
    s += std::abs(y_true[k] - y_pred[k]);
  return s / (static_cast<double>(y_true.size()) * sd);
}

double rmae(std::span<const double> y_true, std::span<const double> y_pred) {
  check_metric_input(y_true, y_pred);
  const double sd = population_std(y_true);
  double worst = 0.0;
  for (std::size_t k = 0; k < y_true.size(); ++k)
    worst = std::max(worst, std::abs(y_true[k] - y_pred[k]));
  return worst / sd;
}

Metrics validate_model(const HdmrModel &model, Objective &objective, std::size_t n_test,
                       std::uint64_t seed) {
  const auto &space = objective.space();
  std::vector<double> truth, pred;
  for (const auto &u : lhs_sample(space.dimension(), n_test, seed)) {
    const auto p = space.denormalize(u);
    double v = 0.0;
    try {
      v = objective.evaluate(p);
    } catch (const InfeasibleGeometry &) {
      continue;
    }
    truth.push_back(v);
    pred.push_back(model.predict(p));
  }
  Metrics m;
  m.r2 = r2(truth, pred);
  m.raae = raae(truth, pred);
  m.rmae = rmae(truth, pred);
  m.samples = truth.size();
  return m;
}

SensitivityReport analyze(const HdmrModel &model, const GsaOptions &options) {
  const std::size_t n = model.space.dimension();
  SensitivityReport rep;
  rep.names = model.space.names();
  rep.kernel_exponent = model.kernel_exponent;
  rep.total_samples = model.total_samples;
  rep.linear_flags = model.linear_flags();
  rep.s.resize(n);
  rep.c.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    rep.s[i] = sensitivity_coefficient(model, i, options.sensitivity_grid);
  for (const auto &[i, j] : model.coupled_pairs())
    rep.c[i][j] = rep.c[j][i] = coupling_coefficient(model, i, j, options.coupling_grid);

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<CurveSample> curve;
    const auto &var = model.space[i];
    for (std::size_t k = 0; k < options.curve_points; ++k) {
      const double t = model.space.snap_unit(i, grid_t(k, options.curve_points));
      curve.push_back({t, var.lower + t * var.width(), model.first_order[i](t)});
    }
    rep.curves.push_back(std::move(curve));
  }
  for (const auto &term : model.couplings) {
    SurfaceData surf{term.i, term.j, options.surface_points, {}};
    for (std::size_t a = 0; a < surf.grid; ++a)
      for (std::size_t b = 0; b < surf.grid; ++b)
        surf.values.push_back(term(model.space.snap_unit(term.i, grid_t(a, surf.grid)),
                                   model.space.snap_unit(term.j, grid_t(b, surf.grid))));
    rep.surfaces.push_back(std::move(surf));
  }
  return screen(std::move(rep), options.threshold, options.exempt);
}

SensitivityReport screen(SensitivityReport report, double threshold,
                         const std::set<std::string> &exempt) {
  report.threshold = threshold;
  report.exempt = exempt;
  const std::size_t n = report.c.size();
  report.screened_c = report.c;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool keep = (i < report.names.size() && exempt.count(report.names[i])) ||
                        (j < report.names.size() && exempt.count(report.names[j]));
      if (!keep && report.screened_c[i][j] < threshold)
        report.screened_c[i][j] = 0.0;
    }
  }
  return report;
}

} // namespace kghdmr
