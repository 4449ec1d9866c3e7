#include "kghdmr/hdmr.hpp"

#include "kghdmr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace kghdmr {

namespace {

constexpr double kTiny = 1e-12;
constexpr std::size_t kInfillBudget1d = 60;
constexpr std::size_t kInfillBudget2d = 200;
constexpr double kMinSeparation = 1e-9;
constexpr double kExtremumTol = 1e-3;

double interpolate_linear(const FirstOrderTerm &term, double t) {
  // Piecewise-linear through (0, v0), (anchor, 0), (1, v1).
  const auto &s = term.samples;
  auto value_at = [&](double at) {
    for (const auto &c : s)
      if (c.t == at)
        return c.value;
    return 0.0;
  };
  const double a = term.anchor;
  if (t == a)
    return 0.0;
  if (t < a) {
    const double v0 = value_at(0.0);
    return a > 0.0 ? v0 * (a - t) / a : 0.0;
  }
  const double v1 = value_at(1.0);
  return a < 1.0 ? v1 * (t - a) / (1.0 - a) : 0.0;
}

double min_distance(const std::vector<UnitPoint> &pts, std::span<const double> x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : pts) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
      d2 += (p[k] - x[k]) * (p[k] - x[k]);
    best = std::min(best, std::sqrt(d2));
  }
  return best;
}

using TermTruth = std::function<std::optional<double>(const UnitPoint &)>;
// maps a term coordinate onto the nearest evaluable location
using Snap = std::function<UnitPoint(std::span<const double>)>;

// Adds max-variance samples chosen by DIRECT until convergence_passes
// consecutive samples are predicted within convergence_rel_tol and the
// refitted model's largest predictive standard deviation is within the same
// tolerance, or the per-term budget is spent. Returns the final fit.
KrigingModel refine_term(std::vector<UnitPoint> &pts, std::vector<double> &vals,
                         const TermTruth &term_truth, const Snap &snap,
                         const BuildConfig &cfg, std::size_t infill_budget) {
  const std::size_t dim = pts.front().size();
  std::size_t added = 0;
  std::size_t passes = 0;
  for (;;) {
    auto model = fit_kriging_mle(pts, vals, cfg.kernel_exponent);
    // searched through snap() so discrete levels already sampled score zero
    UnitFunction neg_var = [&](std::span<const double> x) {
      return -model.predict_variance(snap(x));
    };
    const auto found = direct_minimize(neg_var, dim, infill_budget);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double tol = cfg.convergence_rel_tol * std::max(*hi - *lo, kTiny);
    // a lucky sample on a flat stretch must not end refinement of a badly
    // fitted term, so the spread is checked on the model being returned
    const bool settled = passes >= cfg.convergence_passes && std::sqrt(-found.best_value) <= tol;
    if (settled || added >= cfg.per_term_budget || !(found.best_value < 0.0))
      return model;

    // Samples cycle through max variance, argmin and argmax of the fit.
    // The coefficients are ranges, so the extrema are checked against truth.
    UnitPoint next = snap(found.best_point);
    if (added % 3 != 0) {
      const double sign = added % 3 == 1 ? -1.0 : 1.0;
      UnitFunction mean = [&](std::span<const double> x) {
        return sign * model.predict_mean(snap(x));
      };
      const auto ext = snap(direct_minimize(mean, dim, infill_budget).best_point);
      // an extremum the samples already reach is confirmed; probing it
      // again only clusters points
      const double sampled = sign < 0.0 ? *hi : *lo;
      if (std::abs(model.predict_mean(ext) - sampled) > kExtremumTol * std::max(*hi - *lo, kTiny) &&
          min_distance(pts, ext) >= kMinSeparation)
        next = ext;
    }
    if (min_distance(pts, next) < kMinSeparation)
      return model;
    const auto value = term_truth(next);
    if (!value)
      return model;
    const double predicted = model.predict_mean(next);
    pts.push_back(next);
    vals.push_back(*value);
    ++added;
    const auto [lo2, hi2] = std::minmax_element(vals.begin(), vals.end());
    const double scale = std::max({std::abs(*value), *hi2 - *lo2, kTiny});
    if (std::abs(predicted - *value) <= cfg.convergence_rel_tol * scale)
      ++passes;
    else
      passes = 0;
  }
}

} // namespace

void BuildConfig::validate() const {
  if (!(convergence_rel_tol > 0.0) || !(accuracy_rel_tol > 0.0) || !(linearity_rel_tol > 0.0))
    throw ConfigError("build tolerances must be positive");
  if (probes_per_test < 1)
    throw ConfigError("probes_per_test must be at least 1");
  if (convergence_passes < 1)
    throw ConfigError("convergence_passes must be at least 1");
  if (kernel_exponent != 1 && kernel_exponent != 2)
    throw ConfigError("kernel_exponent must be 1 or 2");
}

double FirstOrderTerm::operator()(double t) const {
  if (linear || !model)
    return interpolate_linear(*this, t);
  const double x[1] = {t};
  return model->predict_mean(x) - offset;
}

double CouplingTerm::operator()(double ti, double tj) const {
  if (!model)
    return 0.0;
  auto k = [&](double a, double b) {
    const double x[2] = {a, b};
    return model->predict_mean(x);
  };
  return k(ti, tj) - k(anchor_i, tj) - k(ti, anchor_j) + k(anchor_i, anchor_j);
}

double HdmrModel::predict(std::span<const double> p) const {
  const auto u = space.normalize(p);
  return predict_unit(u);
}

double HdmrModel::predict_unit(std::span<const double> u) const {
  const auto s = space.snap_unit(u);
  double f = f0;
  for (const auto &term : first_order)
    f += term(s[term.variable]);
  for (const auto &c : couplings)
    f += c(s[c.i], s[c.j]);
  return f;
}

std::vector<bool> HdmrModel::linear_flags() const {
  std::vector<bool> flags(space.dimension(), false);
  for (const auto &term : first_order)
    flags[term.variable] = term.linear;
  return flags;
}

std::vector<std::pair<std::size_t, std::size_t>> HdmrModel::coupled_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto &c : couplings)
    out.emplace_back(c.i, c.j);
  return out;
}

const CouplingTerm *HdmrModel::coupling(std::size_t i, std::size_t j) const {
  if (i > j)
    std::swap(i, j);
  for (const auto &c : couplings)
    if (c.i == i && c.j == j)
      return &c;
  return nullptr;
}

bool linearity_test(std::span<const CutSample> samples, double f0, const BuildConfig &config) {
  const CutSample *lo = nullptr;
  const CutSample *hi = nullptr;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (const auto &s : samples) {
    if (s.t == 0.0)
      lo = &s;
    if (s.t == 1.0)
      hi = &s;
    vmin = std::min(vmin, s.value);
    vmax = std::max(vmax, s.value);
  }
  if (!lo || !hi)
    throw ConfigError("linearity test needs cut-line samples at both ends");

  if (config.literal_linearity) {
    for (const auto &s : samples) {
      if (s.t == 0.0 || s.t == 1.0)
        continue;
      if (f0 == 0.0) {
        if (s.value != 0.0)
          return false;
      } else if (std::abs(s.value / f0) > config.linearity_rel_tol) {
        return false;
      }
    }
    return true;
  }

  const double scale = std::max({std::abs(f0), vmax - vmin, kTiny});
  for (const auto &s : samples) {
    const double chord = lo->value + (hi->value - lo->value) * s.t;
    if (std::abs(s.value - chord) > config.linearity_rel_tol * scale)
      return false;
  }
  return true;
}

HdmrBuilder::HdmrBuilder(Objective &objective, BuildConfig config)
    : objective_(objective), config_(config), evals_at_start_(objective.eval_count()) {
  config_.validate();
  first_order_.resize(objective_.space().dimension());
}

std::optional<double> HdmrBuilder::truth(const UnitPoint &u) {
  double v = 0.0;
  try {
    v = objective_.evaluate_unit(u);
  } catch (const InfeasibleGeometry &) {
    return std::nullopt;
  } catch (const BudgetExhausted &e) {
    throw PartialModelError(std::string("HDMR build stopped: ") + e.what(), objective_.log());
  }
  if (!f0_) {
    response_min_ = response_max_ = v;
  } else {
    response_min_ = std::min(response_min_, v);
    response_max_ = std::max(response_max_, v);
  }
  return v;
}

UnitPoint HdmrBuilder::cut_point(std::size_t i, double t) const {
  UnitPoint u = anchor_;
  u[i] = t;
  return u;
}

UnitPoint HdmrBuilder::face_point(std::size_t i, double ti, std::size_t j, double tj) const {
  UnitPoint u = anchor_;
  u[i] = ti;
  u[j] = tj;
  return u;
}

double HdmrBuilder::additive_prediction(std::span<const double> u) const {
  double f = *f0_;
  for (const auto &term : first_order_)
    if (term)
      f += (*term)(u[term->variable]);
  return f;
}

double HdmrBuilder::response_scale(double reference) const {
  return std::max({std::abs(reference), response_max_ - response_min_, kTiny});
}

void HdmrBuilder::require_center() const {
  if (!f0_)
    throw ConfigError("eval_center must run first");
}

void HdmrBuilder::require_first_order() const {
  require_center();
  for (const auto &t : first_order_)
    if (!t)
      throw ConfigError("all first-order terms must be built first");
}

double HdmrBuilder::eval_center() {
  if (f0_)
    return *f0_;
  const auto &space = objective_.space();
  const auto center = space.center();
  anchor_ = space.normalize(center);
  const auto v = truth(anchor_);
  if (!v)
    throw InfeasibleGeometry("design-space center is infeasible");
  f0_ = *v;
  return *f0_;
}

const FirstOrderTerm &HdmrBuilder::build_first_order(std::size_t i) {
  require_center();
  if (i >= first_order_.size())
    throw ConfigError("variable index out of range");
  if (first_order_[i])
    return *first_order_[i];

  FirstOrderTerm term;
  term.variable = i;
  term.anchor = anchor_[i];
  std::vector<CutSample> samples{{term.anchor, 0.0}};
  const auto &space = objective_.space();
  auto sample = [&](double t) -> bool {
    t = space.snap_unit(i, t);
    for (const auto &s : samples)
      if (s.t == t)
        return true;
    const auto v = truth(cut_point(i, t));
    if (!v)
      return false;
    samples.push_back({t, *v - *f0_});
    return true;
  };
  if (!sample(0.0) || !sample(1.0))
    throw InfeasibleGeometry("cut-line endpoint of '" + objective_.space()[i].name +
                             "' is infeasible");
  // the first DIRECT trisection of the cut line
  sample(1.0 / 6.0);
  sample(5.0 / 6.0);

  term.linear = linearity_test(samples, *f0_, config_);
  if (!term.linear) {
    std::vector<UnitPoint> pts;
    std::vector<double> vals;
    for (const auto &s : samples) {
      pts.push_back({s.t});
      vals.push_back(s.value);
    }
    TermTruth term_truth = [&](const UnitPoint &x) -> std::optional<double> {
      const auto v = truth(cut_point(i, x[0]));
      if (!v)
        return std::nullopt;
      return *v - *f0_;
    };
    Snap snap = [&](std::span<const double> x) { return UnitPoint{space.snap_unit(i, x[0])}; };
    auto model = refine_term(pts, vals, term_truth, snap, config_, kInfillBudget1d);
    samples.clear();
    for (std::size_t k = 0; k < pts.size(); ++k)
      samples.push_back({pts[k][0], vals[k]});
    const double a[1] = {term.anchor};
    term.offset = model.predict_mean(a);
    term.model = std::move(model);
  }
  std::sort(samples.begin(), samples.end(),
            [](const CutSample &a, const CutSample &b) { return a.t < b.t; });
  term.samples = std::move(samples);
  first_order_[i] = std::move(term);
  return *first_order_[i];
}

std::vector<std::vector<double>> HdmrBuilder::probe_candidates() const {
  // Probe coordinates are drawn from each term's own training locations,
  // where its model reproduces the truth, so additive functions pass exactly.
  std::vector<std::vector<double>> out;
  for (const auto &term : first_order_) {
    std::vector<double> c;
    if (term->linear) {
      c = {0.0, 1.0};
    } else {
      for (const auto &s : term->samples)
        if (s.t != term->anchor)
          c.push_back(s.t);
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool HdmrBuilder::coupling_existence_test() {
  require_first_order();
  const std::size_t n = first_order_.size();
  if (n < 2)
    return false;
  const auto cand = probe_candidates();
  std::mt19937_64 rng(config_.seed);
  std::vector<std::vector<std::size_t>> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    perm[i].resize(cand[i].size());
    std::iota(perm[i].begin(), perm[i].end(), 0);
    std::shuffle(perm[i].begin(), perm[i].end(), rng);
  }
  for (std::size_t k = 0; k < config_.probes_per_test; ++k) {
    UnitPoint u(n);
    for (std::size_t i = 0; i < n; ++i)
      u[i] = cand[i][perm[i][k % perm[i].size()]];
    const auto v = truth(u);
    if (!v)
      continue;
    if (std::abs(*v - additive_prediction(u)) > config_.accuracy_rel_tol * response_scale(*v))
      return true;
  }
  return false;
}

std::vector<std::pair<std::size_t, std::size_t>> HdmrBuilder::identify_coupled_pairs() {
  require_first_order();
  const std::size_t n = first_order_.size();
  const auto cand = probe_candidates();
  std::vector<std::pair<std::size_t, std::size_t>> coupled;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::mt19937_64 rng(config_.seed + 0x9E3779B97F4A7C15ULL * (i * n + j + 1));
      std::vector<std::size_t> pi(cand[i].size()), pj(cand[j].size());
      std::iota(pi.begin(), pi.end(), 0);
      std::iota(pj.begin(), pj.end(), 0);
      std::shuffle(pi.begin(), pi.end(), rng);
      std::shuffle(pj.begin(), pj.end(), rng);

      auto &probes = pair_probes_[{i, j}];
      probes.clear();
      bool is_coupled = false;
      std::set<std::pair<double, double>> tried;
      for (std::size_t k = 0; k < config_.probes_per_test; ++k) {
        const double ti = cand[i][pi[k % pi.size()]];
        const double tj = cand[j][pj[k % pj.size()]];
        if (!tried.insert({ti, tj}).second)
          continue;
        const auto u = face_point(i, ti, j, tj);
        const auto v = truth(u);
        if (!v)
          continue;
        probes.push_back({u, *v});
        if (std::abs(*v - additive_prediction(u)) > config_.accuracy_rel_tol * response_scale(*v))
          is_coupled = true;
      }
      if (is_coupled)
        coupled.emplace_back(i, j);
    }
  }
  return coupled;
}

const CouplingTerm &HdmrBuilder::build_second_order(std::size_t i, std::size_t j) {
  require_first_order();
  if (i > j)
    std::swap(i, j);
  if (i == j || j >= first_order_.size())
    throw ConfigError("second-order term needs two distinct variables");
  if (auto it = couplings_.find({i, j}); it != couplings_.end())
    return it->second;

  const auto &fi = *first_order_[i];
  const auto &fj = *first_order_[j];
  std::map<std::pair<double, double>, double> data;
  auto residual = [&](double ti, double tj, double truth_value) {
    return truth_value - *f0_ - fi(ti) - fj(tj);
  };

  data[{fi.anchor, fj.anchor}] = 0.0;
  // cut-line samples: the residual there is the first-order fit error
  for (const auto &s : fi.samples)
    data.emplace(std::pair{s.t, fj.anchor}, residual(s.t, fj.anchor, *f0_ + s.value));
  for (const auto &s : fj.samples)
    data.emplace(std::pair{fi.anchor, s.t}, residual(fi.anchor, s.t, *f0_ + s.value));
  const auto &space = objective_.space();
  // corners plus the four centers of the first trisection of the face
  for (double ti : {0.0, 1.0 / 6.0, 5.0 / 6.0, 1.0}) {
    for (double tj : {0.0, 1.0 / 6.0, 5.0 / 6.0, 1.0}) {
      if ((ti == 0.0 || ti == 1.0) != (tj == 0.0 || tj == 1.0))
        continue;
      const double si = space.snap_unit(i, ti), sj = space.snap_unit(j, tj);
      if (data.count({si, sj}))
        continue;
      if (const auto v = truth(face_point(i, si, j, sj)))
        data[{si, sj}] = residual(si, sj, *v);
    }
  }
  if (auto it = pair_probes_.find({i, j}); it != pair_probes_.end())
    for (const auto &p : it->second)
      data[{p.u[i], p.u[j]}] = residual(p.u[i], p.u[j], p.value);

  std::vector<UnitPoint> pts;
  std::vector<double> vals;
  for (const auto &[key, value] : data) {
    pts.push_back({key.first, key.second});
    vals.push_back(value);
  }
  TermTruth term_truth = [&](const UnitPoint &x) -> std::optional<double> {
    const auto v = truth(face_point(i, x[0], j, x[1]));
    if (!v)
      return std::nullopt;
    return residual(x[0], x[1], *v);
  };

  CouplingTerm term;
  term.i = i;
  term.j = j;
  term.anchor_i = fi.anchor;
  term.anchor_j = fj.anchor;
  Snap snap = [&](std::span<const double> x) {
    return UnitPoint{space.snap_unit(i, x[0]), space.snap_unit(j, x[1])};
  };
  term.model = refine_term(pts, vals, term_truth, snap, config_, kInfillBudget2d);
  return couplings_.emplace(std::pair{i, j}, std::move(term)).first->second;
}

HdmrModel HdmrBuilder::build() {
  eval_center();
  for (std::size_t i = 0; i < first_order_.size(); ++i)
    build_first_order(i);
  if (coupling_existence_test())
    for (const auto &[i, j] : identify_coupled_pairs())
      build_second_order(i, j);
  return model();
}

HdmrModel HdmrBuilder::model() const {
  require_center();
  HdmrModel m;
  m.space = objective_.space();
  m.f0 = *f0_;
  m.cut_center = m.space.denormalize(anchor_);
  m.anchor = anchor_;
  for (const auto &t : first_order_)
    if (t)
      m.first_order.push_back(*t);
  for (const auto &[key, c] : couplings_)
    m.couplings.push_back(c);
  m.total_samples = objective_.eval_count() - evals_at_start_;
  m.kernel_exponent = config_.kernel_exponent;
  return m;
}

HdmrModel build_hdmr(Objective &objective, const BuildConfig &config) {
  HdmrBuilder builder(objective, config);
  return builder.build();
}

} // namespace kghdmr
