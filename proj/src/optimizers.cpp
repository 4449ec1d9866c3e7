#include "kghdmr/optimizers.hpp"

#include "kghdmr/errors.hpp"
#include "kghdmr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

namespace kghdmr {

std::string_view to_string(Algorithm a) {
  switch (a) {
  case Algorithm::PSO:
    return "PSO";
  case Algorithm::DE:
    return "DE";
  case Algorithm::GA:
    return "GA";
  case Algorithm::TLBO:
    return "TLBO";
  case Algorithm::EGO:
    return "EGO";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  std::string up(text);
  for (auto &ch : up)
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto a : {Algorithm::PSO, Algorithm::DE, Algorithm::GA, Algorithm::TLBO, Algorithm::EGO})
    if (up == to_string(a))
      return a;
  throw ConfigError("unknown algorithm '" + std::string(text) + "'");
}

void OptimizerConfig::validate(std::size_t dimension) const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (maxit < 1)
    throw ConfigError("maxit must be at least 1");
  if (algorithm != Algorithm::EGO && npop < 2)
    throw ConfigError("npop must be at least 2");
  if (algorithm == Algorithm::DE && npop < 4)
    throw ConfigError("DE needs npop >= 4");
  if (!prob(de.p_crossover) || !prob(ga.p_crossover) || !prob(ga.p_mutation) ||
      !prob(ga.gene_rate))
    throw ConfigError("probabilities must lie in [0, 1]");
  if (!(pso.w_min <= pso.w_max))
    throw ConfigError("PSO needs w_min <= w_max");
  if (ego.kernel_exponent != 1 && ego.kernel_exponent != 2)
    throw ConfigError("EGO kernel exponent must be 1 or 2");
  if (dimension < 1)
    throw ConfigError("empty design space");
}

double inertia_weight(std::size_t t, std::size_t maxit, double w_min, double w_max) {
  const double m = static_cast<double>(maxit);
  return w_min + (m - static_cast<double>(t)) * (w_max - w_min) / m;
}

std::vector<double> de_mutation(std::span<const double> x_r1, std::span<const double> x_r2,
                                std::span<const double> x_r3, double f) {
  std::vector<double> v(x_r1.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = x_r1[k] + f * (x_r2[k] - x_r3[k]);
  return v;
}

std::vector<double> de_crossover(std::span<const double> parent, std::span<const double> mutant,
                                 double p_crossover, std::size_t k_rand, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(parent.begin(), parent.end());
  for (std::size_t k = 0; k < u.size(); ++k)
    if (unif(rng) <= p_crossover || k == k_rand)
      u[k] = mutant[k];
  return u;
}

std::size_t ga_crossover_count(double p_crossover, std::size_t npop) {
  return 2 * static_cast<std::size_t>(std::round(p_crossover * static_cast<double>(npop) / 2.0));
}

std::size_t ga_mutation_count(double p_mutation, std::size_t npop) {
  return static_cast<std::size_t>(std::round(p_mutation * static_cast<double>(npop)));
}

std::vector<double> population_mean(const std::vector<std::vector<double>> &population) {
  std::vector<double> m(population.front().size(), 0.0);
  for (const auto &x : population)
    for (std::size_t k = 0; k < m.size(); ++k)
      m[k] += x[k];
  for (auto &v : m)
    v /= static_cast<double>(population.size());
  return m;
}

int teaching_factor(double u) { return static_cast<int>(std::round(1.0 + u)); }

double expected_improvement(double mean, double sigma, double y_min) {
  if (!(sigma > 0.0))
    return 0.0;
  const double diff = y_min - mean;
  const double z = diff / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, diff * cdf + sigma * pdf);
}

double expected_improvement(const KrigingModel &model, std::span<const double> x, double y_min) {
  return expected_improvement(model.predict_mean(x), std::sqrt(model.predict_variance(x)), y_min);
}

namespace {

using Population = std::vector<UnitPoint>;

void clamp_unit(UnitPoint &u) {
  for (auto &v : u)
    v = std::clamp(v, 0.0, 1.0);
}

// Evaluates unit points through the objective and tracks the incumbent.
class Run {
public:
  Run(Objective &objective, const OptimizerConfig &config)
      : objective_(objective), start_(objective.eval_count()), rng_(config.seed) {
    result_.algorithm = config.algorithm;
    result_.seed = config.seed;
    config.validate(objective.space().dimension());
  }

  std::size_t dim() const { return objective_.space().dimension(); }
  std::mt19937_64 &rng() { return rng_; }
  double uniform() { return unif_(rng_); }

  UnitPoint random_point() {
    UnitPoint u(dim());
    for (auto &v : u)
      v = uniform();
    return u;
  }

  // Infeasible designs score +inf; BudgetExhausted propagates.
  double fitness(UnitPoint &u) {
    clamp_unit(u);
    double v = 0.0;
    try {
      v = objective_.evaluate_unit(u);
    } catch (const InfeasibleGeometry &) {
      v = std::numeric_limits<double>::infinity();
    }
    if (!has_best_ || v < best_value_) {
      has_best_ = true;
      best_value_ = v;
      best_u_ = u;
    }
    return v;
  }

  void end_iteration(bool counts = true) {
    result_.history.push_back(best_value_);
    if (counts)
      ++result_.iterations_run;
  }

  OptimizationResult finish(bool exhausted) {
    result_.budget_exhausted = exhausted;
    if (has_best_) {
      result_.best_point = objective_.space().denormalize(best_u_);
      result_.best_value = best_value_;
      if (result_.history.empty() || result_.history.back() != best_value_)
        result_.history.push_back(best_value_);
    } else {
      result_.best_value = std::numeric_limits<double>::infinity();
    }
    result_.eval_count = objective_.eval_count() - start_;
    return result_;
  }

  Objective &objective() { return objective_; }

private:
  Objective &objective_;
  std::size_t start_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  OptimizationResult result_;
  bool has_best_ = false;
  double best_value_ = std::numeric_limits<double>::infinity();
  UnitPoint best_u_;
};

template <typename Body> OptimizationResult drive(Run &run, Body &&body) {
  try {
    body();
  } catch (const BudgetExhausted &) {
    return run.finish(true);
  }
  return run.finish(false);
}

std::size_t tournament(const std::vector<double> &fit, Run &run) {
  std::uniform_int_distribution<std::size_t> pick(0, fit.size() - 1);
  const std::size_t a = pick(run.rng());
  const std::size_t b = pick(run.rng());
  return fit[b] < fit[a] ? b : a;
}

} // namespace

OptimizationResult run_pso(Objective &objective, const OptimizerConfig &config) {
  Run run(objective, config);
  return drive(run, [&] {
    const std::size_t d = run.dim();
    const auto &p = config.pso;
    // velocity limit, as a fraction of each (unit) range
    constexpr double kMaxVelocity = 0.2;
    Population x(config.npop), v(config.npop, UnitPoint(d, 0.0)), pbest;
    std::vector<double> fx(config.npop), fbest;
    for (std::size_t i = 0; i < config.npop; ++i) {
      x[i] = run.random_point();
      fx[i] = run.fitness(x[i]);
    }
    pbest = x;
    fbest = fx;
    std::size_t g = static_cast<std::size_t>(std::min_element(fbest.begin(), fbest.end()) -
                                             fbest.begin());
    run.end_iteration(false);

    for (std::size_t t = 1; t <= config.maxit; ++t) {
      const double w = inertia_weight(t, config.maxit, p.w_min, p.w_max);
      for (std::size_t i = 0; i < config.npop; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          const double r1 = run.uniform(), r2 = run.uniform();
          double vel = w * v[i][k] + p.c1 * r1 * (pbest[i][k] - x[i][k]) +
                       p.c2 * r2 * (pbest[g][k] - x[i][k]);
          vel = std::clamp(vel, -kMaxVelocity, kMaxVelocity);
          double pos = x[i][k] + vel;
          // reflect the velocity of particles that hit a bound
          if (pos < 0.0 || pos > 1.0) {
            pos = std::clamp(pos, 0.0, 1.0);
            vel = -vel;
          }
          v[i][k] = vel;
          x[i][k] = pos;
        }
        fx[i] = run.fitness(x[i]);
        if (fx[i] < fbest[i]) {
          fbest[i] = fx[i];
          pbest[i] = x[i];
          if (fx[i] < fbest[g])
            g = i;
        }
      }
      run.end_iteration();
    }
  });
}

OptimizationResult run_de(Objective &objective, const OptimizerConfig &config) {
  Run run(objective, config);
  return drive(run, [&] {
    const std::size_t d = run.dim();
    const std::size_t np = config.npop;
    Population x(np);
    std::vector<double> fx(np);
    for (std::size_t i = 0; i < np; ++i) {
      x[i] = run.random_point();
      fx[i] = run.fitness(x[i]);
    }
    run.end_iteration(false);

    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    std::uniform_int_distribution<std::size_t> pick_dim(0, d - 1);
    for (std::size_t it = 0; it < config.maxit; ++it) {
      Population next = x;
      std::vector<double> fnext = fx;
      for (std::size_t i = 0; i < np; ++i) {
        std::size_t r1, r2, r3;
        do
          r1 = pick(run.rng());
        while (r1 == i);
        do
          r2 = pick(run.rng());
        while (r2 == i || r2 == r1);
        do
          r3 = pick(run.rng());
        while (r3 == i || r3 == r1 || r3 == r2);
        auto mutant = de_mutation(x[r1], x[r2], x[r3], config.de.f);
        clamp_unit(mutant);
        auto trial = de_crossover(x[i], mutant, config.de.p_crossover, pick_dim(run.rng()),
                                  run.rng());
        const double ft = run.fitness(trial);
        if (ft <= fx[i]) {
          next[i] = std::move(trial);
          fnext[i] = ft;
        }
      }
      x = std::move(next);
      fx = std::move(fnext);
      run.end_iteration();
    }
  });
}

OptimizationResult run_ga(Objective &objective, const OptimizerConfig &config) {
  Run run(objective, config);
  return drive(run, [&] {
    const std::size_t d = run.dim();
    const std::size_t np = config.npop;
    const auto &p = config.ga;
    const std::size_t n_children = ga_crossover_count(p.p_crossover, np);
    const std::size_t n_mutants = ga_mutation_count(p.p_mutation, np);

    Population x(np);
    std::vector<double> fx(np);
    for (std::size_t i = 0; i < np; ++i) {
      x[i] = run.random_point();
      fx[i] = run.fitness(x[i]);
    }
    run.end_iteration(false);

    std::normal_distribution<double> gauss(0.0, p.mutation_sigma);
    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    std::uniform_int_distribution<std::size_t> pick_dim(0, d - 1);
    for (std::size_t it = 0; it < config.maxit; ++it) {
      Population pool = x;
      std::vector<double> fpool = fx;

      for (std::size_t c = 0; c < n_children / 2; ++c) {
        const auto &a = x[tournament(fx, run)];
        const auto &b = x[tournament(fx, run)];
        UnitPoint c1(d), c2(d);
        for (std::size_t k = 0; k < d; ++k) {
          const double alpha = -p.blend_gamma + (1.0 + 2.0 * p.blend_gamma) * run.uniform();
          c1[k] = alpha * a[k] + (1.0 - alpha) * b[k];
          c2[k] = alpha * b[k] + (1.0 - alpha) * a[k];
        }
        for (auto *child : {&c1, &c2}) {
          const double f = run.fitness(*child);
          pool.push_back(std::move(*child));
          fpool.push_back(f);
        }
      }

      for (std::size_t m = 0; m < n_mutants; ++m) {
        UnitPoint y = x[pick(run.rng())];
        const std::size_t forced = pick_dim(run.rng());
        for (std::size_t k = 0; k < d; ++k)
          if (k == forced || run.uniform() < p.gene_rate)
            y[k] += gauss(run.rng());
        const double f = run.fitness(y);
        pool.push_back(std::move(y));
        fpool.push_back(f);
      }

      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fpool[a] < fpool[b]; });
      for (std::size_t i = 0; i < np; ++i) {
        x[i] = pool[order[i]];
        fx[i] = fpool[order[i]];
      }
      run.end_iteration();
    }
  });
}

OptimizationResult run_tlbo(Objective &objective, const OptimizerConfig &config) {
  Run run(objective, config);
  return drive(run, [&] {
    const std::size_t d = run.dim();
    const std::size_t np = config.npop;
    Population x(np);
    std::vector<double> fx(np);
    for (std::size_t i = 0; i < np; ++i) {
      x[i] = run.random_point();
      fx[i] = run.fitness(x[i]);
    }
    run.end_iteration(false);

    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    for (std::size_t it = 0; it < config.maxit; ++it) {
      // teacher phase
      const auto mean = population_mean(x);
      const std::size_t teacher =
          static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
      const UnitPoint teacher_x = x[teacher];
      for (std::size_t i = 0; i < np; ++i) {
        const int tf = teaching_factor(run.uniform());
        UnitPoint y = x[i];
        for (std::size_t k = 0; k < d; ++k)
          y[k] += run.uniform() * (teacher_x[k] - tf * mean[k]);
        const double fy = run.fitness(y);
        if (fy < fx[i]) {
          x[i] = std::move(y);
          fx[i] = fy;
        }
      }
      // learner phase
      for (std::size_t i = 0; i < np; ++i) {
        std::size_t j;
        do
          j = pick(run.rng());
        while (j == i);
        const double dir = fx[i] < fx[j] ? 1.0 : -1.0;
        UnitPoint y = x[i];
        for (std::size_t k = 0; k < d; ++k)
          y[k] += run.uniform() * dir * (x[i][k] - x[j][k]);
        const double fy = run.fitness(y);
        if (fy < fx[i]) {
          x[i] = std::move(y);
          fx[i] = fy;
        }
      }
      run.end_iteration();
    }
  });
}

OptimizationResult run_ego(Objective &objective, const OptimizerConfig &config) {
  Run run(objective, config);
  const auto &space = objective.space();
  const std::size_t d = space.dimension();
  const auto &p = config.ego;
  const std::size_t k0 = p.init_k ? p.init_k : 3 * d;
  if (k0 < 2)
    throw ConfigError("EGO needs at least two initial samples");
  if (const auto left = objective.remaining(); left && *left < k0 + 1)
    throw ConfigError("EGO needs a budget of at least " + std::to_string(k0 + 1) +
                      " evaluations");

  std::vector<UnitPoint> pts;
  std::vector<double> vals;
  std::vector<bool> feasible;
  std::set<UnitPoint> seen;

  // Trains on the coordinates actually evaluated (discrete values rounded).
  auto add = [&](const UnitPoint &raw) {
    UnitPoint u = space.normalize(space.denormalize(raw));
    if (!seen.insert(u).second)
      return false;
    const double v = run.fitness(u);
    pts.push_back(std::move(u));
    vals.push_back(v);
    feasible.push_back(std::isfinite(v));
    return true;
  };

  return drive(run, [&] {
    for (const auto &u : lhs_sample(d, k0, config.seed))
      add(u);
    run.end_iteration(false);

    for (std::size_t cycle = 0; cycle < config.maxit; ++cycle) {
      if (const auto left = objective.remaining(); left && *left == 0)
        throw BudgetExhausted("evaluation budget used up");
      // infeasible points enter the surrogate at the worst feasible value
      double y_min = std::numeric_limits<double>::infinity();
      double y_max = -y_min;
      for (std::size_t k = 0; k < vals.size(); ++k) {
        if (feasible[k]) {
          y_min = std::min(y_min, vals[k]);
          y_max = std::max(y_max, vals[k]);
        }
      }
      if (!std::isfinite(y_min))
        throw NumericalError("EGO found no feasible initial sample");
      std::vector<double> train = vals;
      for (std::size_t k = 0; k < train.size(); ++k)
        if (!feasible[k])
          train[k] = y_max;

      const auto model = fit_kriging_mle(pts, train, p.kernel_exponent, p.likelihood_budget * d);
      UnitFunction neg_ei = [&](std::span<const double> x) {
        return -expected_improvement(model, x, y_min);
      };
      const auto found = direct_minimize(neg_ei, d, p.ei_budget * d);
      const double max_ei = -found.best_value;
      const double scale = std::max({std::abs(y_min), y_max - y_min, 1e-12});
      if (!(max_ei >= p.ei_tol * scale))
        break;

      if (!add(found.best_point)) {
        UnitPoint nudged = found.best_point;
        for (auto &v : nudged)
          v = v + 1e-6 <= 1.0 ? v + 1e-6 : v - 1e-6;
        if (!add(nudged))
          break;
      }
      run.end_iteration();
    }
  });
}

OptimizationResult run_optimizer(Objective &objective, const OptimizerConfig &config) {
  switch (config.algorithm) {
  case Algorithm::PSO:
    return run_pso(objective, config);
  case Algorithm::DE:
    return run_de(objective, config);
  case Algorithm::GA:
    return run_ga(objective, config);
  case Algorithm::TLBO:
    return run_tlbo(objective, config);
  case Algorithm::EGO:
    return run_ego(objective, config);
  }
  throw ConfigError("unknown algorithm");
}

std::vector<ComparisonRow> run_comparison(const ObjectiveFactory &make_objective,
                                          const std::vector<OptimizerConfig> &configs,
                                          const std::vector<std::uint64_t> &seeds) {
  if (seeds.empty())
    throw ConfigError("comparison needs at least one seed");
  std::vector<ComparisonRow> rows;
  for (const auto &base : configs) {
    ComparisonRow row;
    row.algorithm = base.algorithm;
    std::vector<double> bests;
    for (auto seed : seeds) {
      auto cfg = base;
      cfg.seed = seed;
      auto objective = make_objective();
      auto res = run_optimizer(*objective, cfg);
      bests.push_back(res.best_value);
      if (row.runs_detail.empty() || res.best_value < row.best_run.best_value)
        row.best_run = res;
      row.runs_detail.push_back(std::move(res));
    }
    row.runs = bests.size();
    std::sort(bests.begin(), bests.end());
    const std::size_t m = bests.size();
    row.median_best = m % 2 ? bests[m / 2] : 0.5 * (bests[m / 2 - 1] + bests[m / 2]);
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace kghdmr
