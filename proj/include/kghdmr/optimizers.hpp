#pragma once

#include "kghdmr/design_space.hpp"
#include "kghdmr/kriging.hpp"
#include "kghdmr/objective.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kghdmr {

enum class Algorithm { PSO, DE, GA, TLBO, EGO };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

struct PsoParams {
  double w_min = 0.4;
  double w_max = 1.0;
  double c1 = 1.5;
  double c2 = 2.0;
};

struct DeParams {
  double f = 0.8;
  double p_crossover = 0.45;
};

struct GaParams {
  double p_crossover = 0.4;
  double p_mutation = 0.8;
  // Gaussian mutation step, fraction of each variable's range
  double mutation_sigma = 0.1;
  // per-gene mutation probability; at least one gene always mutates
  double gene_rate = 0.2;
  // blend crossover extends each parent interval by this fraction on both sides
  double blend_gamma = 0.1;
};

struct EgoParams {
  // initial Latin hypercube size; 0 selects 3 * dimension
  std::size_t init_k = 0;
  // DIRECT evaluations per dimension spent maximizing EI each cycle
  std::size_t ei_budget = 200;
  // stop when max EI < ei_tol * max(|y_min|, y range)
  double ei_tol = 1e-9;
  // DIRECT evaluations per dimension for the likelihood search
  std::size_t likelihood_budget = 50;
  int kernel_exponent = 2;
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::PSO;
  // generations, or EGO infill cycles
  std::size_t maxit = 40;
  std::size_t npop = 15;
  std::uint64_t seed = 0;
  PsoParams pso;
  DeParams de;
  GaParams ga;
  EgoParams ego;

  void validate(std::size_t dimension) const;
};

struct OptimizationResult {
  Algorithm algorithm = Algorithm::PSO;
  std::uint64_t seed = 0;
  DesignPoint best_point;
  double best_value = 0.0;
  // best value after initialization and after every iteration
  std::vector<double> history;
  std::size_t eval_count = 0;
  std::size_t iterations_run = 0;
  bool budget_exhausted = false;
};

// Building blocks, exposed for testing.
double inertia_weight(std::size_t t, std::size_t maxit, double w_min, double w_max);
std::vector<double> de_mutation(std::span<const double> x_r1, std::span<const double> x_r2,
                                std::span<const double> x_r3, double f);
std::vector<double> de_crossover(std::span<const double> parent, std::span<const double> mutant,
                                 double p_crossover, std::size_t k_rand, std::mt19937_64 &rng);
std::size_t ga_crossover_count(double p_crossover, std::size_t npop);
std::size_t ga_mutation_count(double p_mutation, std::size_t npop);
std::vector<double> population_mean(const std::vector<std::vector<double>> &population);
/// round(1 + u) for u in [0, 1).
int teaching_factor(double u);

/// Closed-form expected improvement; 0 when sigma is 0.
double expected_improvement(double mean, double sigma, double y_min);
double expected_improvement(const KrigingModel &model, std::span<const double> x, double y_min);

OptimizationResult run_pso(Objective &objective, const OptimizerConfig &config);
OptimizationResult run_de(Objective &objective, const OptimizerConfig &config);
OptimizationResult run_ga(Objective &objective, const OptimizerConfig &config);
OptimizationResult run_tlbo(Objective &objective, const OptimizerConfig &config);
OptimizationResult run_ego(Objective &objective, const OptimizerConfig &config);
OptimizationResult run_optimizer(Objective &objective, const OptimizerConfig &config);

struct ComparisonRow {
  Algorithm algorithm = Algorithm::PSO;
  std::size_t runs = 0;
  double median_best = 0.0;
  // the best run over all seeds
  OptimizationResult best_run;
  std::vector<OptimizationResult> runs_detail;
};

using ObjectiveFactory = std::function<std::unique_ptr<Objective>()>;

/// Runs every config once per seed, each run on a fresh Objective.
std::vector<ComparisonRow> run_comparison(const ObjectiveFactory &make_objective,
                                          const std::vector<OptimizerConfig> &configs,
                                          const std::vector<std::uint64_t> &seeds);

} // namespace kghdmr
