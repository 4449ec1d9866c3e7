#pragma once

#include "kghdmr/design_space.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kghdmr {

using Evaluator = std::function<double(std::span<const double>)>;

/// A named black-box function over a design space. Value type; the
/// evaluation bookkeeping lives in Objective.
struct Problem {
  std::string name;
  DesignSpace space;
  Evaluator evaluator;
};

struct SampleRecord {
  DesignPoint point;
  double response = 0.0;
  std::size_t sequence_index = 0;
};

/// Budgeted, caching wrapper around a Problem.
///
/// Every distinct point is evaluated once; repeated points are served from
/// the cache and do not consume budget. Safe to call from several threads:
/// budget slots are reserved under a lock before the evaluator runs.
class Objective {
public:
  explicit Objective(Problem problem, std::optional<std::size_t> max_evals = std::nullopt);

  Objective(const Objective &) = delete;
  Objective &operator=(const Objective &) = delete;

  const std::string &name() const noexcept { return problem_.name; }
  const DesignSpace &space() const noexcept { return problem_.space; }
  const Problem &problem() const noexcept { return problem_; }

  /// Validates p, then returns the cached or freshly computed response.
  /// Throws BudgetExhausted when a new evaluation would exceed max_evals.
  double evaluate(std::span<const double> p);
  /// Denormalizes (and rounds) a unit-cube point before evaluating.
  double evaluate_unit(std::span<const double> u);

  std::size_t eval_count() const;
  std::size_t cache_hits() const;
  std::optional<std::size_t> max_evals() const;
  void set_max_evals(std::optional<std::size_t> max_evals);
  /// Remaining evaluations, or nullopt when unbounded.
  std::optional<std::size_t> remaining() const;

  std::vector<SampleRecord> log() const;
  /// Drops log, cache and counters; keeps the budget setting.
  void reset();

  /// Header `seq,<names...>,response`, one record per line.
  void write_csv(std::ostream &os) const;

private:
  Problem problem_;
  std::optional<std::size_t> max_evals_;

  mutable std::mutex mutex_;
  std::map<std::vector<double>, double> cache_;
  std::vector<SampleRecord> log_;
  std::size_t in_flight_ = 0;
  std::size_t cache_hits_ = 0;
};

/// Built-in analytic benchmarks.
struct BenchmarkInfo {
  std::string name;
  std::string description;
  std::size_t default_dimension;
};

std::vector<BenchmarkInfo> list_benchmarks();

/// Builds a benchmark (or the heat-sink demo) by name. `params` holds
/// optional numeric settings such as "dimension", "a", "b".
Problem make_benchmark(const std::string &name, const std::map<std::string, double> &params = {});

} // namespace kghdmr
