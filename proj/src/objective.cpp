#include "kghdmr/objective.hpp"

#include "kghdmr/errors.hpp"
#include "kghdmr/heat_sink.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace kghdmr {

Objective::Objective(Problem problem, std::optional<std::size_t> max_evals)
    : problem_(std::move(problem)), max_evals_(max_evals) {
  if (!problem_.evaluator)
    throw ConfigError("objective '" + problem_.name + "' has no evaluator");
}

double Objective::evaluate(std::span<const double> p) {
  problem_.space.validate(p);
  std::vector<double> key(p.begin(), p.end());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++cache_hits_;
      return it->second;
    }
    if (max_evals_ && log_.size() + in_flight_ >= *max_evals_)
      throw BudgetExhausted("evaluation budget of " + std::to_string(*max_evals_) +
                            " exhausted for objective '" + problem_.name + "'");
    ++in_flight_;
  }

  double value = 0.0;
  try {
    value = problem_.evaluator(p);
  } catch (...) {
    std::lock_guard lock(mutex_);
    --in_flight_;
    throw;
  }

  std::lock_guard lock(mutex_);
  --in_flight_;
  // A concurrent caller may have finished the same point first.
  if (auto [it, inserted] = cache_.emplace(key, value); !inserted)
    return it->second;
  log_.push_back(SampleRecord{std::move(key), value, log_.size()});
  return value;
}

double Objective::evaluate_unit(std::span<const double> u) {
  const auto p = problem_.space.denormalize(u);
  return evaluate(p);
}

std::size_t Objective::eval_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::size_t Objective::cache_hits() const {
  std::lock_guard lock(mutex_);
  return cache_hits_;
}

std::optional<std::size_t> Objective::max_evals() const {
  std::lock_guard lock(mutex_);
  return max_evals_;
}

void Objective::set_max_evals(std::optional<std::size_t> max_evals) {
  std::lock_guard lock(mutex_);
  max_evals_ = max_evals;
}

std::optional<std::size_t> Objective::remaining() const {
  std::lock_guard lock(mutex_);
  if (!max_evals_)
    return std::nullopt;
  const auto used = log_.size() + in_flight_;
  return used >= *max_evals_ ? 0 : *max_evals_ - used;
}

std::vector<SampleRecord> Objective::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

void Objective::reset() {
  std::lock_guard lock(mutex_);
  cache_.clear();
  log_.clear();
  cache_hits_ = 0;
}

void Objective::write_csv(std::ostream &os) const {
  const auto records = log();
  const auto prec = os.precision(17);
  os << "seq";
  for (const auto &v : problem_.space.variables())
    os << ',' << v.name;
  os << ",response\n";
  for (const auto &rec : records) {
    os << rec.sequence_index;
    for (double x : rec.point)
      os << ',' << x;
    os << ',' << rec.response << '\n';
  }
  os.precision(prec);
}

namespace {

std::size_t dimension_param(const std::map<std::string, double> &params, std::size_t fallback) {
  auto it = params.find("dimension");
  if (it == params.end())
    return fallback;
  if (it->second < 1 || it->second != std::floor(it->second))
    throw ConfigError("benchmark parameter 'dimension' must be a positive integer");
  return static_cast<std::size_t>(it->second);
}

double param(const std::map<std::string, double> &params, const std::string &key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

DesignSpace box(std::size_t d, double lower, double upper) {
  std::vector<VariableSpec> vars;
  for (std::size_t i = 0; i < d; ++i)
    vars.push_back({"x" + std::to_string(i + 1), VariableKind::Continuous, lower, upper, ""});
  return DesignSpace(std::move(vars));
}

void check_params(const std::string &name, const std::map<std::string, double> &params,
                  std::initializer_list<const char *> allowed) {
  for (const auto &[key, _] : params) {
    bool ok = false;
    for (const char *a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ConfigError("benchmark '" + name + "' does not take parameter '" + key + "'");
  }
}

} // namespace

std::vector<BenchmarkInfo> list_benchmarks() {
  return {
      {"sphere", "sum of x_i^2 on [-1,1]^d", 2},
      {"linear", "sum of x_i on [0,1]^d", 3},
      {"product", "x1*x2 on [0,1]^2", 2},
      {"product_plus", "x1*x2 + x3 on [0,1]^3", 3},
      {"additive", "sin(x1) + x2^2 on [0,1]^2", 2},
      {"additive_mixed", "sin(x1) + x2^2 + 3*x3 on [-2,2]^3", 3},
      {"ishigami", "sin x1 + a sin^2 x2 + b x3^4 sin x1 on [-pi,pi]^3 (a=7, b=0.1)", 3},
      {"forrester", "(6x-2)^2 sin(12x-4) on [0,1]", 1},
      {"heat_sink", "lumped pin-fin heat-sink demo: max base temperature, deg C", 10},
  };
}

Problem make_benchmark(const std::string &name, const std::map<std::string, double> &params) {
  if (name == "sphere") {
    check_params(name, params, {"dimension", "lower", "upper"});
    const auto d = dimension_param(params, 2);
    return {name, box(d, param(params, "lower", -1.0), param(params, "upper", 1.0)),
            [](std::span<const double> x) {
              double s = 0.0;
              for (double v : x)
                s += v * v;
              return s;
            }};
  }
  if (name == "linear") {
    check_params(name, params, {"dimension"});
    return {name, box(dimension_param(params, 3), 0.0, 1.0), [](std::span<const double> x) {
              double s = 0.0;
              for (double v : x)
                s += v;
              return s;
            }};
  }
  if (name == "product") {
    check_params(name, params, {});
    return {name, box(2, 0.0, 1.0), [](std::span<const double> x) { return x[0] * x[1]; }};
  }
  if (name == "product_plus") {
    check_params(name, params, {});
    return {name, box(3, 0.0, 1.0),
            [](std::span<const double> x) { return x[0] * x[1] + x[2]; }};
  }
  if (name == "additive") {
    check_params(name, params, {});
    return {name, box(2, 0.0, 1.0),
            [](std::span<const double> x) { return std::sin(x[0]) + x[1] * x[1]; }};
  }
  if (name == "additive_mixed") {
    check_params(name, params, {});
    return {name, box(3, -2.0, 2.0), [](std::span<const double> x) {
              return std::sin(x[0]) + x[1] * x[1] + 3.0 * x[2];
            }};
  }
  if (name == "ishigami") {
    check_params(name, params, {"a", "b"});
    const double a = param(params, "a", 7.0);
    const double b = param(params, "b", 0.1);
    return {name, box(3, -std::numbers::pi, std::numbers::pi),
            [a, b](std::span<const double> x) {
              const double s2 = std::sin(x[1]);
              const double x3 = x[2];
              return std::sin(x[0]) + a * s2 * s2 + b * x3 * x3 * x3 * x3 * std::sin(x[0]);
            }};
  }
  if (name == "forrester") {
    check_params(name, params, {});
    return {name, box(1, 0.0, 1.0), [](std::span<const double> x) {
              const double t = 6.0 * x[0] - 2.0;
              return t * t * std::sin(12.0 * x[0] - 4.0);
            }};
  }
  if (name == "heat_sink") {
    const bool structural = param(params, "structural_only", 0.0) != 0.0;
    auto rest = params;
    rest.erase("structural_only");
    auto constants = heat_sink::ModelConstants::from_params(rest);
    return heat_sink::make_problem(
        structural ? heat_sink::structural_design_space() : heat_sink::full_design_space(),
        constants);
  }
  throw ConfigError("unknown benchmark '" + name + "'");
}

} // namespace kghdmr
