#include "doctest.h"

#include "kghdmr/errors.hpp"
#include "kghdmr/objective.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <thread>

using namespace kghdmr;

TEST_CASE("benchmark spot values") {
  using std::numbers::pi;
  Objective sphere(make_benchmark("sphere", {{"dimension", 4}}));
  CHECK(sphere.evaluate(std::vector<double>{0, 0, 0, 0}) == 0.0);
  CHECK(sphere.evaluate(std::vector<double>{1, -1, 0.5, 0}) == 2.25);

  Objective ishigami(make_benchmark("ishigami"));
  CHECK(ishigami.evaluate(std::vector<double>{pi / 2, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  // sin(1) + 7 sin^2(2) + 0.1 * 3^4 sin(1)
  const double expected = std::sin(1.0) + 7 * std::pow(std::sin(2.0), 2) + 0.1 * 81 * std::sin(1.0);
  CHECK(ishigami.evaluate(std::vector<double>{1, 2, 3}) == doctest::Approx(expected).epsilon(1e-14));

  Objective product(make_benchmark("product"));
  CHECK(product.evaluate(std::vector<double>{1, 1}) == 1.0);
  CHECK(product.evaluate(std::vector<double>{0.5, 0.5}) == 0.25);

  Objective forrester(make_benchmark("forrester"));
  CHECK(forrester.evaluate(std::vector<double>{0.5}) == doctest::Approx(std::sin(2.0)));

  Objective mixed(make_benchmark("additive_mixed"));
  CHECK(mixed.evaluate(std::vector<double>{1, -2, 2}) ==
        doctest::Approx(std::sin(1.0) + 4 + 6).epsilon(1e-15));
}

TEST_CASE("benchmark parameters") {
  const auto p = make_benchmark("sphere", {{"dimension", 3}, {"lower", -5}, {"upper", 5}});
  CHECK(p.space.dimension() == 3);
  CHECK(p.space[2].lower == -5.0);
  const auto ish = make_benchmark("ishigami", {{"a", 5}, {"b", 0}});
  CHECK(ish.evaluator(std::vector<double>{0, std::numbers::pi / 2, 3}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(make_benchmark("sphere", {{"dim", 3}}), ConfigError);
  CHECK_THROWS_AS(make_benchmark("sphere", {{"dimension", 0}}), ConfigError);
  CHECK_THROWS_AS(make_benchmark("sphere", {{"dimension", 2.5}}), ConfigError);
  CHECK_THROWS_AS(make_benchmark("rosenbrock"), ConfigError);
  CHECK_THROWS_AS(make_benchmark("heat_sink", {{"bogus", 1}}), ConfigError);
  CHECK(make_benchmark("heat_sink").space.dimension() == 10);
  CHECK(make_benchmark("heat_sink", {{"structural_only", 1}}).space.dimension() == 7);
}

TEST_CASE("every listed benchmark builds and is pure") {
  const auto list = list_benchmarks();
  CHECK(list.size() >= 5);
  for (const auto &b : list) {
    CAPTURE(b.name);
    const auto p = make_benchmark(b.name);
    CHECK(p.space.dimension() == b.default_dimension);
    const auto c = p.space.center();
    const double a = p.evaluator(c), again = p.evaluator(c);
    CHECK(std::memcmp(&a, &again, sizeof a) == 0);
  }
}

TEST_CASE("evaluation log, counter and sequence indices") {
  Objective obj(make_benchmark("linear", {{"dimension", 2}}));
  obj.evaluate(std::vector<double>{0.1, 0.2});
  obj.evaluate(std::vector<double>{0.3, 0.4});
  obj.evaluate(std::vector<double>{0.1, 0.2});
  CHECK(obj.eval_count() == 2);
  CHECK(obj.cache_hits() == 1);
  const auto log = obj.log();
  REQUIRE(log.size() == 2);
  CHECK(log[0].sequence_index < log[1].sequence_index);
  CHECK(log[1].response == doctest::Approx(0.7));
  CHECK(obj.evaluate_unit(std::vector<double>{0.3, 0.4}) == doctest::Approx(0.7));
  CHECK(obj.eval_count() == 2);
}

TEST_CASE("budget is enforced and cache hits are free") {
  Objective obj(make_benchmark("sphere"), 2);
  obj.evaluate(std::vector<double>{0.1, 0.1});
  obj.evaluate(std::vector<double>{0.2, 0.1});
  CHECK(obj.remaining() == 0u);
  CHECK_THROWS_AS(obj.evaluate(std::vector<double>{0.3, 0.1}), BudgetExhausted);
  CHECK_NOTHROW(obj.evaluate(std::vector<double>{0.1, 0.1}));
  CHECK(obj.eval_count() == 2);
  obj.set_max_evals(3);
  CHECK_NOTHROW(obj.evaluate(std::vector<double>{0.3, 0.1}));
  obj.reset();
  CHECK(obj.eval_count() == 0);
  CHECK(obj.max_evals() == 3u);
}

TEST_CASE("invalid points are rejected before evaluation") {
  Objective obj(make_benchmark("sphere"));
  CHECK_THROWS_AS(obj.evaluate(std::vector<double>{2, 0}), BoundsError);
  CHECK_THROWS_AS(obj.evaluate(std::vector<double>{0}), ConfigError);
  CHECK(obj.eval_count() == 0);
}

TEST_CASE("a throwing evaluator gives its budget slot back") {
  DesignSpace space({{"x", VariableKind::Continuous, 0, 1, ""}});
  Problem p{"picky", space, [](std::span<const double> x) -> double {
              if (x[0] > 0.5)
                throw InfeasibleGeometry("too big");
              return x[0];
            }};
  Objective obj(p, 1);
  CHECK_THROWS_AS(obj.evaluate(std::vector<double>{0.9}), InfeasibleGeometry);
  CHECK(obj.eval_count() == 0);
  CHECK(obj.remaining() == 1u);
  CHECK(obj.evaluate(std::vector<double>{0.25}) == 0.25);
}

TEST_CASE("concurrent evaluation loses no increments and never overshoots the budget") {
  Objective obj(make_benchmark("sphere", {{"dimension", 1}}), 500);
  std::atomic<int> refused{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int k = 0; k < 100; ++k) {
        try {
          obj.evaluate(std::vector<double>{-1.0 + (t * 100 + k) / 1000.0});
        } catch (const BudgetExhausted &) {
          ++refused;
        }
      }
    });
  for (auto &th : threads)
    th.join();
  CHECK(obj.eval_count() == 500);
  CHECK(refused.load() == 300);
  const auto log = obj.log();
  for (std::size_t k = 0; k < log.size(); ++k)
    CHECK(log[k].sequence_index == k);
}

TEST_CASE("CSV log format") {
  Objective obj(make_benchmark("product"));
  obj.evaluate(std::vector<double>{0.5, 0.25});
  std::ostringstream os;
  obj.write_csv(os);
  CHECK(os.str() == "seq,x1,x2,response\n0,0.5,0.25,0.125\n");
}
