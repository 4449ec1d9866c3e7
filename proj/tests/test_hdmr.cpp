#include "doctest.h"

#include "kghdmr/errors.hpp"
#include "kghdmr/hdmr.hpp"

#include <cmath>
#include <numbers>

using namespace kghdmr;

namespace {

Problem unit_problem(std::size_t n, Evaluator f, double lo = 0.0, double hi = 1.0) {
  std::vector<VariableSpec> vars;
  for (std::size_t i = 0; i < n; ++i)
    vars.push_back({"x" + std::to_string(i + 1), VariableKind::Continuous, lo, hi, ""});
  return {"test", DesignSpace(vars), std::move(f)};
}

double max_grid_error(const HdmrModel &m, const Evaluator &f, double lo, double hi, int grid,
                      double *range_out = nullptr) {
  double worst = 0.0, fmin = 1e300, fmax = -1e300;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      const std::vector<double> p{lo + (hi - lo) * a / (grid - 1), lo + (hi - lo) * b / (grid - 1)};
      const double y = f(p);
      fmin = std::min(fmin, y);
      fmax = std::max(fmax, y);
      worst = std::max(worst, std::abs(m.predict(p) - y));
    }
  if (range_out)
    *range_out = fmax - fmin;
  return worst;
}

} // namespace

TEST_CASE("f0 is the response at the center") {
  Objective sphere(unit_problem(2, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, -1, 1));
  HdmrBuilder b(sphere, {});
  CHECK(b.eval_center() == 0.0);

  Objective prod(unit_problem(2, [](std::span<const double> x) { return x[0] * x[1]; }));
  HdmrBuilder c(prod, {});
  CHECK(c.eval_center() == 0.25);
  CHECK(prod.eval_count() == 1);
  CHECK(c.eval_center() == 0.25);
  CHECK(prod.eval_count() == 1);
}

TEST_CASE("steps must run in order") {
  Objective obj(unit_problem(2, [](std::span<const double> x) { return x[0]; }));
  HdmrBuilder b(obj, {});
  CHECK_THROWS_AS(b.build_first_order(0), ConfigError);
  b.eval_center();
  CHECK_THROWS_AS(b.build_first_order(2), ConfigError);
  CHECK_THROWS_AS(b.coupling_existence_test(), ConfigError);
  b.build_first_order(0);
  CHECK_THROWS_AS(b.build_second_order(0, 1), ConfigError);
  b.build_first_order(1);
  CHECK_THROWS_AS(b.build_second_order(1, 1), ConfigError);
}

TEST_CASE("linear sum: every term linear, no couplings, exact prediction") {
  auto f = [](std::span<const double> x) { return x[0] + 2 * x[1] - 3 * x[2]; };
  Objective obj(unit_problem(3, f));
  const auto m = build_hdmr(obj, {});
  CHECK(m.linear_flags() == std::vector<bool>{true, true, true});
  CHECK(m.couplings.empty());
  for (const auto &term : m.first_order) {
    CHECK_FALSE(term.model.has_value());
    CHECK(term(term.anchor) == 0.0);
  }
  CHECK(m.predict(std::vector<double>{0.1, 0.7, 0.33}) == doctest::Approx(f(std::vector<double>{0.1, 0.7, 0.33})));
  CHECK(m.total_samples == obj.eval_count());
}

TEST_CASE("quadratic first-order term converges and is anchored") {
  auto f = [](std::span<const double> x) { return x[0] * x[0] + 0.5 * x[1]; };
  Objective obj(unit_problem(2, f, -1, 1));
  HdmrBuilder b(obj, {});
  b.eval_center();
  const auto &t0 = b.build_first_order(0);
  CHECK_FALSE(t0.linear);
  REQUIRE(t0.model.has_value());
  CHECK(t0(t0.anchor) == 0.0);
  for (const auto &s : t0.samples)
    CHECK(t0(s.t) == doctest::Approx(s.value).epsilon(1e-6).scale(1.0));
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0, x = -1 + 2 * t;
    CHECK(std::abs(t0(t) - x * x) <= 0.01);
  }
  const auto &t1 = b.build_first_order(1);
  CHECK(t1.linear);
  CHECK(t1(1.0) == doctest::Approx(0.5));
}

TEST_CASE("linearity test") {
  BuildConfig cfg;
  const std::vector<CutSample> line{{0.0, -1.0}, {0.5, 0.0}, {1.0, 1.0}, {1.0 / 6, -2.0 / 3}};
  CHECK(linearity_test(line, 3.0, cfg));
  const std::vector<CutSample> bump{{0.0, 0.0}, {0.5, 0.0}, {0.8, 1.0}, {1.0, 0.0}};
  CHECK_FALSE(linearity_test(bump, 3.0, cfg));
  // within tolerance of max(|f0|, range)
  const std::vector<CutSample> almost{{0.0, 0.0}, {0.5, 0.0}, {0.7, 0.5}, {1.0, 0.0}};
  CHECK(linearity_test(almost, 100.0, cfg));
  CHECK_FALSE(linearity_test(almost, 10.0, cfg));
  const std::vector<CutSample> open{{0.0, 0.0}, {0.5, 0.0}};
  CHECK_THROWS_AS(linearity_test(open, 1.0, cfg), ConfigError);

  cfg.literal_linearity = true;
  CHECK(linearity_test(std::vector<CutSample>{{0.0, 5.0}, {0.5, 0.001}, {1.0, -5.0}}, 1.0, cfg));
  CHECK_FALSE(linearity_test(std::vector<CutSample>{{0.0, 5.0}, {0.5, 0.1}, {1.0, -5.0}}, 1.0, cfg));
  CHECK_FALSE(linearity_test(std::vector<CutSample>{{0.0, 0.0}, {0.5, 1e-300}, {1.0, 0.0}}, 0.0, cfg));
}

TEST_CASE("coupling existence") {
  Objective additive(unit_problem(2, [](std::span<const double> x) {
    return x[0] * x[0] + std::sin(3 * x[1]);
  }));
  HdmrBuilder a(additive, {});
  a.eval_center();
  a.build_first_order(0);
  a.build_first_order(1);
  CHECK_FALSE(a.coupling_existence_test());
  CHECK(a.identify_coupled_pairs().empty());

  Objective prod(unit_problem(3, [](std::span<const double> x) { return x[0] * x[1] + x[2]; }));
  HdmrBuilder p(prod, {});
  p.eval_center();
  for (std::size_t i = 0; i < 3; ++i)
    p.build_first_order(i);
  CHECK(p.coupling_existence_test());
  using Pair = std::pair<std::size_t, std::size_t>;
  CHECK(p.identify_coupled_pairs() == std::vector<Pair>{{0, 1}});
}

TEST_CASE("product: second-order residual") {
  auto f = [](std::span<const double> x) { return x[0] * x[1]; };
  Objective obj(unit_problem(2, f));
  const auto m = build_hdmr(obj, {});
  CHECK(m.f0 == 0.25);
  CHECK(m.linear_flags() == std::vector<bool>{true, true});
  REQUIRE(m.couplings.size() == 1);
  const auto *c = m.coupling(1, 0);
  REQUIRE(c != nullptr);
  // 1 - (0.25 + 0.25 + 0.25)
  CHECK((*c)(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK((*c)(0.5, 0.9) == 0.0);
  CHECK((*c)(0.2, 0.5) == 0.0);
  CHECK(m.predict(std::vector<double>{1.0, 0.0}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(m.predict(std::vector<double>{0.0, 0.0}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  double range = 0.0;
  const double err = max_grid_error(m, f, 0, 1, 21, &range);
  CHECK(err <= 0.01 * range);
}

TEST_CASE("smooth coupled function over a 21 x 21 grid") {
  auto f = [](std::span<const double> x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + x[0] * x[1] + x[1] * x[1] * x[1];
  };
  Objective obj(unit_problem(2, f));
  const auto m = build_hdmr(obj, {});
  double range = 0.0;
  const double err = max_grid_error(m, f, 0, 1, 21, &range);
  CHECK(err <= 0.01 * range);
  CHECK(m.total_samples == obj.eval_count());
  CHECK(m.coupled_pairs().size() == 1);
}

TEST_CASE("builds are reproducible") {
  auto f = [](std::span<const double> x) { return std::sin(3 * x[0]) * x[1] + x[2] * x[2]; };
  Objective a(unit_problem(3, f)), b(unit_problem(3, f));
  const auto ma = build_hdmr(a, {});
  const auto mb = build_hdmr(b, {});
  const auto la = a.log(), lb = b.log();
  REQUIRE(la.size() == lb.size());
  for (std::size_t k = 0; k < la.size(); ++k) {
    CHECK(la[k].point == lb[k].point);
    CHECK(la[k].response == lb[k].response);
  }
  const std::vector<double> p{0.3, 0.4, 0.5};
  CHECK(ma.predict(p) == mb.predict(p));
}

TEST_CASE("budget exhaustion keeps the samples") {
  Objective obj(make_benchmark("ishigami"), 6);
  try {
    build_hdmr(obj, {});
    FAIL("expected PartialModelError");
  } catch (const PartialModelError &e) {
    CHECK(e.samples().size() == 6);
    CHECK(obj.eval_count() == 6);
  }
  // also catchable as the generic budget error
  Objective again(make_benchmark("ishigami"), 3);
  CHECK_THROWS_AS(build_hdmr(again, {}), BudgetExhausted);
}

TEST_CASE("build config validation") {
  BuildConfig c;
  CHECK_NOTHROW(c.validate());
  c.kernel_exponent = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.convergence_rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.probes_per_test = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("discrete variables are sampled on their levels") {
  std::vector<VariableSpec> vars{{"n", VariableKind::DiscreteInteger, 1, 6, ""},
                                 {"x", VariableKind::Continuous, 0, 1, ""}};
  Objective obj({"d", DesignSpace(vars), [](std::span<const double> p) { return p[0] * p[0] + p[1]; }});
  const auto m = build_hdmr(obj, {});
  for (const auto &r : obj.log())
    CHECK(r.point[0] == std::round(r.point[0]));
  for (double n = 1; n <= 6; ++n)
    CHECK(m.predict(std::vector<double>{n, 0.5}) == doctest::Approx(n * n + 0.5).epsilon(0.01));
  CHECK(m.couplings.empty());
}
