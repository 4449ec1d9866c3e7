// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include "kghdmr/cli.hpp"
#include "kghdmr/errors.hpp"
#include "kghdmr/gsa.hpp"
#include "kghdmr/hdmr.hpp"
#include "kghdmr/heat_sink.hpp"
#include "kghdmr/kriging.hpp"
#include "kghdmr/objective.hpp"
#include "kghdmr/optimizers.hpp"
#include "kghdmr/persistence.hpp"
#include "kghdmr/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace kghdmr;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void expect(Outcome &o, bool cond, const std::string &msg) {
  if (!cond) {
    if (o.pass)
      o.detail = msg;
    o.pass = false;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome geometry() {
  Outcome o;
  const double L = 70.0, W = 30.0;
  std::size_t checked = 0;
  for (int ml = 2; ml <= 15; ++ml)
    for (int mw = 2; mw <= 5; ++mw)
      for (int n = 3; n <= 10; ++n)
        for (int k = 0; k <= 100; ++k) {
          heat_sink::Geometry g;
          g.m_l = ml;
          g.m_w = mw;
          g.n_sides = n;
          g.r = 1.0 + 0.01 * k;
          const double rows = 2.0 * mw - 1.0;
          const double dl = (L - 2.0 * ml * g.r) / ml;
          const double dw = (W - 2.0 * rows * g.r) / rows;
          if (dl > 0) {
            expect(o, std::abs(heat_sink::fin_spacing_length(g) - dl) <= 1e-12 * L,
                   "d_l mismatch at m_l=" + std::to_string(ml));
          } else {
            bool threw = false;
            try {
              heat_sink::fin_spacing_length(g);
            } catch (const InfeasibleGeometry &) {
              threw = true;
            }
            expect(o, threw, "infeasible d_l accepted");
          }
          if (dw > 0) {
            expect(o, std::abs(heat_sink::fin_spacing_width(g) - dw) <= 1e-12 * W,
                   "d_w mismatch at m_w=" + std::to_string(mw));
          } else {
            bool threw = false;
            try {
              heat_sink::fin_spacing_width(g);
            } catch (const InfeasibleGeometry &) {
              threw = true;
            }
            expect(o, threw, "infeasible d_w accepted");
          }
          ++checked;
        }
  heat_sink::Geometry g;
  g.m_l = 7;
  g.m_w = 3;
  g.r = 1.5;
  expect(o, heat_sink::fin_spacing_length(g) == 7.0, "d_l(7, 1.5) != 7.0");
  expect(o, heat_sink::fin_spacing_width(g) == 3.0, "d_w(3, 1.5) != 3.0");
  if (o.pass)
    o.detail = std::to_string(checked) + " grid points, spot values exact";
  return o;
}

Outcome kriging_interpolation() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_res = 0.0, worst_var = 0.0;
  for (int set = 0; set < 50; ++set) {
    std::vector<UnitPoint> pts(10, UnitPoint(3));
    std::vector<double> y(10);
    const double a = 1 + 4 * u(rng), b = 10 * u(rng), c = u(rng);
    for (std::size_t k = 0; k < 10; ++k) {
      for (auto &x : pts[k])
        x = u(rng);
      y[k] = a * std::sin(4 * pts[k][0]) + b * pts[k][1] * pts[k][2] + c;
    }
    const auto model = fit_kriging_mle(pts, y, set % 2 ? 1 : 2);
    for (std::size_t k = 0; k < 10; ++k) {
      const double res = std::abs(model.predict_mean(pts[k]) - y[k]) / (1 + std::abs(y[k]));
      worst_res = std::max(worst_res, res);
      worst_var = std::max(worst_var, model.predict_variance(pts[k]));
    }
  }
  expect(o, worst_res <= 1e-6, "relative residual " + fmt(worst_res));
  expect(o, worst_var <= 1e-8, "variance " + fmt(worst_var));
  if (o.pass)
    o.detail = "max residual " + fmt(worst_res) + ", max variance " + fmt(worst_var);
  return o;
}

Outcome additive_identification() {
  Outcome o;
  Objective obj(make_benchmark("additive_mixed"));
  const auto model = build_hdmr(obj, BuildConfig{});
  const auto flags = model.linear_flags();
  expect(o, flags[2], "x3 not flagged linear");
  expect(o, !flags[0] && !flags[1], "x1 or x2 flagged linear");
  expect(o, model.coupled_pairs().empty(),
         std::to_string(model.coupled_pairs().size()) + " couplings found");
  const auto &space = obj.space();
  std::vector<double> truth, pred;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      for (int c = 0; c < 10; ++c) {
        DesignPoint p(3);
        const int idx[3] = {a, b, c};
        for (int d = 0; d < 3; ++d)
          p[d] = space[d].lower + (space[d].upper - space[d].lower) * idx[d] / 9.0;
        truth.push_back(std::sin(p[0]) + p[1] * p[1] + 3 * p[2]);
        pred.push_back(model.predict(p));
      }
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  double worst = 0;
  for (std::size_t k = 0; k < truth.size(); ++k)
    worst = std::max(worst, std::abs(truth[k] - pred[k]));
  const double rel = worst / (*hi - *lo);
  expect(o, rel <= 0.01, "grid error " + fmt(100 * rel) + "% of range");
  if (o.pass)
    o.detail = "x3 linear, no couplings, grid error " + fmt(100 * rel) + "% of range, " +
               std::to_string(obj.eval_count()) + " evaluations";
  return o;
}

Outcome coupling_detection() {
  Outcome o;
  {
    Objective obj(make_benchmark("product_plus"));
    const auto model = build_hdmr(obj, BuildConfig{});
    const auto pairs = model.coupled_pairs();
    expect(o, pairs.size() == 1 && pairs[0] == std::pair<std::size_t, std::size_t>{0, 1},
           "x1*x2+x3: wrong coupled set");
  }
  Objective obj(make_benchmark("ishigami"));
  const auto model = build_hdmr(obj, BuildConfig{});
  const auto pairs = model.coupled_pairs();
  expect(o, pairs.size() == 1 && pairs[0] == std::pair<std::size_t, std::size_t>{0, 2},
         "Ishigami: wrong coupled set (" + std::to_string(pairs.size()) + " pairs)");
  const double s1 = sensitivity_coefficient(model, 0);
  const double s2 = sensitivity_coefficient(model, 1);
  const double s3 = sensitivity_coefficient(model, 2);
  const double c13 = coupling_coefficient(model, 0, 2);
  const double pi4 = std::pow(std::numbers::pi, 4);
  expect(o, s2 > s1 && s1 > s3, "s ranking");
  expect(o, std::abs(s2 - 7.0) <= 0.05 * 7.0, "s_2 = " + fmt(s2));
  expect(o, std::abs(s1 - 2.0) <= 0.05 * 2.0, "s_1 = " + fmt(s1));
  expect(o, std::abs(c13 - 0.2 * pi4) <= 0.05 * 0.2 * pi4, "c_13 = " + fmt(c13));
  if (o.pass)
    o.detail = "s = (" + fmt(s1) + ", " + fmt(s2) + ", " + fmt(s3) + "), c_13 = " + fmt(c13) +
               ", " + std::to_string(obj.eval_count()) + " evaluations";
  return o;
}

Outcome screening() {
  Outcome o;
  SensitivityReport r;
  r.names = {"a", "b", "c"};
  r.c = {{0, 0.8, 0.8}, {0.8, 0, 2.5}, {0.8, 2.5, 0}};
  r.screened_c = r.c;
  const auto s = screen(r, 1.0, {"c"});
  expect(o, s.screened_c[0][1] == 0.0 && s.screened_c[1][0] == 0.0, "non-exempt 0.8 kept");
  expect(o, s.screened_c[0][2] == 0.8 && s.screened_c[2][0] == 0.8, "exempt 0.8 zeroed");
  expect(o, s.screened_c[1][2] == 2.5, "2.5 zeroed");
  expect(o, s.c[0][1] == 0.8, "raw coefficients altered");
  const auto twice = screen(s, 1.0, {"c"});
  expect(o, twice.screened_c == s.screened_c, "not idempotent");
  if (o.pass)
    o.detail = "0.8 -> 0 for (a,b); kept for exempt (a,c); 2.5 kept";
  return o;
}

Outcome direct_determinism() {
  Outcome o;
  const UnitFunction f = [](std::span<const double> x) { return (x[0] - 0.25) * (x[0] - 0.25); };
  const auto a = direct_minimize(f, 1, 100);
  const auto b = direct_minimize(f, 1, 100);
  const double err = std::abs(a.best_point[0] - 0.25);
  expect(o, a.evaluations <= 100, "used " + std::to_string(a.evaluations) + " evaluations");
  expect(o, err <= 1e-3, "|x* - 0.25| = " + fmt(err));
  expect(o,
         a.history.size() == b.history.size() &&
             std::memcmp(a.history.data(), b.history.data(),
                         a.history.size() * sizeof(double)) == 0 &&
             std::memcmp(&a.best_value, &b.best_value, sizeof(double)) == 0 &&
             std::memcmp(a.best_point.data(), b.best_point.data(), sizeof(double)) == 0,
         "runs differ");
  if (o.pass)
    o.detail = "|x* - 0.25| = " + fmt(err) + " after " + std::to_string(a.evaluations) +
               " evaluations, runs bit-identical";
  return o;
}

Outcome optimizer_suite() {
  Outcome o;
  std::string summary;
  for (auto alg : {Algorithm::PSO, Algorithm::DE, Algorithm::GA, Algorithm::TLBO}) {
    std::vector<double> bests;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Objective obj(make_benchmark("sphere", {{"dimension", 5}}));
      OptimizerConfig cfg;
      cfg.algorithm = alg;
      cfg.seed = seed;
      const auto res = run_optimizer(obj, cfg);
      bests.push_back(res.best_value);
      for (std::size_t k = 1; k < res.history.size(); ++k)
        expect(o, res.history[k] <= res.history[k - 1],
               std::string(to_string(alg)) + " history increases");
      for (const auto &rec : obj.log())
        for (double x : rec.point)
          expect(o, x >= -1.0 && x <= 1.0, std::string(to_string(alg)) + " left the bounds");
    }
    const double med = median(bests);
    expect(o, med <= 1e-2, std::string(to_string(alg)) + " median " + fmt(med));
    summary += std::string(summary.empty() ? "" : ", ") + std::string(to_string(alg)) + " " +
               fmt(med);
  }
  if (o.pass)
    o.detail = "median best " + summary;
  return o;
}

Outcome ego() {
  Outcome o;
  const double pdf0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  expect(o, expected_improvement(1.0, 0.0, 2.0) == 0.0, "EI(sigma=0) != 0");
  expect(o, expected_improvement(3.0, 0.0, 2.0) == 0.0, "EI(sigma=0) != 0");
  expect(o, std::abs(expected_improvement(0.5, 1.0, 0.5) - 0.39894) <= 1e-4,
         "EI(y_min, 1) = " + fmt(expected_improvement(0.5, 1.0, 0.5)));
  expect(o, std::abs(expected_improvement(0.5, 1.0, 0.5) - pdf0) <= 1e-12, "EI != phi(0)");

  auto forrester = [](double x) { return (6 * x - 2) * (6 * x - 2) * std::sin(12 * x - 4); };
  double oracle = forrester(0.0);
  for (int k = 1; k <= 10000; ++k)
    oracle = std::min(oracle, forrester(k / 10000.0));

  Objective obj(make_benchmark("forrester"));
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::EGO;
  cfg.maxit = 15;
  cfg.ego.init_k = 3;
  const auto res = run_ego(obj, cfg);
  expect(o, obj.eval_count() <= 18, "used " + std::to_string(obj.eval_count()) + " evaluations");
  expect(o, std::abs(res.best_value - oracle) <= 1e-2,
         "best " + fmt(res.best_value) + " vs oracle " + fmt(oracle));
  if (o.pass)
    o.detail = "EI checks exact; best " + fmt(res.best_value) + " vs grid " + fmt(oracle) +
               " with " + std::to_string(obj.eval_count()) + " evaluations";
  return o;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome pipeline() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "kghdmr_acceptance_pipeline";
  std::filesystem::remove_all(dir);
  std::ostringstream log;

  auto gsa_cfg = cli::parse_run_config(R"({
    "objective": {"name": "heat_sink"},
    "budget": 1000,
    "gsa": {"exempt": ["k"]}
  })");
  gsa_cfg.output_dir = dir / "gsa";
  expect(o, cli::cmd_gsa(gsa_cfg, log) == cli::kOk, "cmd_gsa failed");
  const auto report = json::parse(slurp(dir / "gsa" / "report.json"));
  const auto names = report.at("variables").get<std::vector<std::string>>();
  const auto &s = report.at("sensitivity");
  double s_theta = s.at("theta").get<double>(), s_max = 0;
  for (const auto &[name, value] : s.items())
    s_max = std::max(s_max, value.get<double>());
  expect(o, names.size() == 10, "GSA space is not 10-D");
  expect(o, s_theta >= 0 && s_theta <= 1e-9 * std::max(1.0, s_max),
         "theta sensitivity " + fmt(s_theta));
  const auto gsa_evals = json::parse(slurp(dir / "gsa" / "manifest.json")).at("evaluations");

  auto opt_cfg = cli::parse_run_config(R"({
    "objective": {"name": "heat_sink", "params": {"structural_only": 1}},
    "budget": 1000,
    "optimize": {"algorithms": ["PSO", "DE", "GA", "TLBO", "EGO"], "seeds": [0]}
  })");
  opt_cfg.output_dir = dir / "opt";
  expect(o, cli::cmd_optimize(opt_cfg, log) == cli::kOk, "cmd_optimize failed");
  const auto results = json::parse(slurp(dir / "opt" / "results.json"));
  std::set<std::string> algs;
  double best = INFINITY;
  json best_point;
  for (const auto &r : results) {
    algs.insert(r.at("algorithm").get<std::string>());
    expect(o, r.at("evaluations").get<std::size_t>() <= 1000, "run over budget");
    if (r.at("best_value").get<double>() < best) {
      best = r.at("best_value").get<double>();
      best_point = r.at("best_point");
    }
  }
  const auto table = slurp(dir / "opt" / "comparison.csv");
  for (const char *a : {"PSO", "DE", "GA", "TLBO", "EGO"})
    expect(o, algs.count(a) && table.find(std::string("\n") + a + ",") != std::string::npos,
           std::string("comparison table lacks ") + a);
  heat_sink::Geometry g;
  g.h_d = best_point.at("h_d");
  g.h_f = best_point.at("h_f");
  g.r = best_point.at("r");
  g.m_l = static_cast<int>(best_point.at("m_l").get<double>());
  g.m_w = static_cast<int>(best_point.at("m_w").get<double>());
  g.n_sides = static_cast<int>(best_point.at("n").get<double>());
  const double dl = (70.0 - 2.0 * g.m_l * g.r) / g.m_l;
  const double dw = (30.0 - 2.0 * (2 * g.m_w - 1) * g.r) / (2 * g.m_w - 1);
  expect(o, std::isfinite(best) && dl > 0 && dw > 0, "optimum infeasible");
  if (o.pass)
    o.detail = "GSA " + gsa_evals.dump() + " evaluations, s_theta = " + fmt(s_theta) +
               ", best " + fmt(best) + " degC (d_l = " + fmt(dl) + ", d_w = " + fmt(dw) + ")";
  std::filesystem::remove_all(dir);
  return o;
}

Outcome metrics() {
  Outcome o;
  const std::vector<double> a{1, 2, 3}, b{1, 2, 4}, c{0, 2}, d{0, 3};
  expect(o, std::abs(r2(a, b) - 0.5) <= 1e-12, "R2 = " + fmt(r2(a, b)));
  expect(o, std::abs(raae(c, d) - 0.5) <= 1e-12, "RAAE = " + fmt(raae(c, d)));
  expect(o, std::abs(rmae(c, d) - 1.0) <= 1e-12, "RMAE = " + fmt(rmae(c, d)));
  if (o.pass)
    o.detail = "R2 0.5, RAAE 0.5, RMAE 1.0";
  return o;
}

struct Criterion {
  int id;
  const char *title;
  double limit_s; // 0 = no runtime limit
  std::function<Outcome()> run;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "geometry fidelity", 1, geometry},
      {2, "kriging interpolation", 10, kriging_interpolation},
      {3, "additive identification", 30, additive_identification},
      {4, "coupling detection", 60, coupling_detection},
      {5, "screening rule", 0, screening},
      {6, "DIRECT determinism and convergence", 1, direct_determinism},
      {7, "optimizer suite", 120, optimizer_suite},
      {8, "EGO", 30, ego},
      {9, "end-to-end heat-sink pipeline", 300, pipeline},
      {10, "metrics", 0, metrics},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail = "took " + fmt(secs) + " s (limit " + fmt(c.limit_s) + " s); " + o.detail;
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  AC" << c.id << " " << c.title << " ("
              << fmt(secs) << " s): " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures ? 1 : 0;
}
