#include "kghdmr/cli.hpp"

#include "kghdmr/errors.hpp"
#include "kghdmr/gsa.hpp"
#include "kghdmr/heat_sink.hpp"
#include "kghdmr/persistence.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace kghdmr::cli {

namespace {

void check_keys(const json &obj, std::initializer_list<const char *> allowed,
                const std::string &where) {
  if (!obj.is_object())
    throw ConfigError(where + " must be an object");
  for (const auto &[key, _] : obj.items()) {
    bool ok = false;
    for (const char *a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T> void read(const json &obj, const char *key, T &dst) {
  if (obj.contains(key))
    dst = obj.at(key).get<T>();
}

OptimizerConfig parse_algorithm_entry(const json &item) {
  OptimizerConfig c;
  if (item.is_string()) {
    c.algorithm = parse_algorithm(item.get<std::string>());
    return c;
  }
  check_keys(item, {"algorithm", "maxit", "npop", "pso", "de", "ga", "ego"}, "optimizer entry");
  c.algorithm = parse_algorithm(item.at("algorithm").get<std::string>());
  read(item, "maxit", c.maxit);
  read(item, "npop", c.npop);
  if (item.contains("pso")) {
    const auto &p = item.at("pso");
    check_keys(p, {"w_min", "w_max", "c1", "c2"}, "pso");
    read(p, "w_min", c.pso.w_min);
    read(p, "w_max", c.pso.w_max);
    read(p, "c1", c.pso.c1);
    read(p, "c2", c.pso.c2);
  }
  if (item.contains("de")) {
    const auto &p = item.at("de");
    check_keys(p, {"F", "pC"}, "de");
    read(p, "F", c.de.f);
    read(p, "pC", c.de.p_crossover);
  }
  if (item.contains("ga")) {
    const auto &p = item.at("ga");
    check_keys(p, {"pC", "pM", "mutation_sigma", "gene_rate", "blend_gamma"}, "ga");
    read(p, "pC", c.ga.p_crossover);
    read(p, "pM", c.ga.p_mutation);
    read(p, "mutation_sigma", c.ga.mutation_sigma);
    read(p, "gene_rate", c.ga.gene_rate);
    read(p, "blend_gamma", c.ga.blend_gamma);
  }
  if (item.contains("ego")) {
    const auto &p = item.at("ego");
    check_keys(p, {"init_k", "ei_budget", "ei_tol", "likelihood_budget", "kernel_exponent"},
               "ego");
    read(p, "init_k", c.ego.init_k);
    read(p, "ei_budget", c.ego.ei_budget);
    read(p, "ei_tol", c.ego.ei_tol);
    read(p, "likelihood_budget", c.ego.likelihood_budget);
    read(p, "kernel_exponent", c.ego.kernel_exponent);
  }
  return c;
}

RunConfig parse_document(const json &doc) {
  check_keys(doc, {"objective", "design_space", "budget", "seed", "build", "gsa", "optimize",
                   "output_dir"},
             "config");
  RunConfig cfg;

  const auto &obj = doc.at("objective");
  check_keys(obj, {"name", "params"}, "objective");
  cfg.objective.name = obj.at("name").get<std::string>();
  if (obj.contains("params") && !obj.at("params").is_object())
    throw ConfigError("objective.params must be an object");
  if (obj.contains("params"))
    for (const auto &[key, value] : obj.at("params").items())
      cfg.objective.params[key] = value.get<double>();
  if (doc.contains("design_space"))
    cfg.objective.space = design_space_from_json(doc.at("design_space"));

  if (doc.contains("budget")) {
    const auto b = doc.at("budget").get<long long>();
    if (b < 1)
      throw ConfigError("budget must be positive");
    cfg.budget = static_cast<std::size_t>(b);
  }
  if (doc.contains("output_dir"))
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  // the shared seed is a default; section-level seeds below take precedence
  if (doc.contains("seed"))
    apply_seed(cfg, doc.at("seed").get<std::uint64_t>());

  if (doc.contains("build")) {
    const auto &b = doc.at("build");
    check_keys(b, {"convergence_rel_tol", "accuracy_rel_tol", "linearity_rel_tol",
                   "probes_per_test", "per_term_budget", "convergence_passes", "seed",
                   "kernel_exponent", "literal_linearity"},
               "build");
    read(b, "convergence_rel_tol", cfg.build.convergence_rel_tol);
    read(b, "accuracy_rel_tol", cfg.build.accuracy_rel_tol);
    read(b, "linearity_rel_tol", cfg.build.linearity_rel_tol);
    read(b, "probes_per_test", cfg.build.probes_per_test);
    read(b, "per_term_budget", cfg.build.per_term_budget);
    read(b, "convergence_passes", cfg.build.convergence_passes);
    read(b, "seed", cfg.build.seed);
    read(b, "kernel_exponent", cfg.build.kernel_exponent);
    read(b, "literal_linearity", cfg.build.literal_linearity);
  }
  cfg.build.validate();

  if (doc.contains("gsa")) {
    const auto &g = doc.at("gsa");
    check_keys(g, {"threshold", "exempt", "validation_samples", "validation_seed"}, "gsa");
    read(g, "threshold", cfg.gsa.threshold);
    if (g.contains("exempt"))
      for (const auto &name : g.at("exempt"))
        cfg.gsa.exempt.insert(name.get<std::string>());
    read(g, "validation_samples", cfg.gsa.validation_samples);
    read(g, "validation_seed", cfg.gsa.validation_seed);
  }

  if (doc.contains("optimize")) {
    const auto &o = doc.at("optimize");
    check_keys(o, {"algorithms", "seeds"}, "optimize");
    if (o.contains("algorithms"))
      for (const auto &item : o.at("algorithms"))
        cfg.optimize.algorithms.push_back(parse_algorithm_entry(item));
    if (o.contains("seeds"))
      cfg.optimize.seeds = o.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.optimize.seeds.empty())
      throw ConfigError("optimize.seeds must not be empty");
  }

  // Resolve the problem now so that bad names or spaces fail before any evaluation.
  const auto problem = make_problem(cfg.objective);
  for (const auto &name : cfg.gsa.exempt)
    if (!problem.space.index_of(name))
      throw ConfigError("exempt variable '" + name + "' is not in the design space");
  for (const auto &a : cfg.optimize.algorithms)
    a.validate(problem.space.dimension());
  return cfg;
}

std::string join_outputs(const std::vector<std::string> &files) {
  std::string s;
  for (const auto &f : files)
    s += (s.empty() ? "" : ", ") + f;
  return s;
}

void write_manifest(const RunConfig &cfg, const std::string &command, std::size_t evaluations,
                    const std::vector<std::string> &outputs) {
  json doc = {{"command", command},
              {"config_hash", content_hash(cfg.source_text)},
              {"objective", cfg.objective.name},
              {"build_seed", cfg.build.seed},
              {"validation_seed", cfg.gsa.validation_seed},
              {"optimizer_seeds", cfg.optimize.seeds},
              {"evaluations", evaluations},
              {"outputs", outputs}};
  doc["budget"] = cfg.budget ? json(*cfg.budget) : json(nullptr);
  write_file_atomic(cfg.output_dir / "manifest.json", doc.dump(2) + "\n");
}

std::string csv_of_log(const Objective &objective) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  objective.write_csv(os);
  return os.str();
}

} // namespace

RunConfig parse_run_config(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    cfg = parse_document(doc);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  cfg.source_text = text;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void apply_seed(RunConfig &config, std::uint64_t seed) {
  config.build.seed = seed;
  config.gsa.validation_seed = seed;
  config.optimize.seeds = {seed};
}

Problem make_problem(const ObjectiveSpec &spec) {
  if (spec.name == "heat_sink" && spec.space) {
    auto params = spec.params;
    params.erase("structural_only");
    return heat_sink::make_problem(*spec.space, heat_sink::ModelConstants::from_params(params));
  }
  auto problem = make_benchmark(spec.name, spec.params);
  if (spec.space) {
    if (spec.space->dimension() != problem.space.dimension())
      throw ConfigError("design space has " + std::to_string(spec.space->dimension()) +
                        " variables; objective '" + spec.name + "' expects " +
                        std::to_string(problem.space.dimension()));
    problem.space = *spec.space;
  }
  return problem;
}

std::string content_hash(const std::string &text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

int cmd_gsa(const RunConfig &config, std::ostream &out) {
  Objective objective(make_problem(config.objective), config.budget);
  const auto &space = objective.space();
  std::vector<std::string> outputs;

  HdmrModel model;
  try {
    model = build_hdmr(objective, config.build);
  } catch (const BudgetExhausted &) {
    write_file_atomic(config.output_dir / "evaluations.csv", csv_of_log(objective));
    throw;
  }

  GsaOptions opts;
  opts.threshold = config.gsa.threshold;
  opts.exempt = config.gsa.exempt;
  auto report = analyze(model, opts);
  if (config.gsa.validation_samples > 0)
    report.metrics = validate_model(model, objective, config.gsa.validation_samples,
                                    config.gsa.validation_seed);

  const auto &dir = config.output_dir;
  write_file_atomic(dir / "report.json", report_to_json(report).dump(2) + "\n");
  outputs.push_back("report.json");
  write_file_atomic(dir / "model.json", hdmr_to_json(model).dump(2) + "\n");
  outputs.push_back("model.json");
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto name = "curves/f_" + space[i].name + ".csv";
    write_file_atomic(dir / name, curve_csv(report, i));
    outputs.push_back(name);
  }
  for (const auto &surf : report.surfaces) {
    const auto name = "surfaces/f_" + space[surf.i].name + "_" + space[surf.j].name + ".csv";
    write_file_atomic(dir / name, surface_csv(surf, space));
    outputs.push_back(name);
  }
  write_file_atomic(dir / "evaluations.csv", csv_of_log(objective));
  outputs.push_back("evaluations.csv");
  write_manifest(config, "gsa", objective.eval_count(), outputs);

  out << "objective " << objective.name() << ": f0 = " << model.f0 << ", "
      << model.total_samples << " build samples, " << objective.eval_count()
      << " evaluations total\n";
  out << "sensitivity:\n";
  for (std::size_t i = 0; i < space.dimension(); ++i)
    out << "  " << space[i].name << " s = " << report.s[i]
        << (report.linear_flags[i] ? " (linear)" : "") << '\n';
  out << "couplings (screened at " << report.threshold << "):\n";
  for (const auto &[i, j] : model.coupled_pairs())
    out << "  " << space[i].name << "-" << space[j].name << " c = " << report.c[i][j]
        << " screened = " << report.screened_c[i][j] << '\n';
  if (report.metrics)
    out << "validation: R2 = " << report.metrics->r2 << ", RAAE = " << report.metrics->raae
        << ", RMAE = " << report.metrics->rmae << " over " << report.metrics->samples
        << " samples\n";
  out << "wrote " << join_outputs({"report.json", "model.json", "curves/", "surfaces/",
                                   "evaluations.csv", "manifest.json"})
      << " to " << dir.string() << '\n';
  return kOk;
}

int cmd_optimize(const RunConfig &config, std::ostream &out) {
  const auto problem = make_problem(config.objective);
  const auto &space = problem.space;
  auto algorithms = config.optimize.algorithms;
  if (algorithms.empty())
    for (auto a : {Algorithm::PSO, Algorithm::DE, Algorithm::GA, Algorithm::TLBO, Algorithm::EGO})
    {
      OptimizerConfig c;
      c.algorithm = a;
      algorithms.push_back(c);
    }

  ObjectiveFactory factory = [&] { return std::make_unique<Objective>(problem, config.budget); };
  const auto rows = run_comparison(factory, algorithms, config.optimize.seeds);

  const auto &dir = config.output_dir;
  std::vector<std::string> outputs;
  write_file_atomic(dir / "comparison.csv", comparison_csv(rows, space));
  outputs.push_back("comparison.csv");
  json results = json::array();
  std::size_t evaluations = 0;
  for (const auto &row : rows) {
    for (const auto &r : row.runs_detail) {
      results.push_back(result_to_json(r, space));
      evaluations += r.eval_count;
    }
    const auto name = "history_" + std::string(to_string(row.algorithm)) + ".csv";
    write_file_atomic(dir / name, history_csv(row.best_run));
    outputs.push_back(name);
  }
  write_file_atomic(dir / "results.json", results.dump(2) + "\n");
  outputs.push_back("results.json");
  write_manifest(config, "optimize", evaluations, outputs);

  out << std::left << std::setw(6) << "alg" << std::setw(8) << "iters" << std::setw(8) << "evals"
      << std::setw(16) << "best" << "point\n";
  for (const auto &row : rows) {
    const auto &b = row.best_run;
    out << std::setw(6) << to_string(row.algorithm) << std::setw(8) << b.iterations_run
        << std::setw(8) << b.eval_count << std::setw(16) << b.best_value;
    for (std::size_t i = 0; i < b.best_point.size(); ++i)
      out << (i ? " " : "") << space[i].name << "=" << b.best_point[i];
    out << '\n';
  }
  std::size_t truncated = 0;
  for (const auto &row : rows)
    for (const auto &r : row.runs_detail) {
      if (r.budget_exhausted && !std::isfinite(r.best_value))
        throw BudgetExhausted(std::string(to_string(r.algorithm)) + " seed " + std::to_string(r.seed) +
                              " ran out of budget before finding a feasible design");
      truncated += r.budget_exhausted ? 1 : 0;
    }
  if (truncated)
    out << "note: " << truncated << " run(s) stopped at the evaluation budget\n";
  return kOk;
}

int cmd_validate(const RunConfig &config, const std::filesystem::path &model_path,
                 std::ostream &out) {
  const auto model = load_hdmr(model_path);
  Objective objective(make_problem(config.objective), config.budget);
  if (to_json(model.space) != to_json(objective.space()))
    throw ModelFormatError("model variables do not match the configured objective");
  const auto m = validate_model(model, objective, std::max<std::size_t>(config.gsa.validation_samples, 2),
                                config.gsa.validation_seed);
  out << "R2 = " << m.r2 << "\nRAAE = " << m.raae << "\nRMAE = " << m.rmae << "\nsamples = "
      << m.samples << '\n';
  return kOk;
}

int cmd_evaluate(const RunConfig &config, const std::optional<std::vector<double>> &point,
                 std::ostream &out) {
  Objective objective(make_problem(config.objective), config.budget);
  const auto p = point ? *point : objective.space().center();
  const double v = objective.evaluate(p);
  out << std::setprecision(17) << v << '\n';
  return kOk;
}

int cmd_benchmarks(std::ostream &out) {
  for (const auto &b : list_benchmarks())
    out << std::left << std::setw(16) << b.name << " d=" << b.default_dimension << "  "
        << b.description << '\n';
  return kOk;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Cut-HDMR/Kriging sensitivity analysis and black-box optimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::string model_path;
  std::vector<double> point;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override every seed in the config");
    sub->add_option("--budget", budget, "evaluation budget per run");
  };
  auto *gsa = app.add_subcommand("gsa", "build the HDMR model and sensitivity report");
  add_common(gsa);
  auto *optimize = app.add_subcommand("optimize", "run and compare optimizers");
  add_common(optimize);
  auto *validate = app.add_subcommand("validate", "score a saved model against the truth");
  add_common(validate);
  validate->add_option("--model", model_path, "model.json written by gsa")->required();
  auto *evaluate = app.add_subcommand("evaluate", "evaluate the objective at one point");
  add_common(evaluate);
  evaluate->add_option("--point", point, "physical values, comma separated")->delimiter(',');
  auto *benchmarks = app.add_subcommand("benchmarks", "list built-in objectives");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (benchmarks->parsed())
      return cmd_benchmarks(out);

    auto cfg = load_run_config(config_path);
    if (seed)
      apply_seed(cfg, *seed);
    if (budget) {
      if (*budget < 1)
        throw ConfigError("--budget must be positive");
      cfg.budget = *budget;
    }
    if (!out_dir.empty())
      cfg.output_dir = out_dir;

    if (gsa->parsed())
      return cmd_gsa(cfg, out);
    if (optimize->parsed())
      return cmd_optimize(cfg, out);
    if (validate->parsed())
      return cmd_validate(cfg, model_path, out);
    if (evaluate->parsed())
      return cmd_evaluate(cfg, point.empty() ? std::nullopt : std::optional(point), out);
  } catch (const ConfigError &e) {
    err << "error: config: " << e.what() << '\n';
    return kConfigError;
  } catch (const BudgetExhausted &e) {
    err << "error: budget: " << e.what() << '\n';
    return kBudgetExhausted;
  } catch (const ModelFormatError &e) {
    err << "error: model: " << e.what() << '\n';
    return kModelFileError;
  } catch (const Error &e) {
    err << "error: numerical: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kConfigError;
}

} // namespace kghdmr::cli
