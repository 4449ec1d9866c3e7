#include "kghdmr/persistence.hpp"

#include "kghdmr/errors.hpp"

#include <fstream>
#include <sstream>

namespace kghdmr {

namespace {

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  return os;
}

} // namespace

json to_json(const DesignSpace &space) {
  json vars = json::array();
  for (const auto &v : space.variables())
    vars.push_back({{"name", v.name},
                    {"kind", std::string(to_string(v.kind))},
                    {"lower", v.lower},
                    {"upper", v.upper},
                    {"unit", v.unit}});
  return vars;
}

DesignSpace design_space_from_json(const json &doc) {
  if (!doc.is_array())
    throw ConfigError("design space must be a list of variables");
  std::vector<VariableSpec> vars;
  for (const auto &item : doc) {
    if (!item.is_object())
      throw ConfigError("design variable must be an object");
    for (const auto &[key, _] : item.items())
      if (key != "name" && key != "kind" && key != "lower" && key != "upper" && key != "unit")
        throw ConfigError("unknown design variable field '" + key + "'");
    try {
      VariableSpec v;
      v.name = item.at("name").get<std::string>();
      v.kind = parse_variable_kind(item.value("kind", std::string("continuous")));
      v.lower = item.at("lower").get<double>();
      v.upper = item.at("upper").get<double>();
      v.unit = item.value("unit", std::string());
      vars.push_back(std::move(v));
    } catch (const json::exception &e) {
      throw ConfigError(std::string("bad design variable: ") + e.what());
    }
  }
  return DesignSpace(std::move(vars));
}

json kriging_to_json(const KrigingModel &model) {
  return {{"version", kKrigingFormatVersion},
          {"exponent", model.exponent()},
          {"theta", model.theta()},
          {"beta", model.beta()},
          {"sigma2", model.sigma2()},
          {"points", model.points()},
          {"responses", model.responses()}};
}

KrigingModel kriging_from_json(const json &doc) {
  try {
    const int version = doc.at("version").get<int>();
    if (version != kKrigingFormatVersion)
      throw ModelFormatError("Kriging document version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kKrigingFormatVersion) +
                             ")");
    return KrigingModel::fit(doc.at("points").get<std::vector<UnitPoint>>(),
                             doc.at("responses").get<std::vector<double>>(),
                             doc.at("theta").get<std::vector<double>>(),
                             doc.at("exponent").get<int>());
  } catch (const json::exception &e) {
    throw ModelFormatError(std::string("bad Kriging document: ") + e.what());
  } catch (const ModelFormatError &) {
    throw;
  } catch (const Error &e) {
    throw ModelFormatError(std::string("bad Kriging document: ") + e.what());
  }
}

json hdmr_to_json(const HdmrModel &model) {
  json first = json::array();
  for (const auto &t : model.first_order) {
    json samples = json::array();
    for (const auto &s : t.samples)
      samples.push_back({s.t, s.value});
    json item = {{"variable", t.variable},
                 {"anchor", t.anchor},
                 {"linear", t.linear},
                 {"samples", samples}};
    if (t.model) {
      item["model"] = kriging_to_json(*t.model);
      item["offset"] = t.offset;
    }
    first.push_back(std::move(item));
  }
  json pairs = json::array();
  for (const auto &c : model.couplings) {
    json item = {{"i", c.i}, {"j", c.j}, {"anchor_i", c.anchor_i}, {"anchor_j", c.anchor_j}};
    if (c.model)
      item["model"] = kriging_to_json(*c.model);
    pairs.push_back(std::move(item));
  }
  json flags = json::array();
  for (bool b : model.linear_flags())
    flags.push_back(b);
  json coupled = json::array();
  for (const auto &[i, j] : model.coupled_pairs())
    coupled.push_back({i, j});
  return {{"version", kHdmrFormatVersion},
          {"kind", "cut-hdmr-kriging"},
          {"design_space", to_json(model.space)},
          {"f0", model.f0},
          {"cut_center", model.cut_center},
          {"anchor", model.anchor},
          {"kernel_exponent", model.kernel_exponent},
          {"total_samples", model.total_samples},
          {"linear_flags", flags},
          {"coupled_pairs", coupled},
          {"first_order", first},
          {"couplings", pairs}};
}

HdmrModel hdmr_from_json(const json &doc) {
  try {
    if (!doc.is_object() || !doc.contains("version"))
      throw ModelFormatError("model document has no version");
    const int version = doc.at("version").get<int>();
    if (version != kHdmrFormatVersion)
      throw ModelFormatError("model version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kHdmrFormatVersion) + ")");
    HdmrModel m;
    m.space = design_space_from_json(doc.at("design_space"));
    m.f0 = doc.at("f0").get<double>();
    m.cut_center = doc.at("cut_center").get<DesignPoint>();
    m.anchor = doc.at("anchor").get<UnitPoint>();
    m.kernel_exponent = doc.at("kernel_exponent").get<int>();
    m.total_samples = doc.at("total_samples").get<std::size_t>();
    const std::size_t n = m.space.dimension();
    if (m.anchor.size() != n || m.cut_center.size() != n)
      throw ModelFormatError("model anchor does not match its design space");
    for (const auto &item : doc.at("first_order")) {
      FirstOrderTerm t;
      t.variable = item.at("variable").get<std::size_t>();
      t.anchor = item.at("anchor").get<double>();
      t.linear = item.at("linear").get<bool>();
      for (const auto &s : item.at("samples"))
        t.samples.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
      if (item.contains("model")) {
        t.model = kriging_from_json(item.at("model"));
        t.offset = item.at("offset").get<double>();
      }
      if (t.variable >= n)
        throw ModelFormatError("first-order term refers to an unknown variable");
      m.first_order.push_back(std::move(t));
    }
    if (m.first_order.size() != n)
      throw ModelFormatError("model needs one first-order term per variable");
    for (const auto &item : doc.at("couplings")) {
      CouplingTerm c;
      c.i = item.at("i").get<std::size_t>();
      c.j = item.at("j").get<std::size_t>();
      c.anchor_i = item.at("anchor_i").get<double>();
      c.anchor_j = item.at("anchor_j").get<double>();
      if (item.contains("model"))
        c.model = kriging_from_json(item.at("model"));
      if (c.i >= n || c.j >= n || c.i >= c.j)
        throw ModelFormatError("coupling term refers to an invalid pair");
      m.couplings.push_back(std::move(c));
    }
    return m;
  } catch (const json::exception &e) {
    throw ModelFormatError(std::string("bad model document: ") + e.what());
  } catch (const ModelFormatError &) {
    throw;
  } catch (const Error &e) {
    throw ModelFormatError(std::string("bad model document: ") + e.what());
  }
}

HdmrModel load_hdmr(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ModelFormatError("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception &e) {
    throw ModelFormatError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return hdmr_from_json(doc);
}

json report_to_json(const SensitivityReport &r) {
  json s = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i)
    s[r.names[i]] = r.s[i];
  json pairs = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i)
    for (std::size_t j = i + 1; j < r.names.size(); ++j)
      if (r.c[i][j] != 0.0)
        pairs.push_back({{"pair", {r.names[i], r.names[j]}},
                         {"c", r.c[i][j]},
                         {"screened_c", r.screened_c[i][j]}});
  json linear = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i)
    if (r.linear_flags[i])
      linear.push_back(r.names[i]);
  json doc = {
      {"variables", r.names},
      {"sensitivity", s},
      {"linear_terms", linear},
      {"couplings", pairs},
      {"coupling_matrix", r.c},
      {"screened_coupling_matrix", r.screened_c},
      {"screening", {{"threshold", r.threshold}, {"exempt", r.exempt}}},
      {"total_samples", r.total_samples},
      {"notes",
       {"sensitivity s_i = max - min of the first-order term over a dense scan of its range",
        "coupling c_ij = max - min of the second-order term over a dense grid",
        "R2 = 1 - SS_res/SS_tot; RAAE = sum|y - yhat| / (N STD); RMAE = max|y - yhat| / STD; "
        "STD uses 1/N",
        "Kriging kernel exponent " + std::to_string(r.kernel_exponent)}}};
  if (r.metrics)
    doc["metrics"] = {{"r2", r.metrics->r2},
                      {"raae", r.metrics->raae},
                      {"rmae", r.metrics->rmae},
                      {"samples", r.metrics->samples}};
  return doc;
}

json result_to_json(const OptimizationResult &result, const DesignSpace &space) {
  json point = json::object();
  for (std::size_t i = 0; i < result.best_point.size(); ++i)
    point[space[i].name] = result.best_point[i];
  return {{"algorithm", std::string(to_string(result.algorithm))},
          {"seed", result.seed},
          {"best_value", result.best_value},
          {"best_point", point},
          {"iterations", result.iterations_run},
          {"evaluations", result.eval_count},
          {"budget_exhausted", result.budget_exhausted},
          {"history", result.history}};
}

std::string curve_csv(const SensitivityReport &report, std::size_t i) {
  auto os = csv_stream();
  os << "t," << report.names[i] << ",f_i\n";
  for (const auto &c : report.curves[i])
    os << c.t << ',' << c.x << ',' << c.value << '\n';
  return os.str();
}

std::string surface_csv(const SurfaceData &surface, const DesignSpace &space) {
  auto os = csv_stream();
  const auto &vi = space[surface.i];
  const auto &vj = space[surface.j];
  os << "t_i,t_j," << vi.name << ',' << vj.name << ",f_ij\n";
  const double g = static_cast<double>(surface.grid - 1);
  for (std::size_t a = 0; a < surface.grid; ++a) {
    for (std::size_t b = 0; b < surface.grid; ++b) {
      const double ti = static_cast<double>(a) / g, tj = static_cast<double>(b) / g;
      os << ti << ',' << tj << ',' << vi.lower + space.snap_unit(surface.i, ti) * vi.width()
         << ',' << vj.lower + space.snap_unit(surface.j, tj) * vj.width() << ',' << surface.values[a * surface.grid + b] << '\n';
    }
  }
  return os.str();
}

std::string comparison_csv(const std::vector<ComparisonRow> &rows, const DesignSpace &space) {
  auto os = csv_stream();
  os << "algorithm,runs,iterations,evaluations,best_value,median_best";
  for (const auto &v : space.variables())
    os << ',' << v.name;
  os << '\n';
  for (const auto &row : rows) {
    const auto &b = row.best_run;
    os << to_string(row.algorithm) << ',' << row.runs << ',' << b.iterations_run << ','
       << b.eval_count << ',' << b.best_value << ',' << row.median_best;
    for (std::size_t i = 0; i < space.dimension(); ++i)
      os << ',' << (i < b.best_point.size() ? b.best_point[i] : 0.0);
    os << '\n';
  }
  return os.str();
}

std::string history_csv(const OptimizationResult &result) {
  auto os = csv_stream();
  os << "iteration,best_value\n";
  for (std::size_t k = 0; k < result.history.size(); ++k)
    os << k << ',' << result.history[k] << '\n';
  return os.str();
}

void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out)
      throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace kghdmr
