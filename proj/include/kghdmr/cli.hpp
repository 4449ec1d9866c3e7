#pragma once

#include "kghdmr/hdmr.hpp"
#include "kghdmr/objective.hpp"
#include "kghdmr/optimizers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kghdmr::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kBudgetExhausted = 3,
  kNumericalFailure = 4,
  kModelFileError = 5,
};

struct ObjectiveSpec {
  std::string name;
  std::map<std::string, double> params;
  std::optional<DesignSpace> space;
};

struct GsaSettings {
  double threshold = 1.0;
  std::set<std::string> exempt;
  std::size_t validation_samples = 50;
  std::uint64_t validation_seed = 7;
};

struct OptimizeSettings {
  std::vector<OptimizerConfig> algorithms;
  std::vector<std::uint64_t> seeds{0};
};

/// Parsed run configuration. Every key is checked; unknown keys are errors.
struct RunConfig {
  ObjectiveSpec objective;
  BuildConfig build;
  GsaSettings gsa;
  OptimizeSettings optimize;
  std::optional<std::size_t> budget;
  std::filesystem::path output_dir = "out";
  // raw document text, hashed into the run manifest
  std::string source_text;
};

RunConfig parse_run_config(const std::string &text);
RunConfig load_run_config(const std::filesystem::path &path);
void apply_seed(RunConfig &config, std::uint64_t seed);

Problem make_problem(const ObjectiveSpec &spec);

/// FNV-1a 64-bit, hex encoded.
std::string content_hash(const std::string &text);

int cmd_gsa(const RunConfig &config, std::ostream &out);
int cmd_optimize(const RunConfig &config, std::ostream &out);
int cmd_validate(const RunConfig &config, const std::filesystem::path &model_path,
                 std::ostream &out);
int cmd_evaluate(const RunConfig &config, const std::optional<std::vector<double>> &point,
                 std::ostream &out);
int cmd_benchmarks(std::ostream &out);

/// Full command line entry point; maps library errors onto exit codes and
/// prints a one-line diagnostic to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace kghdmr::cli
