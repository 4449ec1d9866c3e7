#pragma once

#include "kghdmr/design_space.hpp"
#include "kghdmr/gsa.hpp"
#include "kghdmr/hdmr.hpp"
#include "kghdmr/kriging.hpp"
#include "kghdmr/optimizers.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kghdmr {

using json = nlohmann::json;

inline constexpr int kKrigingFormatVersion = 1;
inline constexpr int kHdmrFormatVersion = 1;

json to_json(const DesignSpace &space);
DesignSpace design_space_from_json(const json &doc);

/// {version, exponent, theta[], beta, sigma2, points[][], responses[]}
json kriging_to_json(const KrigingModel &model);
/// Re-factorizes the correlation matrix; throws ModelFormatError on a bad document.
KrigingModel kriging_from_json(const json &doc);

json hdmr_to_json(const HdmrModel &model);
HdmrModel hdmr_from_json(const json &doc);
HdmrModel load_hdmr(const std::filesystem::path &path);

json report_to_json(const SensitivityReport &report);
json result_to_json(const OptimizationResult &result, const DesignSpace &space);

std::string curve_csv(const SensitivityReport &report, std::size_t i);
std::string surface_csv(const SurfaceData &surface, const DesignSpace &space);
std::string comparison_csv(const std::vector<ComparisonRow> &rows, const DesignSpace &space);
std::string history_csv(const OptimizationResult &result);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);

} // namespace kghdmr
