#pragma once

#include "kghdmr/design_space.hpp"
#include "kghdmr/errors.hpp"
#include "kghdmr/kriging.hpp"
#include "kghdmr/objective.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace kghdmr {

struct BuildConfig {
  // relative prediction error at a new adaptive sample that counts as converged
  double convergence_rel_tol = 0.1;
  // allowed relative mismatch of the additive model at coupling probes
  double accuracy_rel_tol = 1e-5;
  double linearity_rel_tol = 1e-2;
  std::size_t probes_per_test = 3;
  // adaptive samples allowed per component term
  std::size_t per_term_budget = 12;
  // consecutive converged samples required to stop refining a term
  std::size_t convergence_passes = 2;
  std::uint64_t seed = 1;
  int kernel_exponent = 2;
  // |f_i(t) / f0| <= tol at every interior probe instead of the
  // deviation-from-chord test
  bool literal_linearity = false;

  void validate() const;
};

/// Sample of a first-order component on its cut line; value = f - f0.
struct CutSample {
  double t = 0.0;
  double value = 0.0;
};

/// First-order component f_i over the unit coordinate of variable i,
/// anchored so that f_i(anchor) = 0 exactly.
struct FirstOrderTerm {
  std::size_t variable = 0;
  double anchor = 0.5;
  bool linear = false;
  // sorted by t, includes the anchor
  std::vector<CutSample> samples;
  std::optional<KrigingModel> model;
  double offset = 0.0;

  double operator()(double t) const;
};

/// Second-order residual f_ij over the (t_i, t_j) cut face, anchored so
/// that it vanishes on both cut lines through the anchor.
struct CouplingTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  double anchor_i = 0.5;
  double anchor_j = 0.5;
  std::optional<KrigingModel> model;

  double operator()(double ti, double tj) const;
};

struct HdmrModel {
  DesignSpace space;
  double f0 = 0.0;
  DesignPoint cut_center;
  UnitPoint anchor;
  std::vector<FirstOrderTerm> first_order;
  std::vector<CouplingTerm> couplings;
  std::size_t total_samples = 0;
  int kernel_exponent = 2;

  double predict(std::span<const double> p) const;
  double predict_unit(std::span<const double> u) const;
  std::vector<bool> linear_flags() const;
  std::vector<std::pair<std::size_t, std::size_t>> coupled_pairs() const;
  const CouplingTerm *coupling(std::size_t i, std::size_t j) const;
};

/// Raised when the objective budget runs out mid-build. Carries every sample
/// evaluated so far.
class PartialModelError : public BudgetExhausted {
public:
  PartialModelError(const std::string &what, std::vector<SampleRecord> samples)
      : BudgetExhausted(what), samples_(std::move(samples)) {}
  const std::vector<SampleRecord> &samples() const noexcept { return samples_; }

private:
  std::vector<SampleRecord> samples_;
};

/// True when the interior cut-line samples are explained by the straight
/// line through the two endpoint samples, within linearity_rel_tol of
/// max(|f0|, sample range, 1e-12). Needs samples at t = 0 and t = 1.
bool linearity_test(std::span<const CutSample> samples, double f0, const BuildConfig &config);

/// Adaptive Cut-HDMR construction with Kriging components.
///
/// The steps can be driven one at a time (as the tests do) or all at once
/// through build(). Every truth evaluation goes through the Objective, so
/// points shared between steps are only paid for once.
class HdmrBuilder {
public:
  HdmrBuilder(Objective &objective, BuildConfig config);

  double eval_center();
  const FirstOrderTerm &build_first_order(std::size_t i);
  bool coupling_existence_test();
  std::vector<std::pair<std::size_t, std::size_t>> identify_coupled_pairs();
  const CouplingTerm &build_second_order(std::size_t i, std::size_t j);

  HdmrModel build();
  /// Current state as a model; terms not built yet are left out.
  HdmrModel model() const;

  const BuildConfig &config() const noexcept { return config_; }

private:
  struct Probe {
    UnitPoint u;
    double value;
  };

  std::optional<double> truth(const UnitPoint &u);
  UnitPoint cut_point(std::size_t i, double t) const;
  UnitPoint face_point(std::size_t i, double ti, std::size_t j, double tj) const;
  double additive_prediction(std::span<const double> u) const;
  double response_scale(double reference) const;
  std::vector<std::vector<double>> probe_candidates() const;
  void require_center() const;
  void require_first_order() const;

  Objective &objective_;
  BuildConfig config_;
  std::size_t evals_at_start_;

  std::optional<double> f0_;
  UnitPoint anchor_;
  std::vector<std::optional<FirstOrderTerm>> first_order_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Probe>> pair_probes_;
  std::map<std::pair<std::size_t, std::size_t>, CouplingTerm> couplings_;
  double response_min_ = 0.0;
  double response_max_ = 0.0;
};

/// eval_center, all first-order terms, coupling detection and all coupled
/// second-order terms.
HdmrModel build_hdmr(Objective &objective, const BuildConfig &config);

} // namespace kghdmr
