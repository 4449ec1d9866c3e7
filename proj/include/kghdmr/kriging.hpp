#pragma once

#include "kghdmr/design_space.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace kghdmr {

/// exp(-sum_k theta_k |a_k - b_k|^exponent), exponent in {1, 2}.
double correlation(std::span<const double> a, std::span<const double> b,
                   std::span<const double> theta, int exponent);

/// Ordinary Kriging interpolator over unit-cube inputs: constant trend beta
/// plus a stationary Gaussian process with power-exponential correlation.
///
/// beta and sigma2 are the generalized-least-squares estimates. The
/// correlation matrix is factorized with a small diagonal nugget that starts
/// at 1e-10 and grows tenfold up to 1e-6 when the Cholesky factorization
/// fails.
class KrigingModel {
public:
  static constexpr double kInitialNugget = 1e-10;
  static constexpr double kMaxNugget = 1e-6;

  /// Throws DegenerateData for fewer than two points or duplicates and
  /// ConditioningError when no nugget makes R positive definite.
  static KrigingModel fit(std::vector<UnitPoint> points, std::vector<double> responses,
                          std::vector<double> theta, int exponent);

  double predict_mean(std::span<const double> x) const;
  /// Ordinary-Kriging mean squared error, clamped at zero.
  double predict_variance(std::span<const double> x) const;

  /// Concentrated log-likelihood -N/2 ln(sigma2) - 1/2 ln|R|.
  double log_likelihood() const;

  const std::vector<UnitPoint> &points() const noexcept { return points_; }
  const std::vector<double> &responses() const noexcept { return responses_; }
  const std::vector<double> &theta() const noexcept { return theta_; }
  int exponent() const noexcept { return exponent_; }
  double beta() const noexcept { return beta_; }
  double sigma2() const noexcept { return sigma2_; }
  double nugget() const noexcept { return nugget_; }
  std::size_t dimension() const noexcept { return theta_.size(); }
  std::size_t size() const noexcept { return points_.size(); }

private:
  KrigingModel() = default;
  Eigen::VectorXd correlations_to(std::span<const double> x) const;

  std::vector<UnitPoint> points_;
  std::vector<double> responses_;
  std::vector<double> theta_;
  int exponent_ = 1;
  double beta_ = 0.0;
  double sigma2_ = 0.0;
  double nugget_ = 0.0;

  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd weights_;      // R^-1 (y - 1 beta)
  Eigen::VectorXd r_inv_ones_;   // R^-1 1
  double ones_r_inv_ones_ = 0.0; // 1^T R^-1 1
  double log_det_ = 0.0;
};

/// Maximum-likelihood correlation parameters, searched by DIRECT over
/// log10(theta_k) in [-3, 3]. Constant responses give theta = 1.
/// `budget` = 0 selects 100 evaluations per dimension.
std::vector<double> fit_hyperparameters(const std::vector<UnitPoint> &points,
                                        const std::vector<double> &responses, int exponent,
                                        std::size_t budget = 0);

/// fit() with fit_hyperparameters() theta.
KrigingModel fit_kriging_mle(std::vector<UnitPoint> points, std::vector<double> responses,
                             int exponent, std::size_t budget = 0);

} // namespace kghdmr
