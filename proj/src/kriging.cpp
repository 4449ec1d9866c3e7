#include "kghdmr/kriging.hpp"

#include "kghdmr/errors.hpp"
#include "kghdmr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace kghdmr {

double correlation(std::span<const double> a, std::span<const double> b,
                   std::span<const double> theta, int exponent) {
  double s = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double d = std::abs(a[k] - b[k]);
    s += theta[k] * (exponent == 2 ? d * d : d);
  }
  return std::exp(-s);
}

KrigingModel KrigingModel::fit(std::vector<UnitPoint> points, std::vector<double> responses,
                               std::vector<double> theta, int exponent) {
  const std::size_t n = points.size();
  if (n < 2)
    throw DegenerateData("Kriging needs at least two training points");
  if (responses.size() != n)
    throw DegenerateData("Kriging points and responses differ in length");
  if (exponent != 1 && exponent != 2)
    throw ConfigError("Kriging kernel exponent must be 1 or 2");
  const std::size_t dim = theta.size();
  for (double t : theta)
    if (!(t > 0.0) || !std::isfinite(t))
      throw ConfigError("Kriging theta must be positive and finite");
  {
    std::set<std::vector<double>> seen;
    for (const auto &p : points) {
      if (p.size() != dim)
        throw DegenerateData("Kriging point dimension does not match theta");
      if (!seen.insert(p).second)
        throw DegenerateData("duplicate Kriging training point");
    }
  }
  for (double y : responses)
    if (!std::isfinite(y))
      throw DegenerateData("non-finite Kriging response");

  KrigingModel m;
  m.points_ = std::move(points);
  m.responses_ = std::move(responses);
  m.theta_ = std::move(theta);
  m.exponent_ = exponent;

  Eigen::MatrixXd r(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j)
      r(i, j) = r(j, i) = correlation(m.points_[i], m.points_[j], m.theta_, exponent);
  }

  bool ok = false;
  for (double nugget = kInitialNugget; nugget <= kMaxNugget * 1.0000001; nugget *= 10.0) {
    Eigen::MatrixXd rn = r;
    rn.diagonal().array() += nugget;
    m.chol_.compute(rn);
    if (m.chol_.info() == Eigen::Success) {
      const auto &l = m.chol_.matrixLLT();
      bool positive = true;
      for (Eigen::Index i = 0; i < l.rows(); ++i)
        positive = positive && l(i, i) > 0.0 && std::isfinite(l(i, i));
      if (positive) {
        m.nugget_ = nugget;
        ok = true;
        break;
      }
    }
  }
  if (!ok) {
    std::ostringstream os;
    os << "Kriging correlation matrix not positive definite with nugget " << kMaxNugget;
    throw ConditioningError(os.str());
  }

  const Eigen::Map<const Eigen::VectorXd> y(m.responses_.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  m.r_inv_ones_ = m.chol_.solve(ones);
  m.ones_r_inv_ones_ = ones.dot(m.r_inv_ones_);
  const bool constant = std::all_of(m.responses_.begin(), m.responses_.end(),
                                    [&](double v) { return v == m.responses_.front(); });
  if (constant) {
    // exact, rather than a rounded GLS ratio
    m.beta_ = m.responses_.front();
    m.weights_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    m.sigma2_ = 0.0;
  } else {
    m.beta_ = m.r_inv_ones_.dot(y) / m.ones_r_inv_ones_;
    const Eigen::VectorXd resid = y - ones * m.beta_;
    m.weights_ = m.chol_.solve(resid);
    m.sigma2_ = std::max(0.0, resid.dot(m.weights_) / static_cast<double>(n));
  }

  const auto &l = m.chol_.matrixLLT();
  m.log_det_ = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    m.log_det_ += 2.0 * std::log(l(i, i));
  return m;
}

Eigen::VectorXd KrigingModel::correlations_to(std::span<const double> x) const {
  Eigen::VectorXd r(static_cast<Eigen::Index>(points_.size()));
  for (std::size_t i = 0; i < points_.size(); ++i) {
    r(static_cast<Eigen::Index>(i)) = correlation(x, points_[i], theta_, exponent_);
    // nugget belongs to the kernel at zero distance, so training data is reproduced
    if (std::equal(x.begin(), x.end(), points_[i].begin(), points_[i].end()))
      r(static_cast<Eigen::Index>(i)) += nugget_;
  }
  return r;
}

double KrigingModel::predict_mean(std::span<const double> x) const {
  return beta_ + correlations_to(x).dot(weights_);
}

double KrigingModel::predict_variance(std::span<const double> x) const {
  if (sigma2_ == 0.0)
    return 0.0;
  const Eigen::VectorXd r = correlations_to(x);
  const Eigen::VectorXd r_inv_r = chol_.solve(r);
  const double u = 1.0 - r_inv_ones_.dot(r);
  const double mse = sigma2_ * (1.0 - r.dot(r_inv_r) + u * u / ones_r_inv_ones_);
  return std::max(0.0, mse);
}

double KrigingModel::log_likelihood() const {
  const double n = static_cast<double>(points_.size());
  const double s2 = std::max(sigma2_, std::numeric_limits<double>::min());
  return -0.5 * n * std::log(s2) - 0.5 * log_det_;
}

std::vector<double> fit_hyperparameters(const std::vector<UnitPoint> &points,
                                        const std::vector<double> &responses, int exponent,
                                        std::size_t budget) {
  if (points.size() < 3)
    throw DegenerateData("hyperparameter fitting needs at least three points");
  const std::size_t dim = points.front().size();
  const bool constant = std::all_of(responses.begin(), responses.end(),
                                    [&](double y) { return y == responses.front(); });
  if (constant)
    return std::vector<double>(dim, 1.0);
  if (budget == 0)
    budget = 100 * dim;

  auto theta_of = [](std::span<const double> u) {
    std::vector<double> t(u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
      t[k] = std::pow(10.0, -3.0 + 6.0 * u[k]);
    return t;
  };
  UnitFunction neg_ll = [&](std::span<const double> u) {
    try {
      return -KrigingModel::fit(points, responses, theta_of(u), exponent).log_likelihood();
    } catch (const NumericalError &) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const auto res = direct_minimize(neg_ll, dim, budget);
  if (!std::isfinite(res.best_value))
    throw ConditioningError("no correlation parameters give a usable Kriging fit");
  return theta_of(res.best_point);
}

KrigingModel fit_kriging_mle(std::vector<UnitPoint> points, std::vector<double> responses,
                             int exponent, std::size_t budget) {
  auto theta = fit_hyperparameters(points, responses, exponent, budget);
  return KrigingModel::fit(std::move(points), std::move(responses), std::move(theta), exponent);
}

} // namespace kghdmr
