#include "kghdmr/sampling.hpp"

#include "kghdmr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace kghdmr {

std::vector<UnitPoint> lhs_sample(std::size_t n_dims, std::size_t n_points, std::uint64_t seed) {
  if (n_points < 1)
    throw ConfigError("lhs_sample needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<UnitPoint> pts(n_points, UnitPoint(n_dims));
  std::vector<std::size_t> perm(n_points);
  const double n = static_cast<double>(n_points);
  for (std::size_t d = 0; d < n_dims; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t j = 0; j < n_points; ++j) {
      const double stratum = static_cast<double>(perm[j]);
      // keep the point strictly inside its stratum's right end
      pts[j][d] = std::min((stratum + unif(rng)) / n, std::nextafter((stratum + 1.0) / n, 0.0));
    }
  }
  return pts;
}

namespace {

double pow3(int level) { return std::pow(3.0, -level); }

} // namespace

double Rectangle::side(std::size_t d) const { return pow3(levels.at(d)); }

double Rectangle::size() const {
  // Sum in a canonical order so rectangles with the same multiset of
  // levels compare exactly equal.
  std::vector<int> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  double s2 = 0.0;
  for (int l : sorted) {
    const double side = pow3(l);
    s2 += side * side;
  }
  return 0.5 * std::sqrt(s2);
}

double Rectangle::volume() const {
  double v = 1.0;
  for (int l : levels)
    v *= pow3(l);
  return v;
}

std::vector<std::size_t> potentially_optimal(std::span<const Rectangle> rects, double epsilon) {
  if (rects.empty())
    return {};

  // best rectangle per size class
  std::map<double, std::size_t> best;
  double f_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const auto &r = rects[k];
    f_min = std::min(f_min, r.f_rank);
    const double s = r.size();
    auto [it, inserted] = best.emplace(s, k);
    if (!inserted) {
      const auto &cur = rects[it->second];
      if (r.f_rank < cur.f_rank || (r.f_rank == cur.f_rank && r.id < cur.id))
        it->second = k;
    }
  }

  std::vector<std::pair<double, std::size_t>> classes(best.begin(), best.end());
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < classes.size(); ++a) {
    const double dj = classes[a].first;
    const double fj = rects[classes[a].second].f_rank;

    double k_low = 0.0;
    for (std::size_t b = 0; b < a; ++b) {
      const double di = classes[b].first;
      const double fi = rects[classes[b].second].f_rank;
      k_low = std::max(k_low, (fj - fi) / (dj - di));
    }
    double k_high = std::numeric_limits<double>::infinity();
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      const double di = classes[b].first;
      const double fi = rects[classes[b].second].f_rank;
      k_high = std::min(k_high, (fi - fj) / (di - dj));
    }
    if (k_low > k_high)
      continue;
    if (std::isfinite(k_high)) {
      if (!(k_high > 0.0))
        continue;
      // epsilon-improvement condition
      const bool ok = f_min != 0.0
                          ? epsilon <= (f_min - fj) / std::abs(f_min) + dj * k_high / std::abs(f_min)
                          : fj <= dj * k_high;
      if (!ok)
        continue;
    }
    out.push_back(classes[a].second);
  }
  return out;
}

std::vector<Rectangle> trisect(Rectangle &rect, const UnitFunction &f, std::size_t &next_id) {
  const std::size_t n = rect.center.size();
  const int min_level = *std::min_element(rect.levels.begin(), rect.levels.end());

  struct Split {
    std::size_t dim;
    UnitPoint lo, hi;
    double f_lo, f_hi;
  };
  std::vector<Split> splits;
  const double delta = pow3(min_level + 1);
  for (std::size_t d = 0; d < n; ++d) {
    if (rect.levels[d] != min_level)
      continue;
    Split s{d, rect.center, rect.center, 0.0, 0.0};
    s.lo[d] -= delta;
    s.hi[d] += delta;
    splits.push_back(std::move(s));
  }
  // evaluate the whole batch first, then apply in a fixed order
  for (auto &s : splits) {
    s.f_lo = f(s.lo);
    s.f_hi = f(s.hi);
  }

  auto rank = [](double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  std::stable_sort(splits.begin(), splits.end(), [&](const Split &a, const Split &b) {
    return std::min(rank(a.f_lo), rank(a.f_hi)) < std::min(rank(b.f_lo), rank(b.f_hi));
  });

  std::vector<Rectangle> children;
  for (auto &s : splits) {
    rect.levels[s.dim] += 1;
    children.push_back(Rectangle{std::move(s.lo), rect.levels, s.f_lo, s.f_lo, next_id++});
    children.push_back(Rectangle{std::move(s.hi), rect.levels, s.f_hi, s.f_hi, next_id++});
  }
  return children;
}

DirectResult direct_minimize(const UnitFunction &f, std::size_t n_dims, std::size_t budget,
                             const DirectOptions &options) {
  if (budget < 1)
    throw ConfigError("DIRECT needs a budget of at least one evaluation");
  if (n_dims < 1)
    throw ConfigError("DIRECT needs at least one dimension");

  DirectResult res;
  double worst_finite = -std::numeric_limits<double>::infinity();
  bool any_finite = false;

  auto record = [&](std::span<const double> x, double v) {
    ++res.evaluations;
    if (res.history.empty() || v < res.best_value) {
      res.best_value = v;
      res.best_point.assign(x.begin(), x.end());
    }
    res.history.push_back(res.best_value);
    if (std::isfinite(v)) {
      worst_finite = any_finite ? std::max(worst_finite, v) : v;
      any_finite = true;
    }
  };
  // Infeasible or failed points rank as the worst finite value seen so far.
  auto rank_of = [&](double v) {
    if (std::isfinite(v))
      return v;
    return any_finite ? worst_finite : std::numeric_limits<double>::max() / 4;
  };

  std::size_t next_id = 0;
  Rectangle root{UnitPoint(n_dims, 0.5), std::vector<int>(n_dims, 0), 0.0, 0.0, next_id++};
  root.f_center = f(root.center);
  record(root.center, root.f_center);
  root.f_rank = rank_of(root.f_center);
  res.rectangles.push_back(std::move(root));

  UnitFunction counted = [&](std::span<const double> x) {
    const double v = f(x);
    record(x, v);
    return v;
  };

  while (options.max_iterations == 0 || res.iterations < options.max_iterations) {
    const auto selected = potentially_optimal(res.rectangles, options.epsilon);
    bool progressed = false;
    std::vector<Rectangle> fresh;
    for (std::size_t idx : selected) {
      auto &rect = res.rectangles[idx];
      const int min_level = *std::min_element(rect.levels.begin(), rect.levels.end());
      const auto longest = static_cast<std::size_t>(
          std::count(rect.levels.begin(), rect.levels.end(), min_level));
      if (res.evaluations + 2 * longest > budget)
        break;
      auto children = trisect(rect, counted, next_id);
      for (auto &c : children)
        c.f_rank = rank_of(c.f_center);
      fresh.insert(fresh.end(), std::make_move_iterator(children.begin()),
                   std::make_move_iterator(children.end()));
      progressed = true;
    }
    res.rectangles.insert(res.rectangles.end(), std::make_move_iterator(fresh.begin()),
                          std::make_move_iterator(fresh.end()));
    if (!progressed)
      break;
    ++res.iterations;
  }
  return res;
}

} // namespace kghdmr
