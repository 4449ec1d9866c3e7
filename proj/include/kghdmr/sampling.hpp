#pragma once

#include "kghdmr/design_space.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kghdmr {

/// Latin hypercube design on [0,1)^n_dims: along every dimension exactly one
/// point falls in each stratum [j/n, (j+1)/n).
std::vector<UnitPoint> lhs_sample(std::size_t n_dims, std::size_t n_points, std::uint64_t seed);

using UnitFunction = std::function<double(std::span<const double>)>;

/// Hyper-rectangle of the DIRECT partition. Side lengths are 3^-level[d].
struct Rectangle {
  UnitPoint center;
  std::vector<int> levels;
  double f_center = 0.0;
  // f_center with non-finite values replaced; used for hull selection
  double f_rank = 0.0;
  std::size_t id = 0;

  double side(std::size_t d) const;
  double half_width(std::size_t d) const { return 0.5 * side(d); }
  /// Center-to-vertex distance.
  double size() const;
  double volume() const;
};

/// Indices of the potentially optimal rectangles: one per size class (lowest
/// f, then lowest id) lying on the lower-right convex hull of (size, f) and
/// satisfying the epsilon-improvement condition.
std::vector<std::size_t> potentially_optimal(std::span<const Rectangle> rects, double epsilon);

/// Trisects `rect` along all of its longest sides. The dimension whose new
/// centers hold the best value is split first, so its children keep the
/// largest extent. `rect` is shrunk in place; the new children are returned
/// in creation order.
std::vector<Rectangle> trisect(Rectangle &rect, const UnitFunction &f, std::size_t &next_id);

struct DirectResult {
  UnitPoint best_point;
  double best_value = 0.0;
  // best value after each evaluation
  std::vector<double> history;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::vector<Rectangle> rectangles;
};

struct DirectOptions {
  double epsilon = 1e-4;
  std::size_t max_iterations = 0; // 0 = until the budget is spent
};

/// Minimizes f over [0,1]^n_dims with at most `budget` evaluations. A
/// trisection is only started when its evaluations fit in the budget, so
/// the partition always tiles the cube.
DirectResult direct_minimize(const UnitFunction &f, std::size_t n_dims, std::size_t budget,
                             const DirectOptions &options = {});

} // namespace kghdmr
