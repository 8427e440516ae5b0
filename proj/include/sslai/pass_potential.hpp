#pragma once

// Potential-method pass scoring. The field is cut into a regular grid; each
// mask assigns a score per cell centre, masks are summed with weights, and
// the argmax cell is the passing position.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sslai/world_model.hpp"

namespace sslai {

/// Grid layout: `origin` is the lower-left corner of cell (0, 0). Cells are
/// stored row-major, row index along +y, column index along +x.
struct GridShape {
  Vec2 origin;
  double cell_size = 0.1;
  std::size_t cols = 0;
  std::size_t rows = 0;

  std::size_t size() const { return cols * rows; }
  std::size_t index(std::size_t col, std::size_t row) const { return row * cols + col; }

  Vec2 cell_center(std::size_t idx) const {
    const std::size_t col = idx % cols;
    const std::size_t row = idx / cols;
    return {origin.x + (static_cast<double>(col) + 0.5) * cell_size,
            origin.y + (static_cast<double>(row) + 0.5) * cell_size};
  }

  bool operator==(const GridShape&) const = default;

  /// Smallest grid of `cell_size` cells covering the field rectangle,
  /// centred on the field centre.
  static GridShape covering(const FieldGeometry& geo, double cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("GridShape: cell_size must be positive");
    GridShape s;
    s.cell_size = cell_size;
    s.cols = static_cast<std::size_t>(std::ceil(geo.length / cell_size - 1e-9));
    s.rows = static_cast<std::size_t>(std::ceil(geo.width / cell_size - 1e-9));
    s.origin = {-static_cast<double>(s.cols) * cell_size / 2.0, -static_cast<double>(s.rows) * cell_size / 2.0};
    return s;
  }
};

template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(GridShape shape, T fill = T{}) : shape_(shape), cells_(shape.size(), fill) {}

  const GridShape& shape() const { return shape_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  T& operator[](std::size_t i) { return cells_[i]; }
  const T& operator[](std::size_t i) const { return cells_[i]; }
  T& at(std::size_t col, std::size_t row) { return cells_.at(shape_.index(col, row)); }
  const T& at(std::size_t col, std::size_t row) const { return cells_.at(shape_.index(col, row)); }

  std::span<T> values() { return cells_; }
  std::span<const T> values() const { return cells_; }

  Vec2 cell_center(std::size_t i) const { return shape_.cell_center(i); }

  bool operator==(const Grid&) const = default;

 private:
  GridShape shape_;
  std::vector<T> cells_;
};

using ScoreGrid = Grid<double>;

/// The combined potential; same layout as its masks.
using PotentialGrid = ScoreGrid;

/// Ball as a point light source: a cell is dark (0) when an obstacle disc of
/// radius r_block intersects the ball-to-cell segment and the obstacle is
/// closer to the ball than the cell is. Everything else is lit (1).
inline ScoreGrid shadow_mask(const GridShape& shape, Vec2 ball, std::span<const Vec2> obstacles, double r_block) {
  if (!(r_block > 0.0)) throw std::invalid_argument("shadow_mask: r_block must be positive");
  ScoreGrid grid(shape, 1.0);
  if (obstacles.empty()) return grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2 c = shape.cell_center(i);
    const double cell_dist = distance(c, ball);
    for (const Vec2 o : obstacles) {
      if (distance(o, ball) < cell_dist && point_segment_distance(o, ball, c) < r_block) {
        grid[i] = 0.0;
        break;
      }
    }
  }
  return grid;
}

/// Affine ramp along `direction`: from_value at the rearmost cell centre,
/// to_value at the frontmost.
inline ScoreGrid gradient_mask(const GridShape& shape, double from_value, double to_value, Vec2 direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("gradient_mask: zero direction");
  const Vec2 u = direction / n;
  ScoreGrid grid(shape, from_value);
  if (grid.empty()) return grid;
  const std::size_t corners[4] = {0, shape.cols - 1, shape.size() - shape.cols, shape.size() - 1};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t c : corners) {
    const double p = shape.cell_center(c).dot(u);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = span > 0.0 ? (shape.cell_center(i).dot(u) - lo) / span : 0.0;
    grid[i] = from_value + (to_value - from_value) * t;
  }
  return grid;
}

/// Negative crowding: each point contributes -(1 - d/falloff) inside its
/// falloff radius, so the emptiest cells score highest (zero).
inline ScoreGrid crowd_mask(const GridShape& shape, std::span<const Vec2> points, double falloff) {
  if (!(falloff > 0.0)) throw std::invalid_argument("crowd_mask: falloff must be positive");
  ScoreGrid grid(shape, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2 c = shape.cell_center(i);
    double crowd = 0.0;
    for (const Vec2 p : points) {
      const double d = distance(c, p);
      if (d < falloff) crowd += 1.0 - d / falloff;
    }
    grid[i] = -crowd;
  }
  return grid;
}

struct WeightedMask {
  const ScoreGrid* grid = nullptr;
  double weight = 1.0;
};

/// Per-cell weighted sum. All masks must share one shape.
inline PotentialGrid combine_masks(std::span<const WeightedMask> masks) {
  if (masks.empty()) throw std::invalid_argument("combine_masks: no masks");
  const GridShape& shape = masks.front().grid->shape();
  PotentialGrid out(shape, 0.0);
  for (const auto& m : masks) {
    if (!(m.grid->shape() == shape)) throw std::invalid_argument("combine_masks: shape mismatch");
    if (!std::isfinite(m.weight)) throw std::invalid_argument("combine_masks: non-finite weight");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m.weight * (*m.grid)[i];
  }
  return out;
}

class NoFeasibleCell : public std::runtime_error {
 public:
  NoFeasibleCell() : std::runtime_error("no feasible cell") {}
};

struct Exclusion {
  Vec2 center;
  double radius = 0.0;
};

inline bool cell_excluded(Vec2 c, std::span<const Exclusion> exclusions, const FieldGeometry& geo) {
  if (in_penalty_area(c, Team::Ours, geo) || in_penalty_area(c, Team::Theirs, geo)) return true;
  for (const auto& e : exclusions)
    if (distance(c, e.center) < e.radius) return true;
  return false;
}

/// Row-major index of the best feasible cell; ties go to the lowest index.
inline std::size_t best_cell_index(const PotentialGrid& grid, std::span<const Exclusion> exclusions,
                                   const FieldGeometry& geo) {
  if (grid.empty()) throw std::invalid_argument("best_cell: empty grid");
  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (best < grid.size() && !(grid[i] > grid[best])) continue;
    if (cell_excluded(grid.cell_center(i), exclusions, geo)) continue;
    best = i;
  }
  if (best == grid.size()) throw NoFeasibleCell();
  return best;
}

/// Centre of the best cell outside every exclusion disc and both penalty areas.
inline Vec2 best_cell(const PotentialGrid& grid, std::span<const Exclusion> exclusions, const FieldGeometry& geo) {
  return grid.cell_center(best_cell_index(grid, exclusions, geo));
}

/// Up to `count` best cells, each at least `separation` from the earlier
/// picks. Stops early when the grid runs out of feasible cells.
inline std::vector<Vec2> ranked_cells(const PotentialGrid& grid, std::vector<Exclusion> exclusions,
                                      const FieldGeometry& geo, std::size_t count, double separation) {
  std::vector<Vec2> picks;
  picks.reserve(count);
  while (picks.size() < count) {
    try {
      const Vec2 c = best_cell(grid, exclusions, geo);
      picks.push_back(c);
      exclusions.push_back({c, separation});
    } catch (const NoFeasibleCell&) {
      break;
    }
  }
  return picks;
}

}  // namespace sslai
