#pragma once

#include "wbplan/types.hpp"

#include <optional>
#include <string_view>

namespace wbplan {

/// 2D boolean occupancy field. Cell (ix, iy) spans
/// [origin + ix*res, origin + (ix+1)*res) along x, likewise along y.
/// Immutable once built except through the explicit setters used while loading.
class OccupancyGrid {
 public:
  using CellArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

  OccupancyGrid(int width, int height, double resolution, Vec2 origin = Vec2::Zero());

  int width() const { return static_cast<int>(cells_.rows()); }
  int height() const { return static_cast<int>(cells_.cols()); }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }
  const CellArray& cells() const { return cells_; }

  bool in_bounds(const Cell& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.x() < width() && c.y() < height();
  }
  bool in_bounds(const Vec2& p) const { return in_bounds(world_to_cell(p)); }

  bool occupied(int ix, int iy) const { return cells_(ix, iy); }
  bool occupied(const Cell& c) const { return cells_(c.x(), c.y()); }
  /// Out-of-bounds cells count as occupied.
  bool occupied_or_outside(const Cell& c) const { return !in_bounds(c) || occupied(c); }

  void set(int ix, int iy, bool value) { cells_(ix, iy) = value; }
  void set(const Cell& c, bool value) { cells_(c.x(), c.y()) = value; }

  Cell world_to_cell(const Vec2& p) const;
  Vec2 cell_center(const Cell& c) const;
  Vec2 cell_center(int ix, int iy) const { return cell_center(Cell(ix, iy)); }

  /// World extent [min, max] of the whole grid.
  Vec2 lower_corner() const { return origin_; }
  Vec2 upper_corner() const { return origin_ + resolution_ * Vec2(width(), height()); }

  long occupied_count() const { return cells_.count(); }

  bool operator==(const OccupancyGrid& other) const;

 private:
  CellArray cells_;
  double resolution_;
  Vec2 origin_;
};

/// Parses the text map format:
///   resolution: <f>
///   origin: <x> <y>
///   <raster rows, '#' occupied, '.' free; first row is the top (max y)>
OccupancyGrid load_map(std::string_view document);
OccupancyGrid load_map_file(const std::string& path);
std::string save_map(const OccupancyGrid& grid);

/// Marks every cell whose center lies within `radius` of an occupied cell center.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

/// Occupied cell centers inside the closed box center +- half_extent.
std::vector<Vec2> extract_obstacles(const OccupancyGrid& grid, const Vec2& center,
                                    double half_extent);

/// Cells touched by the closed segment a-b, ordered along the segment.
/// Cells touched only at a corner or along an edge are included.
std::vector<Cell> supercover(const OccupancyGrid& grid, const Vec2& a, const Vec2& b);

struct Visibility {
  bool visible{true};
  Vec2 blocked_at{Vec2::Zero()};  ///< center of the first occupied cell along a->b

  explicit operator bool() const { return visible; }
};

Visibility visibility(const OccupancyGrid& grid, const Vec2& a, const Vec2& b);

/// Convenience for callers that only need the verdict.
inline bool is_visible(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
  return visibility(grid, a, b).visible;
}

}  // namespace wbplan
