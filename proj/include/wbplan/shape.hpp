#pragma once

#include "wbplan/gridmap.hpp"
#include "wbplan/types.hpp"

#include <string_view>

namespace wbplan {

/// Simple polygon robot footprint. Vertices are stored relative to the
/// reference point, so the body frame origin is the rotation center.
class RobotShape {
 public:
  /// Throws GeometryError for fewer than three vertices, self-intersection,
  /// zero area, or a reference point not strictly inside the polygon.
  RobotShape(std::vector<Vec2> vertices, const Vec2& reference);
  /// Reference point defaults to the area centroid.
  explicit RobotShape(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec2& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  /// Reference point in the coordinates the shape was defined in.
  const Vec2& reference() const { return reference_; }

  double inscribed_radius() const { return inscribed_radius_; }
  double circumradius() const { return circumradius_; }
  Vec2 aabb_min() const { return aabb_min_; }
  Vec2 aabb_max() const { return aabb_max_; }

  /// Order of the rotational symmetry about the reference (1 when none, at most 12).
  int symmetry_order() const { return symmetry_order_; }

  /// Nonzero winding number of the body-frame point.
  int winding_number(const Vec2& q) const;

  /// Body-frame polygon placed at a world pose.
  std::vector<Vec2> outline(const Pose2& pose) const;

 private:
  std::vector<Vec2> vertices_;
  Vec2 reference_;
  double inscribed_radius_{0.0};
  double circumradius_{0.0};
  Vec2 aabb_min_, aabb_max_;
  int symmetry_order_{1};
};

RobotShape load_shape(std::string_view document);
RobotShape load_shape_file(const std::string& path);

double inscribed_radius(const RobotShape& shape);

/// Signed distance from a body-frame point to the polygon boundary,
/// negative inside. Points within 1e-12 of the boundary return +0.
double body_sdf(const RobotShape& shape, const Vec2& q);

struct SdfSample {
  double value{0.0};
  Vec2 gradient{Vec2::Zero()};
};

/// Exact signed distance plus its gradient (unit vector away from the
/// nearest boundary point, pointing outward on the exterior).
SdfSample body_sdf_gradient(const RobotShape& shape, const Vec2& q);

/// Signed distances sampled at cell centers over the polygon AABB plus padding.
class BodyEsdf {
 public:
  BodyEsdf(const RobotShape& shape, double resolution, double padding);

  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }
  int cols() const { return static_cast<int>(values_.rows()); }
  int rows() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }

  Vec2 node_center(int i, int j) const {
    return origin_ + resolution_ * Vec2(i + 0.5, j + 0.5);
  }
  /// True when q lies inside the hull of sampled cell centers.
  bool contains(const Vec2& q) const;

  /// Bilinear value and finite-difference gradient; throws OutOfWindowError.
  SdfSample sample(const Vec2& q) const;

 private:
  double resolution_;
  Vec2 origin_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd grad_x_;
  Eigen::MatrixXd grad_y_;
};

BodyEsdf build_body_esdf(const RobotShape& shape, double resolution, double padding);

/// SDF value and world-frame gradient for a world obstacle point against the
/// robot placed at `pose`; the gradient is the steepest-ascent direction as the
/// obstacle point moves in the world.
SdfSample sdf_gradient_world(const BodyEsdf& esdf, const Vec2& x_obs, const Pose2& pose);

/// Per-orientation rasterized footprints at map resolution.
class RobotKernel {
 public:
  RobotKernel(const RobotShape& shape, int n_orientations, double resolution);

  int n_orientations() const { return static_cast<int>(footprints_.size()); }
  double angular_step() const { return 2.0 * std::numbers::pi / n_orientations(); }
  double resolution() const { return resolution_; }
  double yaw(int k) const { return k * angular_step(); }
  /// Smallest yaw change that leaves the body unchanged.
  double yaw_period() const { return yaw_period_; }
  /// Index of the orientation closest to the given yaw.
  int nearest_index(double yaw) const;
  const std::vector<Cell>& footprint(int k) const { return footprints_.at(k); }

 private:
  double resolution_;
  double yaw_period_;
  std::vector<std::vector<Cell>> footprints_;
};

RobotKernel build_kernel(const RobotShape& shape, int n_orientations, double resolution);

/// Boolean convolution of the footprint at orientation k with the map, the
/// reference placed at the center of the cell containing p.
bool kernel_collides(const RobotKernel& kernel, const OccupancyGrid& grid, const Vec2& p, int k);

}  // namespace wbplan
