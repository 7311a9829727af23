#pragma once

#include "wbplan/gridmap.hpp"
#include "wbplan/minco.hpp"
#include "wbplan/shape.hpp"

namespace wbplan {

/// Pose of an SE(2) trajectory (x, y, yaw) at time t.
Pose2 pose_at(const Trajectory& traj, double t);

struct SweptQueryResult {
  double value{0.0};
  double t_star{0.0};
  bool refined{false};
};

struct SweptOptions {
  /// Map resolution; the coarse time step keeps the body SDF within resolution/2 between samples.
  double resolution{0.05};
  /// Golden-section termination width in seconds.
  double time_tolerance{1e-11};
  int max_samples{20000};
};

/// Coarse pose table over a time window, shared by many swept-SDF queries
/// against the same trajectory. Keeps references to the trajectory and shape.
class SweptSampler {
 public:
  SweptSampler(const Trajectory& traj, const RobotShape& shape, SweptOptions options = {});
  SweptSampler(const Trajectory& traj, const RobotShape& shape, double t0, double t1,
               SweptOptions options = {});

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double dt() const { return dt_; }
  /// Bound on |d/dt body_sdf(...)| for any query point.
  double lipschitz() const { return lipschitz_; }
  std::size_t samples() const { return times_.size(); }

  /// min over the window of body_sdf(R(yaw(t))^T (x - pos(t))).
  SweptQueryResult query(const Vec2& x) const;
  /// Same, but returns the coarse minimum unrefined as soon as a Lipschitz
  /// lower bound proves the true minimum is at least `cutoff`.
  SweptQueryResult query(const Vec2& x, double cutoff) const;

  /// Coarse lower bound on the swept SDF from the sampled positions alone.
  double distance_lower_bound(const Vec2& x) const;

  double eval(const Vec2& x, double t) const;

 private:
  const Trajectory* traj_;
  const RobotShape* shape_;
  SweptOptions options_;
  double t0_{0.0}, t1_{0.0}, dt_{0.0}, lipschitz_{0.0}, speed_{0.0};
  std::vector<double> times_;
  std::vector<Vec2> positions_;
  std::vector<Mat2> rotations_;
};

SweptQueryResult swept_sdf(const Trajectory& traj, const RobotShape& shape, const Vec2& x_obs,
                           double t0, double t1, SweptOptions options = {});
SweptQueryResult swept_sdf(const Trajectory& traj, const RobotShape& shape, const Vec2& x_obs,
                           SweptOptions options = {});

struct CollisionWitness {
  Vec2 point;
  double t_star{0.0};
  double depth{0.0};  ///< margin minus swept SDF, positive
};

struct CollisionInterval {
  double t_begin{0.0};
  double t_end{0.0};
  Vec2 witness;       ///< deepest point of the interval
  double depth{0.0};  ///< its depth
  std::vector<CollisionWitness> points;
};

struct CollisionReport {
  std::vector<CollisionInterval> intervals;
  bool clear() const { return intervals.empty(); }
};

/// Swept-volume check of every occupied cell center near the trajectory.
CollisionReport continuous_check(const Trajectory& traj, const RobotShape& shape,
                                 const OccupancyGrid& grid, double margin = 0.0);

/// Robot outlines at n uniformly spaced times (t = 0 alone when n == 1).
std::vector<std::vector<Vec2>> swept_boundary_samples(const Trajectory& traj,
                                                      const RobotShape& shape, int n);

/// Upper bounds of speed and yaw rate, from dense sampling of each piece.
std::pair<double, double> rate_bounds(const Trajectory& traj);

}  // namespace wbplan
