#pragma once

#include "wbplan/gridmap.hpp"
#include "wbplan/shape.hpp"

#include <cstdint>
#include <limits>

namespace wbplan {

enum class Provenance { Start, Goal, Pushed, Passthrough };

struct Se2Waypoint {
  Vec2 position;
  double yaw{0.0};
  Provenance provenance{Provenance::Passthrough};
  bool safe{true};
};

struct Se2Path {
  std::vector<Se2Waypoint> waypoints;

  Polyline positions() const;
  double length() const { return polyline_length(positions()); }
};

/// Visibility roadmap. Vertex 0 is the start, vertex 1 the goal.
struct Roadmap {
  enum class Role { Guard, Connector };

  std::vector<Vec2> vertices;
  std::vector<Role> roles;
  std::vector<std::vector<int>> adjacency;

  int add_vertex(const Vec2& p, Role role);
  void add_edge(int a, int b);
  bool has_edge(int a, int b) const;
  /// Breadth-first reachability between two vertices.
  bool connected(int a, int b) const;
};

struct RoadmapOptions {
  int budget{500};
  /// Visibility edges longer than this are not considered; infinity disables the limit.
  double connection_radius{std::numeric_limits<double>::infinity()};
  std::uint64_t seed{1};
};

/// Guard/connector visibility roadmap over the free cells of an inflated grid.
/// Throws InfeasibleEndpointError when start or goal is occupied or outside.
Roadmap build_roadmap(const OccupancyGrid& inflated, const Vec2& start, const Vec2& goal,
                      const RoadmapOptions& options = {});

/// Simple start-to-goal paths by depth-first search, shortest first.
std::vector<Polyline> extract_paths(const Roadmap& roadmap, int max_paths, int max_vertices = 16);

struct PushResult {
  Pose2 state;
  bool safe{false};
  int attempts{0};
};

/// Gradient push of a pose out of nearby obstacles (see README for the update rule).
/// yaw_step is the trial rotation per attempt; zero disables yaw changes.
PushResult push_away(const RobotShape& shape, const BodyEsdf& esdf, const Pose2& state,
                     const OccupancyGrid& grid, double margin, int max_attempts, double yaw_step);

/// theta_a + wrap(theta_b - theta_a) * (3s^2 - 2s^3), wrapped into (-pi, pi].
double orientation_interp(double theta_a, double theta_b, double s);

struct ShortcutOptions {
  double margin{-1.0};  ///< negative selects the map resolution
  int max_attempts{20};
};

/// Geometry-aware shortcut of a point path. Visibility is tested on the
/// inflated grid, pushes act against the raw grid.
Se2Path shortcut(const Polyline& path, const RobotShape& shape, const BodyEsdf& esdf,
                 const OccupancyGrid& inflated, const OccupancyGrid& raw, const RobotKernel& kernel,
                 const ShortcutOptions& options = {});

/// Uniform points at arc fractions k/n, k = 0..n.
Polyline resample_uniform(const Polyline& path, int n);

/// Points along a polyline no more than `step` apart, keeping every vertex.
Polyline discretize(const Polyline& path, double step);

bool uvd_equivalent(const Polyline& a, const Polyline& b, const OccupancyGrid& grid);

/// Indices of the shortest representative of each equivalence class, ties by input order.
std::vector<std::size_t> dedup_indices(const std::vector<Polyline>& paths, const OccupancyGrid& grid);
std::vector<Polyline> dedup_paths(const std::vector<Polyline>& paths, const OccupancyGrid& grid);
std::vector<Se2Path> dedup_paths(const std::vector<Se2Path>& paths, const OccupancyGrid& grid);

}  // namespace wbplan
