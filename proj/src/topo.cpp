#include "wbplan/topo.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

namespace wbplan {

Polyline Se2Path::positions() const {
  Polyline out;
  out.reserve(waypoints.size());
  for (const auto& w : waypoints) out.push_back(w.position);
  return out;
}

int Roadmap::add_vertex(const Vec2& p, Role role) {
  vertices.push_back(p);
  roles.push_back(role);
  adjacency.emplace_back();
  return static_cast<int>(vertices.size()) - 1;
}

void Roadmap::add_edge(int a, int b) {
  if (a == b || has_edge(a, b)) return;
  adjacency[a].push_back(b);
  adjacency[b].push_back(a);
}

bool Roadmap::has_edge(int a, int b) const {
  const auto& adj = adjacency.at(a);
  return std::find(adj.begin(), adj.end(), b) != adj.end();
}

bool Roadmap::connected(int a, int b) const {
  std::vector<char> seen(vertices.size(), 0);
  std::deque<int> queue{a};
  seen[a] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (v == b) return true;
    for (int w : adjacency[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return false;
}

namespace {

bool free_point(const OccupancyGrid& grid, const Vec2& p) {
  return grid.in_bounds(p) && !grid.occupied(grid.world_to_cell(p));
}

}  // namespace

Roadmap build_roadmap(const OccupancyGrid& inflated, const Vec2& start, const Vec2& goal,
                      const RoadmapOptions& options) {
  if (!free_point(inflated, start)) throw InfeasibleEndpointError("start lies in an inflated obstacle");
  if (!free_point(inflated, goal)) throw InfeasibleEndpointError("goal lies in an inflated obstacle");
  if (options.budget < 0) throw ArgumentError("sample budget must be non-negative");

  Roadmap map;
  std::vector<int> guards{map.add_vertex(start, Roadmap::Role::Guard),
                          map.add_vertex(goal, Roadmap::Role::Guard)};
  const double radius = options.connection_radius;
  auto sees = [&](const Vec2& a, const Vec2& b) {
    return (a - b).norm() <= radius && is_visible(inflated, a, b);
  };
  if (sees(start, goal)) map.add_edge(0, 1);

  std::mt19937_64 rng(options.seed);
  const Vec2 lo = inflated.lower_corner(), hi = inflated.upper_corner();
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());

  for (int iter = 0; iter < options.budget; ++iter) {
    const Vec2 p(ux(rng), uy(rng));
    if (!free_point(inflated, p)) continue;

    std::vector<int> visible;
    for (int g : guards) {
      if (sees(p, map.vertices[g])) {
        visible.push_back(g);
        if (visible.size() > 2) break;
      }
    }
    if (visible.empty()) {
      guards.push_back(map.add_vertex(p, Roadmap::Role::Guard));
      continue;
    }
    if (visible.size() != 2) continue;

    // A connector between the same two guards is redundant when the two
    // detours are deformable into each other; keep the shorter one.
    const int g1 = visible[0], g2 = visible[1];
    const Polyline candidate{map.vertices[g1], p, map.vertices[g2]};
    bool redundant = false;
    for (int c : map.adjacency[g1]) {
      if (map.roles[c] != Roadmap::Role::Connector || !map.has_edge(c, g2)) continue;
      const Polyline existing{map.vertices[g1], map.vertices[c], map.vertices[g2]};
      if (uvd_equivalent(existing, candidate, inflated)) {
        if (polyline_length(candidate) < polyline_length(existing)) map.vertices[c] = p;
        redundant = true;
        break;
      }
    }
    if (!redundant) {
      const int c = map.add_vertex(p, Roadmap::Role::Connector);
      map.add_edge(c, g1);
      map.add_edge(c, g2);
    }
  }
  return map;
}

std::vector<Polyline> extract_paths(const Roadmap& roadmap, int max_paths, int max_vertices) {
  if (max_paths < 1) throw ArgumentError("max_paths must be at least 1");
  constexpr std::size_t kRawCap = 256;
  constexpr long kExpansionCap = 200000;

  std::vector<std::vector<int>> found;
  std::vector<int> stack{0};
  std::vector<char> on_path(roadmap.vertices.size(), 0);
  on_path[0] = 1;
  long expansions = 0;

  auto dfs = [&](auto&& self, int v) -> void {
    if (found.size() >= kRawCap || ++expansions > kExpansionCap) return;
    if (v == 1) {
      found.push_back(stack);
      return;
    }
    if (static_cast<int>(stack.size()) >= max_vertices) return;
    for (int w : roadmap.adjacency[v]) {
      if (on_path[w]) continue;
      on_path[w] = 1;
      stack.push_back(w);
      self(self, w);
      stack.pop_back();
      on_path[w] = 0;
    }
  };
  if (!roadmap.vertices.empty()) dfs(dfs, 0);

  std::vector<Polyline> paths;
  paths.reserve(found.size());
  for (const auto& ids : found) {
    Polyline p;
    for (int id : ids) p.push_back(roadmap.vertices[id]);
    paths.push_back(std::move(p));
  }
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return polyline_length(paths[a]) < polyline_length(paths[b]);
  });
  std::vector<Polyline> out;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(out.size()) < max_paths; ++i)
    out.push_back(paths[order[i]]);
  return out;
}

namespace {

// Obstacle points close enough to matter for a pose, with their exact distances.
double min_clearance(const RobotShape& shape, const OccupancyGrid& grid, const Pose2& pose,
                     double margin) {
  const auto obstacles =
      extract_obstacles(grid, pose.position, shape.circumradius() + margin + grid.resolution());
  const Mat2 rt = rotation(pose.yaw).transpose();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : obstacles) worst = std::min(worst, body_sdf(shape, rt * (x - pose.position)));
  return worst;
}

}  // namespace

PushResult push_away(const RobotShape& shape, const BodyEsdf& esdf, const Pose2& state,
                     const OccupancyGrid& grid, double margin, int max_attempts, double yaw_step) {
  if (margin < 0.0) throw ArgumentError("margin must be non-negative");
  if (max_attempts < 1) throw ArgumentError("max_attempts must be at least 1");
  const double half = shape.circumradius() + margin + grid.resolution();
  const double step_cap = grid.resolution();

  PushResult result{state, false, 0};
  while (true) {
    const Pose2& pose = result.state;
    const auto obstacles = extract_obstacles(grid, pose.position, half);
    const Mat2 r = rotation(pose.yaw);
    Vec2 push = Vec2::Zero();
    bool safe = true;
    for (const auto& x : obstacles) {
      const Vec2 q = r.transpose() * (x - pose.position);
      const double value = body_sdf(shape, q);
      if (value >= margin) continue;
      safe = false;
      if (!esdf.contains(q)) continue;
      push -= (margin - value) * (r * esdf.sample(q).gradient);
    }
    if (safe) {
      result.safe = true;
      return result;
    }
    if (result.attempts >= max_attempts) return result;
    ++result.attempts;

    const double norm = push.norm();
    if (norm > step_cap) push *= step_cap / norm;
    result.state.position += push;

    if (yaw_step > 0.0) {
      const Pose2 here = result.state;
      double best = min_clearance(shape, grid, here, margin);
      for (double d : {-yaw_step, yaw_step}) {
        const Pose2 trial{here.position, here.yaw + d};
        const double c = min_clearance(shape, grid, trial, margin);
        if (c > best) {
          best = c;
          result.state.yaw = trial.yaw;
        }
      }
    }
  }
}

double orientation_interp(double theta_a, double theta_b, double s) {
  const double delta = wrap_angle(theta_b - theta_a);
  return wrap_angle(theta_a + delta * (3.0 * s * s - 2.0 * s * s * s));
}

Polyline resample_uniform(const Polyline& path, int n) {
  if (path.empty()) throw ArgumentError("cannot resample an empty path");
  if (n < 1) throw ArgumentError("need at least one interval");
  std::vector<double> arc(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) arc[i] = arc[i - 1] + (path[i] - path[i - 1]).norm();
  const double total = arc.back();
  Polyline out;
  out.reserve(n + 1);
  std::size_t seg = 0;
  for (int k = 0; k <= n; ++k) {
    const double target = total * k / n;
    while (seg + 2 < path.size() && arc[seg + 1] < target) ++seg;
    if (path.size() == 1 || total == 0.0) {
      out.push_back(path.front());
      continue;
    }
    const double len = arc[seg + 1] - arc[seg];
    const double f = len > 0.0 ? std::clamp((target - arc[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(path[seg] + f * (path[seg + 1] - path[seg]));
  }
  out.back() = path.back();
  return out;
}

Polyline discretize(const Polyline& path, double step) {
  if (!(step > 0.0)) throw ArgumentError("discretization step must be positive");
  Polyline out;
  if (path.empty()) return out;
  out.push_back(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 a = path[i - 1], b = path[i];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    const int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
    for (int k = 1; k <= n; ++k) out.push_back(a + (b - a) * (double(k) / n));
  }
  return out;
}

namespace {

double heading(const Vec2& from, const Vec2& to) {
  const Vec2 d = to - from;
  return std::atan2(d.y(), d.x());
}

bool coincident(const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-9; }

}  // namespace

Se2Path shortcut(const Polyline& path, const RobotShape& shape, const BodyEsdf& esdf,
                 const OccupancyGrid& inflated, const OccupancyGrid& raw, const RobotKernel& kernel,
                 const ShortcutOptions& options) {
  if (path.size() < 2) throw ArgumentError("shortcut needs at least two points");
  for (const Vec2& p : {path.front(), path.back()}) {
    if (!inflated.in_bounds(p) || inflated.occupied(inflated.world_to_cell(p)))
      throw InfeasibleEndpointError("path endpoint lies in an inflated obstacle");
  }
  const double res = inflated.resolution();
  const double margin = options.margin < 0.0 ? res : options.margin;
  const Polyline pd = discretize(path, res);
  const std::size_t n = pd.size();

  auto free_at = [&](const Vec2& p, double yaw) {
    return !kernel_collides(kernel, raw, p, kernel.nearest_index(yaw));
  };
  Se2Path out;
  if (n < 2) {
    out.waypoints = {{path.front(), 0.0, Provenance::Start, free_at(path.front(), 0.0)},
                     {path.back(), 0.0, Provenance::Goal, free_at(path.back(), 0.0)}};
    return out;
  }
  // Tangent heading at discretized point j (direction of the edge ending there).
  auto tangent = [&](std::size_t j) {
    return j == 0 ? heading(pd[0], pd[1]) : heading(pd[j - 1], pd[j]);
  };
  out.waypoints.push_back({pd[0], tangent(0), Provenance::Start, free_at(pd[0], tangent(0))});

  for (std::size_t j = 1; j < n; ++j) {
    const Se2Waypoint back = out.waypoints.back();
    const Visibility vis = visibility(inflated, back.position, pd[j]);
    if (vis) continue;

    const Vec2 chord = pd[j] - back.position;
    const double s = chord.squaredNorm() > 0.0
                         ? std::clamp((vis.blocked_at - back.position).dot(chord) / chord.squaredNorm(), 0.0, 1.0)
                         : 0.0;
    const double seed = orientation_interp(back.yaw, tangent(j), s);
    const PushResult pushed = push_away(shape, esdf, {vis.blocked_at, seed}, raw, margin,
                                        options.max_attempts, kernel.angular_step() / 4.0);
    const Vec2 p = pushed.state.position;
    if (inflated.in_bounds(p) && !coincident(p, back.position) && is_visible(inflated, back.position, p) &&
        (is_visible(inflated, p, pd[j]) || is_visible(inflated, p, pd[j - 1]))) {
      out.waypoints.push_back({p, wrap_angle(pushed.state.yaw), Provenance::Pushed, pushed.safe});
    }
    // Keep consecutive waypoints mutually visible.
    if (!is_visible(inflated, out.waypoints.back().position, pd[j]) &&
        !coincident(pd[j - 1], out.waypoints.back().position)) {
      out.waypoints.push_back(
          {pd[j - 1], tangent(j - 1), Provenance::Passthrough, free_at(pd[j - 1], tangent(j - 1))});
    }
  }

  if (coincident(out.waypoints.back().position, pd.back()) && out.waypoints.size() > 1) {
    Se2Waypoint& last = out.waypoints.back();
    last.provenance = Provenance::Goal;
    last.position = pd.back();
    last.safe = free_at(last.position, last.yaw);
  } else {
    out.waypoints.push_back({pd.back(), tangent(n - 1), Provenance::Goal, free_at(pd.back(), tangent(n - 1))});
  }
  return out;
}

bool uvd_equivalent(const Polyline& a, const Polyline& b, const OccupancyGrid& grid) {
  if (a.empty() || b.empty()) throw ArgumentError("empty path");
  if (!coincident(a.front(), b.front()) || !coincident(a.back(), b.back()))
    throw ArgumentError("paths do not share endpoints");
  const double len = std::max(polyline_length(a), polyline_length(b));
  const int n = std::max(1, static_cast<int>(std::ceil(len / grid.resolution())));
  const Polyline sa = resample_uniform(a, n), sb = resample_uniform(b, n);
  for (int k = 0; k <= n; ++k) {
    if (!is_visible(grid, sa[k], sb[k])) return false;
  }
  return true;
}

std::vector<std::size_t> dedup_indices(const std::vector<Polyline>& paths, const OccupancyGrid& grid) {
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> lengths(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) lengths[i] = polyline_length(paths[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool duplicate = false;
    for (std::size_t k : kept) {
      if (uvd_equivalent(paths[k], paths[i], grid)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(i);
  }
  return kept;
}

std::vector<Polyline> dedup_paths(const std::vector<Polyline>& paths, const OccupancyGrid& grid) {
  std::vector<Polyline> out;
  for (std::size_t i : dedup_indices(paths, grid)) out.push_back(paths[i]);
  return out;
}

std::vector<Se2Path> dedup_paths(const std::vector<Se2Path>& paths, const OccupancyGrid& grid) {
  std::vector<Polyline> points;
  points.reserve(paths.size());
  for (const auto& p : paths) points.push_back(p.positions());
  std::vector<Se2Path> out;
  for (std::size_t i : dedup_indices(points, grid)) out.push_back(paths[i]);
  return out;
}

}  // namespace wbplan
