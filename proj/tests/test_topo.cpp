#include "doctest.h"
#include "oracles.hpp"

#include "wbplan/topo.hpp"

#include <queue>

using namespace wbplan;

namespace {

const std::string kFixtures = FIXTURE_DIR;

RobotShape unit_square() {
  return RobotShape({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, Vec2::Zero());
}

RobotShape small_rect() { return load_shape_file(kFixtures + "/small_rect.shape"); }

/// Free cells reachable from a cell by 4-connected flood fill.
bool free_connected(const OccupancyGrid& g, const Cell& a, const Cell& b) {
  std::vector<char> seen(g.width() * g.height(), 0);
  std::queue<Cell> q;
  q.push(a);
  seen[a.x() + g.width() * a.y()] = 1;
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop();
    if (c == b) return true;
    for (const Cell d : {Cell(1, 0), Cell(-1, 0), Cell(0, 1), Cell(0, -1)}) {
      const Cell n = c + d;
      if (!g.in_bounds(n) || g.occupied(n) || seen[n.x() + g.width() * n.y()]) continue;
      seen[n.x() + g.width() * n.y()] = 1;
      q.push(n);
    }
  }
  return false;
}

}  // namespace

TEST_CASE("roadmap in open space connects start and goal directly") {
  OccupancyGrid g(20, 20, 0.1);
  const Roadmap r = build_roadmap(g, Vec2(0.3, 0.3), Vec2(1.7, 1.6));
  CHECK(r.has_edge(0, 1));
  const auto paths = extract_paths(r, 8);
  REQUIRE_FALSE(paths.empty());
  CHECK(paths.front().size() == 2);
}

TEST_CASE("roadmap rejects occupied endpoints") {
  OccupancyGrid g(20, 20, 0.1);
  g.set(15, 15, true);
  const OccupancyGrid inflated = inflate(g, 0.15);
  CHECK_THROWS_AS(build_roadmap(inflated, Vec2(0.3, 0.3), Vec2(1.55, 1.55)), InfeasibleEndpointError);
  CHECK_THROWS_AS(build_roadmap(inflated, Vec2(-0.3, 0.3), Vec2(1.0, 1.0)), InfeasibleEndpointError);
}

TEST_CASE("a full wall separates the roadmap") {
  OccupancyGrid g(20, 20, 0.1);
  for (int x = 0; x < 20; ++x) g.set(x, 10, true);
  const Vec2 s(0.5, 0.3), t(0.5, 1.7);
  CHECK_FALSE(free_connected(g, g.world_to_cell(s), g.world_to_cell(t)));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Roadmap r = build_roadmap(g, s, t, {200, std::numeric_limits<double>::infinity(), seed});
    CHECK_FALSE(r.connected(0, 1));
    CHECK(extract_paths(r, 8).empty());
  }
}

TEST_CASE("two gaps give at least two distinct path classes") {
  const OccupancyGrid g = inflate(load_map_file(kFixtures + "/two_gaps.map"), small_rect().inscribed_radius());
  const Roadmap r = build_roadmap(g, Vec2(2.0, 0.6), Vec2(2.0, 3.4));
  const auto paths = dedup_paths(extract_paths(r, 32), g);
  CHECK(paths.size() >= 2);
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (std::size_t j = i + 1; j < paths.size(); ++j) CHECK_FALSE(uvd_equivalent(paths[i], paths[j], g));
}

TEST_CASE("push_away leaves safe states untouched") {
  const RobotShape s = unit_square();
  const BodyEsdf e = build_body_esdf(s, 0.02, 0.3);
  OccupancyGrid g(40, 40, 0.1);
  const PushResult r = push_away(s, e, {Vec2(2.0, 2.0), 0.3}, g, 0.05, 10, 0.0);
  CHECK(r.safe);
  CHECK(r.attempts == 0);
  CHECK(r.state.position == Vec2(2.0, 2.0));
}

TEST_CASE("push_away moves away from a single intruding point") {
  const RobotShape s = unit_square();
  const BodyEsdf e = build_body_esdf(s, 0.02, 0.3);
  OccupancyGrid g(40, 40, 0.1);
  g.set(24, 20, true);  // center (2.45, 2.05), 0.1 inside the right edge
  const Pose2 start{Vec2(2.05, 2.05), 0.0};
  const PushResult r = push_away(s, e, start, g, 0.05, 20, 0.0);
  REQUIRE(r.safe);
  CHECK(r.state.position.x() < start.position.x());
  CHECK(std::abs(r.state.position.y() - start.position.y()) < 1e-9);
  CHECK(body_sdf(s, g.cell_center(24, 20) - r.state.position) >= 0.05);
}

TEST_CASE("push_away stalls between symmetric intrusions") {
  const RobotShape s = unit_square();
  const BodyEsdf e = build_body_esdf(s, 0.02, 0.3);
  OccupancyGrid g(40, 40, 0.1);
  g.set(24, 20, true);
  g.set(16, 20, true);  // mirror image about x = 2.05
  const PushResult r = push_away(s, e, {Vec2(2.05, 2.05), 0.0}, g, 0.05, 6, 0.0);
  CHECK_FALSE(r.safe);
  CHECK(r.attempts == 6);
  CHECK((r.state.position - Vec2(2.05, 2.05)).norm() < 1e-9);
}

TEST_CASE("orientation_interp") {
  CHECK(orientation_interp(0.7, 0.7, 0.3) == doctest::Approx(0.7));
  CHECK(orientation_interp(0.0, std::numbers::pi / 2, 0.5) == doctest::Approx(std::numbers::pi / 4));
  const double deg = std::numbers::pi / 180.0;
  CHECK(std::abs(std::abs(orientation_interp(170 * deg, -170 * deg, 0.5)) - std::numbers::pi) < 1e-12);
  CHECK(orientation_interp(170 * deg, -170 * deg, 0.5) > 0.0);
}

TEST_CASE("uvd equivalence") {
  OccupancyGrid g(30, 30, 0.1);
  for (int x = 12; x < 18; ++x)
    for (int y = 12; y < 18; ++y) g.set(x, y, true);
  const Polyline left{{0.5, 1.5}, {0.8, 2.6}, {2.5, 2.6}};
  const Polyline right{{0.5, 1.5}, {2.4, 0.4}, {2.5, 2.6}};
  const Polyline left2{{0.5, 1.5}, {0.7, 2.5}, {2.5, 2.6}};
  CHECK(uvd_equivalent(left, left, g));
  CHECK_FALSE(uvd_equivalent(left, right, g));
  CHECK(uvd_equivalent(left, left2, g));

  // oracle: some uniformly matched pair of the opposite paths is blocked
  const auto a = resample_uniform(left, 40), b = resample_uniform(right, 40);
  bool blocked = false;
  for (std::size_t i = 0; i < a.size(); ++i) blocked |= !is_visible(g, a[i], b[i]);
  CHECK(blocked);
}

TEST_CASE("dedup keeps the shortest of each class") {
  OccupancyGrid g(30, 30, 0.1);
  for (int x = 12; x < 18; ++x)
    for (int y = 12; y < 18; ++y) g.set(x, y, true);
  CHECK(dedup_paths(std::vector<Polyline>{}, g).empty());
  const Polyline only{{0.5, 0.5}, {2.5, 0.5}};
  CHECK(dedup_paths(std::vector<Polyline>{only}, g).size() == 1);

  const Polyline long_left{{0.5, 1.5}, {0.5, 2.8}, {2.5, 2.6}};
  const Polyline short_left{{0.5, 1.5}, {0.8, 2.5}, {2.5, 2.6}};
  const Polyline right{{0.5, 1.5}, {2.4, 0.4}, {2.5, 2.6}};
  REQUIRE(polyline_length(short_left) < polyline_length(long_left));
  const auto kept = dedup_paths(std::vector<Polyline>{long_left, right, short_left}, g);
  REQUIRE(kept.size() == 2);
  CHECK((kept[0] == short_left || kept[1] == short_left));
  CHECK((kept[0] == right || kept[1] == right));
}

TEST_CASE("shortcut of a visible path keeps only its ends") {
  const RobotShape s = small_rect();
  const BodyEsdf e = build_body_esdf(s, 0.05, 0.2);
  const RobotKernel k(s, 18, 0.1);
  OccupancyGrid g(30, 30, 0.1);
  const Se2Path p = shortcut({{0.5, 0.5}, {1.0, 1.0}, {2.5, 2.5}}, s, e, g, g, k);
  REQUIRE(p.waypoints.size() == 2);
  CHECK(p.waypoints.front().provenance == Provenance::Start);
  CHECK(p.waypoints.back().provenance == Provenance::Goal);
}

TEST_CASE("shortcut around a box keeps safe waypoints collision-free") {
  const RobotShape s = small_rect();
  const BodyEsdf e = build_body_esdf(s, 0.05, 0.2);
  const RobotKernel k(s, 18, 0.1);
  OccupancyGrid g(30, 30, 0.1);
  for (int x = 12; x < 18; ++x)
    for (int y = 12; y < 18; ++y) g.set(x, y, true);
  const OccupancyGrid inflated = inflate(g, s.inscribed_radius());
  const Polyline zigzag{{0.5, 1.5}, {0.9, 2.2}, {1.1, 2.5}, {1.6, 2.3}, {2.2, 2.5}, {2.6, 1.5}};
  const Se2Path p = shortcut(zigzag, s, e, inflated, g, k);
  CHECK(p.waypoints.size() < discretize(zigzag, 0.1).size());
  for (const auto& w : p.waypoints) {
    CHECK(w.yaw > -std::numbers::pi);
    CHECK(w.yaw <= std::numbers::pi);
    if (w.safe) CHECK_FALSE(kernel_collides(k, g, w.position, k.nearest_index(w.yaw)));
  }
  for (std::size_t i = 0; i + 1 < p.waypoints.size(); ++i)
    CHECK((p.waypoints[i].position - p.waypoints[i + 1].position).norm() > 0.0);
}

TEST_CASE("shortcut through a slit narrower than the robot keeps an unsafe pushed waypoint") {
  // 0.05 m cells: one free column leaves 0.1 m between occupied centers,
  // half the width of the 1.0 x 0.2 body
  const RobotShape s = load_shape_file(kFixtures + "/rect_1x02.shape");
  const BodyEsdf e = build_body_esdf(s, 0.025, 0.1);
  const RobotKernel k(s, 18, 0.05);
  OccupancyGrid g(80, 80, 0.05);
  for (int x = 0; x < 80; ++x)
    if (x != 40) {
      g.set(x, 39, true);
      g.set(x, 40, true);
    }
  const Polyline through{{1.2, 0.8}, {2.025, 1.6}, {2.025, 2.4}, {2.9, 3.2}};
  const Se2Path p = shortcut(through, s, e, g, g, k);
  bool unsafe_pushed = false;
  for (const auto& w : p.waypoints) {
    if (w.safe || w.provenance != Provenance::Pushed) continue;
    bool all = true;
    for (int i = 0; i < k.n_orientations(); ++i) all &= kernel_collides(k, g, w.position, i);
    unsafe_pushed |= all;
  }
  CHECK(unsafe_pushed);
  for (const auto& w : p.waypoints)
    CHECK(w.safe == !kernel_collides(k, g, w.position, k.nearest_index(w.yaw)));
}

TEST_CASE("resample_uniform and discretize") {
  const Polyline l{{0, 0}, {1, 0}, {1, 1}};
  const auto r = resample_uniform(l, 4);
  REQUIRE(r.size() == 5);
  CHECK((r[2] - Vec2(1, 0)).norm() < 1e-12);
  const auto d = discretize(l, 0.3);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK((d[i + 1] - d[i]).norm() <= 0.3 + 1e-12);
  CHECK((d.back() - Vec2(1, 1)).norm() == 0.0);
}
