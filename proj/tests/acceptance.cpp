// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "oracles.hpp"

#include "wbplan/cli.hpp"
#include "wbplan/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace wbplan;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path kFixtures = FIXTURE_DIR;

struct Verdict {
  bool pass{false};
  std::string detail;
};

// 1 ------------------------------------------------------------------------
Verdict sdf_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nv(3, 14);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    const auto poly = oracle::star_polygon(rng, nv(rng), 0.2, 1.0);
    const RobotShape shape(poly, Vec2::Zero());
    for (int i = 0; i < 1000; ++i) {
      const Vec2 q(u(rng), u(rng));
      worst = std::max(worst, std::abs(body_sdf(shape, q) - oracle::signed_distance(poly, q)));
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << "max |diff| " << worst << ", " << secs << " s";
  return {worst < 1e-9 && secs < 5.0, s.str()};
}

// 2 ------------------------------------------------------------------------
Trajectory random_spline(std::mt19937_64& rng, int pieces, int dim, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), d(0.4, 1.2);
  BoundaryCondition head = BoundaryCondition::Zero(dim, 3), tail = BoundaryCondition::Zero(dim, 3);
  for (int r = 0; r < dim; ++r) {
    head(r, 0) = scale * u(rng);
    tail(r, 0) = scale * u(rng);
    // nonzero end rates keep the swept minimum off a degenerate rest point
    head(r, 1) = 0.3 * u(rng);
    head(r, 2) = 0.3 * u(rng);
    tail(r, 1) = 0.3 * u(rng);
    tail(r, 2) = 0.3 * u(rng);
  }
  Eigen::MatrixXd q(dim, pieces - 1);
  for (int c = 0; c < pieces - 1; ++c)
    for (int r = 0; r < dim; ++r) q(r, c) = scale * u(rng);
  Eigen::VectorXd t(pieces);
  for (int i = 0; i < pieces; ++i) t(i) = d(rng);
  return construct(head, tail, q, t);
}

/// Trajectory parameters flattened as [coefficients (column-major), durations].
Eigen::VectorXd flatten(const Trajectory& traj) {
  Eigen::VectorXd x(traj.coefficients().size() + traj.pieces());
  x << Eigen::Map<const Eigen::VectorXd>(traj.coefficients().data(), traj.coefficients().size()),
      traj.durations();
  return x;
}

Trajectory unflatten(const Eigen::VectorXd& x, const Trajectory& like) {
  const auto rows = like.coefficients().rows(), cols = like.coefficients().cols();
  Eigen::MatrixXd c = Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, cols);
  return Trajectory(x.tail(like.pieces()), c);
}

Eigen::VectorXd flatten(const CostEval& e) {
  Eigen::VectorXd g(e.grad_coeffs.size() + e.grad_times.size());
  g << Eigen::Map<const Eigen::VectorXd>(e.grad_coeffs.data(), e.grad_coeffs.size()), e.grad_times;
  return g;
}

Verdict gradient_suite() {
  const auto t0 = Clock::now();
  constexpr double h = 1e-6;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_sdf = 0, worst_smooth = 0, worst_se2 = 0, worst_r2 = 0, worst_minco = 0;

  // World SDF, at points whose two nearest edges differ by at least four cells,
  // which keeps them two cells clear of the medial axis.
  {
    int done = 0;
    while (done < 50) {
      const auto poly = oracle::star_polygon(rng, 3 + done % 6, 0.3, 0.8);
      const RobotShape shape(poly, Vec2::Zero());
      const double res = 0.02;
      const BodyEsdf esdf = build_body_esdf(shape, res, 0.3);
      const Vec2 qb(0.9 * u(rng), 0.9 * u(rng));
      std::vector<double> edge;
      for (std::size_t i = 0; i < poly.size(); ++i)
        edge.push_back(oracle::segment_distance(qb, poly[i], poly[(i + 1) % poly.size()]));
      std::sort(edge.begin(), edge.end());
      if (edge[1] - edge[0] < 4.0 * res || !esdf.contains(qb)) continue;
      const Pose2 pose{Vec2(u(rng), u(rng)), 3.0 * u(rng)};
      const Vec2 x = pose.position + rotation(pose.yaw) * qb;
      const Eigen::VectorXd fd = oracle::central_gradient(
          [&](const Eigen::VectorXd& p) { return sdf_gradient_world(esdf, Vec2(p), pose).value; },
          x, h);
      worst_sdf = std::max(worst_sdf, oracle::relative_error(sdf_gradient_world(esdf, x, pose).gradient, fd));
      ++done;
    }
  }
  for (int i = 0; i < 50; ++i) {
    const double mu = 0.005 + 0.05 * (u(rng) + 1.0);
    const double x = mu * (0.5 + 1.5 * u(rng));
    Eigen::VectorXd xv(1);
    xv << x;
    const Eigen::VectorXd fd =
        oracle::central_gradient([&](const Eigen::VectorXd& v) { return smoothing(v(0), mu); }, xv, h);
    Eigen::VectorXd an(1);
    an << smoothing_derivative(x, mu);
    worst_smooth = std::max(worst_smooth, oracle::relative_error(an, fd));
  }
  for (int i = 0; i < 50; ++i) {
    const Trajectory traj = random_spline(rng, 2 + i % 3, 3, 0.6);
    // Convex bodies and obstacle points in a band outside the swept region,
    // where the swept distance is differentiable.
    const RobotShape shape(oracle::convex_hull(oracle::star_polygon(rng, 4 + i % 4, 0.15, 0.35)),
                           Vec2::Zero());
    std::vector<Vec2> obstacles;
    while (obstacles.size() < 12) {
      const Vec3 p = traj.eval(traj.total_duration() * 0.5 * (u(rng) + 1.0));
      const Vec2 x(p.x() + 0.5 * u(rng), p.y() + 0.5 * u(rng));
      const double v = swept_sdf(traj, shape, x).value;
      if (v > 0.02 && v < 0.08) obstacles.push_back(x);
    }
    Weights w;
    w.d_safe = 0.1;
    const auto f = [&](const Eigen::VectorXd& x) {
      return se2_cost(unflatten(x, traj), w, shape, obstacles, 0.05).value;
    };
    const Eigen::VectorXd fd = oracle::central_gradient(f, flatten(traj), h);
    worst_se2 = std::max(worst_se2, oracle::relative_error(flatten(se2_cost(traj, w, shape, obstacles, 0.05)), fd));
  }
  for (int i = 0; i < 50; ++i) {
    const Trajectory traj = random_spline(rng, 2 + i % 4, 3, 1.0);
    std::vector<Vec3> anchors;
    for (int k = 0; k < 9; ++k) {
      const Vec3 p = traj.eval(traj.total_duration() * k / 8.0);
      anchors.push_back(p + 0.2 * Vec3(u(rng), u(rng), u(rng)));
    }
    const auto stamps = anchor_timestamps(anchors, traj.total_duration());
    const Weights w;
    const auto f = [&](const Eigen::VectorXd& x) {
      return r2_cost(unflatten(x, traj), w, anchors, stamps).value;
    };
    const Eigen::VectorXd fd = oracle::central_gradient(f, flatten(traj), h);
    worst_r2 = std::max(worst_r2, oracle::relative_error(flatten(r2_cost(traj, w, anchors, stamps)), fd));
  }
  for (int i = 0; i < 50; ++i) {
    const int pieces = 2 + i % 5, dim = 1 + i % 3;
    BoundaryCondition head = BoundaryCondition::Random(dim, 3), tail = BoundaryCondition::Random(dim, 3);
    Eigen::MatrixXd q = Eigen::MatrixXd::Random(dim, pieces - 1);
    Eigen::VectorXd t = Eigen::VectorXd::Constant(pieces, 0.8) + 0.3 * Eigen::VectorXd::Random(pieces);
    const Eigen::MatrixXd weight = Eigen::MatrixXd::Random(6 * pieces, dim);
    // K = energy + <weight, coefficients>
    const auto k_of = [&](const Eigen::VectorXd& x) {
      Minco m(head, tail, pieces);
      m.generate(Eigen::Map<const Eigen::MatrixXd>(x.data(), dim, pieces - 1), x.tail(pieces));
      return m.energy() + (weight.array() * m.coefficients().array()).sum();
    };
    Eigen::VectorXd x(q.size() + pieces);
    x << Eigen::Map<Eigen::VectorXd>(q.data(), q.size()), t;
    Minco m(head, tail, pieces);
    m.generate(q, t);
    const MincoGradients g = gradients(m, m.energy_grad_coeffs() + weight, m.energy_grad_times());
    Eigen::VectorXd an(x.size());
    an << Eigen::Map<const Eigen::VectorXd>(g.waypoints.data(), g.waypoints.size()), g.times;
    worst_minco = std::max(worst_minco, oracle::relative_error(an, oracle::central_gradient(k_of, x, h)));
  }
  const double secs = seconds_since(t0);
  const double worst = std::max({worst_sdf, worst_smooth, worst_se2, worst_r2, worst_minco});
  std::ostringstream s;
  s << "rel err sdf " << worst_sdf << ", smoothing " << worst_smooth << ", se2 " << worst_se2
    << ", r2 " << worst_r2 << ", minco " << worst_minco << ", " << secs << " s";
  return {worst < 1e-3 && secs < 30.0, s.str()};
}

// 3 ------------------------------------------------------------------------
Verdict minco_exactness() {
  double coeff_err = 0, effort_err = 0, cont_err = 0;
  BoundaryCondition head = BoundaryCondition::Zero(1, 3), tail = BoundaryCondition::Zero(1, 3);
  tail(0, 0) = 1.0;
  for (double T : {0.5, 1.0, 2.0}) {
    const Trajectory traj = construct(head, tail, Eigen::MatrixXd(1, 0), Eigen::VectorXd::Constant(1, T));
    Eigen::VectorXd expected(6);
    expected << 0, 0, 0, 10 / std::pow(T, 3), -15 / std::pow(T, 4), 6 / std::pow(T, 5);
    coeff_err = std::max(coeff_err, (traj.coefficients().col(0) - expected).cwiseAbs().maxCoeff());
    const double e = 720.0 / std::pow(T, 5);
    effort_err = std::max(effort_err, std::abs(control_effort(traj) - e) / e);
  }
  std::mt19937_64 rng(303);
  for (int i = 0; i < 20; ++i) {
    const Trajectory traj = random_spline(rng, 5, 3, 2.0);
    for (int p = 0; p + 1 < traj.pieces(); ++p)
      for (int order = 0; order <= 4; ++order)
        cont_err = std::max(cont_err, (traj.eval_piece(p, traj.duration(p), order) -
                                       traj.eval_piece(p + 1, 0.0, order))
                                          .cwiseAbs()
                                          .maxCoeff());
  }
  std::ostringstream s;
  s << "coeff err " << coeff_err << ", effort rel err " << effort_err << ", junction err " << cont_err;
  return {coeff_err < 1e-9 && effort_err < 1e-6 && cont_err < 1e-8, s.str()};
}

// 4 ------------------------------------------------------------------------
Verdict swept_oracle() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto poly = oracle::star_polygon(rng, 4 + i % 5, 0.15, 0.4);
    const RobotShape shape(poly, Vec2::Zero());
    BoundaryCondition head = BoundaryCondition::Zero(3, 3), tail = BoundaryCondition::Zero(3, 3);
    tail.col(0) = Vec3(0.5 * u(rng), 0.5 * u(rng), 1.2 * u(rng));
    Eigen::MatrixXd q = 0.3 * Eigen::MatrixXd::Random(3, 1);
    const Trajectory traj = construct(head, tail, q, Eigen::Vector2d(0.5 + 0.2 * u(rng), 0.5 + 0.2 * u(rng)));
    const int n = 10000;
    std::vector<Vec2> pos(n);
    std::vector<double> yaw(n);
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd s = traj.eval(traj.total_duration() * k / (n - 1));
      pos[k] = s.head<2>();
      yaw[k] = s(2);
    }
    for (int j = 0; j < 10; ++j) {
      const Vec2 x(0.8 * u(rng), 0.8 * u(rng));
      double dense = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) {
        const Vec2 qb = rotation(yaw[k]).transpose() * (x - pos[k]);
        dense = std::min(dense, oracle::signed_distance(poly, qb));
      }
      worst = std::max(worst, std::abs(swept_sdf(traj, shape, x).value - dense));
    }
  }

  // Pure translation: outside the swept region its distance is the distance to
  // the hull of the polygon at both ends.
  double capsule = 0.0;
  for (int i = 0; i < 5; ++i) {
    std::vector<Vec2> disc;
    const double r = 0.2 + 0.05 * i;
    for (int k = 0; k < 64; ++k)
      disc.emplace_back(r * std::cos(2 * std::numbers::pi * k / 64), r * std::sin(2 * std::numbers::pi * k / 64));
    const RobotShape shape(disc, Vec2::Zero());
    const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
    BoundaryCondition head = BoundaryCondition::Zero(3, 3), tail = BoundaryCondition::Zero(3, 3);
    head.col(0) << a, 0.3;
    tail.col(0) << b, 0.3;
    const Trajectory traj = construct(head, tail, Eigen::MatrixXd(3, 0), Eigen::VectorXd::Constant(1, 1.0));
    std::vector<Vec2> ends = oracle::place(disc, a, 0.3);
    const auto at_b = oracle::place(disc, b, 0.3);
    ends.insert(ends.end(), at_b.begin(), at_b.end());
    const auto hull = oracle::convex_hull(ends);
    for (int j = 0; j < 200;) {
      const Vec2 x = 0.5 * (a + b) + Vec2(1.5 * u(rng), 1.5 * u(rng));
      if (oracle::signed_distance(hull, x) <= 0.0) continue;
      ++j;
      capsule = std::max(capsule, std::abs(swept_sdf(traj, shape, x).value - oracle::signed_distance(hull, x)));
    }
  }
  std::ostringstream s;
  s << "dense-grid max err " << worst << " m, capsule max err " << capsule << " m";
  return {worst < 1e-4 && capsule < 1e-6, s.str()};
}

// 5 ------------------------------------------------------------------------
OccupancyGrid random_grid(std::mt19937_64& rng, int w, int h, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OccupancyGrid g(w, h, 0.1);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y) g.set(x, y, u(rng) < density);
  return g;
}

Verdict kernel_oracle() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int disagreements = 0, collisions = 0;
  for (int i = 0; i < 100; ++i) {
    const OccupancyGrid grid = random_grid(rng, 16, 16, 0.03 + 0.1 * u(rng));
    const auto poly = oracle::star_polygon(rng, 3 + i % 8, 0.08, 0.45);
    const RobotShape shape(poly, Vec2::Zero());
    const RobotKernel kernel(shape, 18, grid.resolution());
    const Vec2 p(-0.2 + 2.0 * u(rng), -0.2 + 2.0 * u(rng));
    const int k = static_cast<int>(18 * u(rng)) % 18;
    const int cx = static_cast<int>(std::floor(p.x() / 0.1)), cy = static_cast<int>(std::floor(p.y() / 0.1));
    const Vec2 ref(0.1 * (cx + 0.5), 0.1 * (cy + 0.5));
    const auto placed = oracle::place(poly, ref, k * 2.0 * std::numbers::pi / 18);
    bool expected = false;
    for (int x = cx - 8; x <= cx + 8 && !expected; ++x)
      for (int y = cy - 8; y <= cy + 8 && !expected; ++y) {
        const bool blocked = x < 0 || y < 0 || x >= 16 || y >= 16 || grid.occupied(x, y);
        expected = blocked && oracle::inside_crossing(placed, Vec2(0.1 * (x + 0.5), 0.1 * (y + 0.5)));
      }
    collisions += expected;
    disagreements += expected != kernel_collides(kernel, grid, p, k);
  }
  std::ostringstream s;
  s << disagreements << " disagreements over 100 instances (" << collisions << " colliding)";
  return {disagreements == 0, s.str()};
}

// 6 ------------------------------------------------------------------------
/// Gap index crossed by a path at the wall band y in [1.9, 2.1].
std::set<int> gaps_crossed(const Polyline& path, const std::vector<std::pair<double, double>>& gaps) {
  std::set<int> out;
  for (const Vec2& p : discretize(path, 0.01)) {
    if (p.y() < 1.9 || p.y() > 2.1) continue;
    for (std::size_t g = 0; g < gaps.size(); ++g)
      if (p.x() >= gaps[g].first && p.x() <= gaps[g].second) out.insert(static_cast<int>(g));
  }
  return out;
}

Verdict topology() {
  const RobotShape shape = load_shape_file((kFixtures / "small_rect.shape").string());
  const OccupancyGrid two = load_map_file((kFixtures / "two_gaps.map").string());
  const OccupancyGrid one = load_map_file((kFixtures / "one_gap.map").string());
  const std::vector<std::pair<double, double>> two_gaps{{0.6, 1.2}, {2.8, 3.4}}, one_gap{{1.7, 2.3}};
  const Vec2 start(2.0, 0.6), goal(2.0, 3.4);
  int passed = 0;
  std::ostringstream s;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PlanConfig cfg;
    cfg.roadmap.seed = seed;
    const World w2 = prepare_world(two, shape, cfg), w1 = prepare_world(one, shape, cfg);
    const auto c2 = topological_candidates(w2, start, goal, cfg);
    const auto c1 = topological_candidates(w1, start, goal, cfg);
    std::set<std::set<int>> classes2, classes1;
    for (const auto& c : c2) classes2.insert(gaps_crossed(c.refined.positions(), two_gaps));
    for (const auto& c : c1) classes1.insert(gaps_crossed(c.refined.positions(), one_gap));
    const bool ok = c2.size() >= 2 && classes2.size() >= 2 && c1.size() == 1 && classes1.size() == 1;
    passed += ok;
    if (!ok) s << "seed " << seed << ": two-gap " << c2.size() << "/" << classes2.size() << ", one-gap "
               << c1.size() << "/" << classes1.size() << "; ";
  }
  s << passed << "/10 seeds";
  return {passed == 10, s.str()};
}

// 7 ------------------------------------------------------------------------
/// Narrowest gap between the squares of two 8-connected obstacle components; -1 unless there are exactly two.
double two_blob_gap(const OccupancyGrid& g) {
  std::vector<int> label(g.width() * g.height(), -1);
  std::vector<std::vector<Cell>> blobs;
  for (int x = 0; x < g.width(); ++x)
    for (int y = 0; y < g.height(); ++y) {
      if (!g.occupied(x, y) || label[x + g.width() * y] >= 0) continue;
      blobs.emplace_back();
      std::vector<Cell> stack{Cell(x, y)};
      label[x + g.width() * y] = static_cast<int>(blobs.size()) - 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        blobs.back().push_back(c);
        for (int dx = -1; dx <= 1; ++dx)
          for (int dy = -1; dy <= 1; ++dy) {
            const Cell n = c + Cell(dx, dy);
            if (!g.in_bounds(n) || !g.occupied(n) || label[n.x() + g.width() * n.y()] >= 0) continue;
            label[n.x() + g.width() * n.y()] = label[c.x() + g.width() * c.y()];
            stack.push_back(n);
          }
      }
    }
  if (blobs.size() != 2) return -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (const Cell& a : blobs[0])
    for (const Cell& b : blobs[1]) {
      const double gx = std::max(std::abs(a.x() - b.x()) - 1, 0), gy = std::max(std::abs(a.y() - b.y()) - 1, 0);
      best = std::min(best, g.resolution() * std::hypot(gx, gy));
    }
  return best;
}

Verdict slit() {
  const RunConfig rc = load_run_config(kFixtures / "slit.ini");
  const OccupancyGrid grid = load_map_file(rc.map_path.string());
  const RobotShape shape = load_shape_file(rc.shape_path.string());
  const bool geometry = grid.width() == 40 && grid.height() == 40 && grid.resolution() == 0.1 &&
                        std::abs(shape.aabb_max().x() - shape.aabb_min().x() - 1.0) < 1e-12 &&
                        std::abs(shape.aabb_max().y() - shape.aabb_min().y() - 0.2) < 1e-12;
  const double gap = two_blob_gap(grid);
  int passed = 0;
  double slowest = 0.0;
  std::ostringstream s;
  s << "slit " << gap << " m; ";
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PlanConfig cfg = rc.plan;
    cfg.roadmap.seed = seed;
    const auto t0 = Clock::now();
    const PlanResult r = plan(grid, shape, rc.start, rc.goal, cfg);
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    bool se2 = false;
    for (const auto& c : r.candidates)
      if (c.survived)
        for (PieceSource p : c.provenance) se2 |= p == PieceSource::SE2;
    const bool clear = r.status == PlanStatus::Success &&
                       continuous_check(r.trajectory, shape, grid).clear() && r.certificate.clear();
    const bool ok = clear && se2 && secs < 10.0;
    passed += ok;
    if (!ok) s << "seed " << seed << ": " << to_string(r.status) << (se2 ? "" : " no-se2") << "; ";
  }
  s << passed << "/10 seeds, slowest " << slowest << " s";
  return {geometry && gap >= 0.3 - 1e-9 && gap < 0.35 && passed == 10, s.str()};
}

// 8 ------------------------------------------------------------------------
/// Deepest penetration of an occupied cell center into the body over dense time samples.
double dense_penetration(const Trajectory& traj, const std::vector<Vec2>& body, const OccupancyGrid& grid) {
  double reach = 0.0;
  for (const Vec2& v : body) reach = std::max(reach, v.norm());
  const auto [vmax, wmax] = rate_bounds(traj);
  const double T = traj.total_duration();
  const int n = std::max(2000, static_cast<int>(std::ceil(T * (vmax + wmax * reach) / 2e-4)));
  double deepest = 0.0;
  for (int k = 0; k <= n; ++k) {
    const Eigen::VectorXd s = traj.eval(T * k / n);
    const Vec2 p = s.head<2>();
    const Mat2 rt = rotation(s(2)).transpose();
    const int x0 = static_cast<int>(std::floor((p.x() - reach) / grid.resolution())),
              x1 = static_cast<int>(std::floor((p.x() + reach) / grid.resolution()));
    const int y0 = static_cast<int>(std::floor((p.y() - reach) / grid.resolution())),
              y1 = static_cast<int>(std::floor((p.y() + reach) / grid.resolution()));
    for (int x = std::max(0, x0); x <= std::min(grid.width() - 1, x1); ++x)
      for (int y = std::max(0, y0); y <= std::min(grid.height() - 1, y1); ++y) {
        if (!grid.occupied(x, y)) continue;
        const Vec2 qb = rt * (grid.cell_center(x, y) - p);
        if (oracle::inside_crossing(body, qb))
          deepest = std::max(deepest, oracle::boundary_distance(body, qb));
      }
  }
  return deepest;
}

Verdict certification_fuzz() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int successes = 0, false_clears = 0, failures = 0;
  for (int i = 0; i < 200; ++i) {
    OccupancyGrid grid(20, 20, 0.1);
    const int blobs = 2 + i % 5;
    for (int b = 0; b < blobs; ++b) {
      const int x = static_cast<int>(20 * u(rng)), y = static_cast<int>(20 * u(rng));
      const int w = 1 + static_cast<int>(4 * u(rng)), h = 1 + static_cast<int>(4 * u(rng));
      for (int ix = x; ix < std::min(20, x + w); ++ix)
        for (int iy = y; iy < std::min(20, y + h); ++iy) grid.set(ix, iy, true);
    }
    const auto body = oracle::star_polygon(rng, 3 + i % 6, 0.07, 0.25);
    const RobotShape shape(body, Vec2::Zero());
    const Pose2 start{Vec2(0.2 + 1.6 * u(rng), 0.2 + 1.6 * u(rng)), 6.28 * u(rng)};
    const Pose2 goal{Vec2(0.2 + 1.6 * u(rng), 0.2 + 1.6 * u(rng)), 6.28 * u(rng)};
    PlanConfig cfg;
    cfg.roadmap.seed = i + 1;
    cfg.roadmap.budget = 200;
    PlanResult r;
    try {
      r = plan(grid, shape, start, goal, cfg);
    } catch (const std::exception&) {
      ++failures;
      continue;
    }
    if (r.status != PlanStatus::Success) continue;
    ++successes;
    if (r.certificate.clear() && dense_penetration(r.trajectory, body, grid) > 1e-9) ++false_clears;
  }
  std::ostringstream s;
  s << false_clears << " false-clears over " << successes << " successes, " << failures
    << " exceptions";
  return {false_clears == 0 && failures == 0 && successes > 0, s.str()};
}

// 9 ------------------------------------------------------------------------
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "wbplan_acceptance_det";
  fs::remove_all(root);
  bool same = true;
  std::ostringstream s;
  for (const char* name : {"open.ini", "slit.ini"}) {
    RunConfig rc = load_run_config(kFixtures / name);
    rc.record_timings = false;
    std::string docs[2][3];
    for (int k = 0; k < 2; ++k) {
      rc.out_dir = root / (std::string(name) + std::to_string(k));
      run(rc);
      docs[k][0] = read_text_file(rc.out_dir / "metrics.txt");
      docs[k][1] = read_text_file(rc.out_dir / "trajectory.txt");
      docs[k][2] = read_text_file(rc.out_dir / "metrics.json");
    }
    for (int f = 0; f < 3; ++f) same &= !docs[0][f].empty() && docs[0][f] == docs[1][f];
    s << name << " " << docs[0][1].size() << " trajectory bytes; ";
  }
  fs::remove_all(root);
  s << (same ? "byte-identical" : "differs");
  return {same, s.str()};
}

// 10 -----------------------------------------------------------------------
Verdict table_keys() {
  RunConfig rc = load_run_config(kFixtures / "open.ini");
  rc.out_dir = fs::temp_directory_path() / "wbplan_acceptance_table";
  run(rc);
  const auto m = parse_metrics(read_text_file(rc.out_dir / "metrics.txt"));
  const std::string table = read_text_file(rc.out_dir / "table.txt");
  fs::remove_all(rc.out_dir);
  bool ok = true;
  std::ostringstream s;
  for (const char* key : {"time.r2", "time.se2", "time.total", "len.r2", "len.se2", "len.total", "status",
                          "candidates.tried", "candidates.survived"}) {
    if (!m.count(key)) {
      ok = false;
      s << "missing " << key << "; ";
    }
  }
  if (ok) {
    auto num = [&](const char* k) { return std::stod(m.at(k)); };
    ok &= std::abs(num("len.total") - num("len.r2") - num("len.se2")) < 1e-6;
    ok &= num("time.total") + 1e-6 >= num("time.r2") + num("time.se2");
  }
  for (const char* cell : {"Time (s)", "Length (m)", "Trajectory R2", "Trajectory SE2", "Total"})
    ok &= table.find(cell) != std::string::npos;
  s << (ok ? "all keys present, lengths additive" : "structure mismatch");
  return {ok, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"sdf oracle equivalence", sdf_oracle},
      {"gradient suite", gradient_suite},
      {"minco exactness", minco_exactness},
      {"swept sdf oracle", swept_oracle},
      {"kernel convolution oracle", kernel_oracle},
      {"topology fixture", topology},
      {"end-to-end slit fixture", slit},
      {"certification soundness fuzz", certification_fuzz},
      {"determinism", determinism},
      {"table-shaped reporting", table_keys},
  };
  int failed = 0, index = 0;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  for (const auto& c : criteria) {
    ++index;
    if (!only.empty() && !only.count(index)) continue;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", index, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  const int ran = only.empty() ? index : static_cast<int>(only.size());
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
