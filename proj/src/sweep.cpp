#include "wbplan/sweep.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace wbplan {

Pose2 pose_at(const Trajectory& traj, double t) {
  const Eigen::VectorXd s = traj.eval(t, 0);
  return Pose2{s.head<2>(), s(2)};
}

std::pair<double, double> rate_bounds(const Trajectory& traj) {
  constexpr int kPerPiece = 64;
  double v = 0.0, w = 0.0;
  for (int i = 0; i < traj.pieces(); ++i) {
    for (int k = 0; k <= kPerPiece; ++k) {
      const Eigen::VectorXd d = traj.eval_piece(i, traj.duration(i) * k / kPerPiece, 1);
      v = std::max(v, d.head<2>().norm());
      if (d.size() > 2) w = std::max(w, std::abs(d(2)));
    }
  }
  // Sampled maxima of quartic rates; 10% headroom covers the gaps.
  return {1.1 * v, 1.1 * w};
}

SweptSampler::SweptSampler(const Trajectory& traj, const RobotShape& shape, SweptOptions options)
    : SweptSampler(traj, shape, 0.0, traj.total_duration(), options) {}

SweptSampler::SweptSampler(const Trajectory& traj, const RobotShape& shape, double t0, double t1,
                           SweptOptions options)
    : traj_(&traj), shape_(&shape), options_(options), t0_(t0), t1_(t1) {
  if (traj.dim() != 3) throw ArgumentError("swept queries need an SE(2) trajectory");
  if (t1 < t0) throw ArgumentError("empty time window");
  const auto [v, w] = rate_bounds(traj);
  speed_ = v;
  lipschitz_ = v + shape.circumradius() * w;

  int n = 2;
  if (lipschitz_ > 0.0)
    n = static_cast<int>(std::ceil((t1 - t0) * lipschitz_ / (0.5 * options_.resolution))) + 1;
  n = std::clamp(n, 2, options_.max_samples);
  if (t1 == t0) n = 1;
  dt_ = n > 1 ? (t1 - t0) / (n - 1) : 0.0;

  times_.resize(n);
  positions_.resize(n);
  rotations_.resize(n);
  for (int i = 0; i < n; ++i) {
    times_[i] = (i == n - 1) ? t1 : t0 + i * dt_;
    const Pose2 p = pose_at(traj, times_[i]);
    positions_[i] = p.position;
    rotations_[i] = rotation(p.yaw);
  }
}

double SweptSampler::eval(const Vec2& x, double t) const {
  const Pose2 p = pose_at(*traj_, t);
  return body_sdf(*shape_, rotation(p.yaw).transpose() * (x - p.position));
}

double SweptSampler::distance_lower_bound(const Vec2& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : positions_) d = std::min(d, (x - p).norm());
  return d - shape_->circumradius() - 0.5 * speed_ * dt_;
}

SweptQueryResult SweptSampler::query(const Vec2& x) const {
  return query(x, std::numeric_limits<double>::infinity());
}

SweptQueryResult SweptSampler::query(const Vec2& x, double cutoff) const {
  const std::size_t n = times_.size();
  std::vector<double> f(n);
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = body_sdf(*shape_, rotations_[i].transpose() * (x - positions_[i]));
    if (f[i] < f[best_i]) best_i = i;
  }
  SweptQueryResult result{f[best_i], times_[best_i], false};
  if (n < 2) return result;

  // Lower bound of the minimum inside each coarse interval.
  std::vector<std::pair<double, std::size_t>> bounds;
  bounds.reserve(n - 1);
  const double slack = 0.5 * lipschitz_ * dt_;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double lb = 0.5 * (f[i] + f[i + 1]) - slack;
    lowest = std::min(lowest, lb);
    if (lb < result.value) bounds.emplace_back(lb, i);
  }
  if (lowest >= cutoff) return result;
  std::sort(bounds.begin(), bounds.end());

  constexpr double kInvPhi = 0.6180339887498949;
  constexpr std::size_t kMaxIntervals = 256;
  std::size_t visited = 0;
  for (const auto& [lb, i] : bounds) {
    if (lb >= result.value || visited++ >= kMaxIntervals) break;
    double a = times_[i], b = times_[i + 1];
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = eval(x, c), fd = eval(x, d);
    while (b - a > options_.time_tolerance) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = eval(x, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = eval(x, d);
      }
    }
    const double tm = 0.5 * (a + b);
    const double fm = eval(x, tm);
    result.refined = true;
    if (fm < result.value) {
      result.value = fm;
      result.t_star = tm;
    }
  }
  return result;
}

SweptQueryResult swept_sdf(const Trajectory& traj, const RobotShape& shape, const Vec2& x_obs,
                           double t0, double t1, SweptOptions options) {
  const double total = traj.total_duration();
  if (t0 < 0.0 || t1 > total * (1.0 + 1e-12) || t1 < t0)
    throw DomainError("query window outside the trajectory duration");
  return SweptSampler(traj, shape, t0, std::min(t1, total), options).query(x_obs);
}

SweptQueryResult swept_sdf(const Trajectory& traj, const RobotShape& shape, const Vec2& x_obs,
                           SweptOptions options) {
  return SweptSampler(traj, shape, options).query(x_obs);
}

CollisionReport continuous_check(const Trajectory& traj, const RobotShape& shape,
                                 const OccupancyGrid& grid, double margin) {
  if (margin < 0.0) throw ArgumentError("margin must be non-negative");
  SweptOptions options;
  options.resolution = grid.resolution();
  const SweptSampler sampler(traj, shape, options);

  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (double t = 0.0;; t += sampler.dt()) {
    const Vec2 p = pose_at(traj, std::min(t, traj.total_duration())).position;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    if (t >= traj.total_duration() || sampler.dt() == 0.0) break;
  }
  const double pad = shape.circumradius() + margin + grid.resolution();
  lo.array() -= pad;
  hi.array() += pad;

  std::vector<CollisionWitness> hits;
  const Cell c0 = grid.world_to_cell(lo), c1 = grid.world_to_cell(hi);
  for (int iy = std::max(0, c0.y()); iy <= std::min(grid.height() - 1, c1.y()); ++iy) {
    for (int ix = std::max(0, c0.x()); ix <= std::min(grid.width() - 1, c1.x()); ++ix) {
      if (!grid.occupied(ix, iy)) continue;
      const Vec2 x = grid.cell_center(ix, iy);
      if (sampler.distance_lower_bound(x) >= margin) continue;
      const SweptQueryResult q = sampler.query(x, margin);
      if (q.value < margin) hits.push_back({x, q.t_star, margin - q.value});
    }
  }

  CollisionReport report;
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto& a, const auto& b) { return a.t_star < b.t_star; });
  const double gap = 2.0 * sampler.dt();
  for (const auto& h : hits) {
    if (report.intervals.empty() || h.t_star - report.intervals.back().t_end >= gap) {
      report.intervals.push_back({h.t_star, h.t_star, h.point, h.depth, {h}});
      continue;
    }
    auto& iv = report.intervals.back();
    iv.t_end = h.t_star;
    iv.points.push_back(h);
    if (h.depth > iv.depth) {
      iv.depth = h.depth;
      iv.witness = h.point;
    }
  }
  return report;
}

std::vector<std::vector<Vec2>> swept_boundary_samples(const Trajectory& traj,
                                                      const RobotShape& shape, int n) {
  if (n < 1) throw ArgumentError("need at least one outline");
  std::vector<std::vector<Vec2>> outlines;
  outlines.reserve(n);
  const double total = traj.total_duration();
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : total * k / (n - 1);
    outlines.push_back(shape.outline(pose_at(traj, t)));
  }
  return outlines;
}

}  // namespace wbplan
