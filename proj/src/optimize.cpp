#include "wbplan/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace wbplan {

void Weights::validate() const {
  for (double v : {lambda_m, lambda_t, lambda_s, lambda_d, lambda_p, lambda_r})
    if (!(v >= 0.0)) throw ArgumentError("weights must be non-negative");
  if (std::isnan(d_safe)) throw ArgumentError("safety distance must be a number");
  if (!(mu > 0.0)) throw ArgumentError("smoothing width must be positive");
  if (!(v_max > 0.0) || !(omega_max > 0.0)) throw ArgumentError("dynamic limits must be positive");
}

double smoothing(double x, double mu) {
  if (x <= 0.0) return 0.0;
  if (x >= mu) return x - 0.5 * mu;
  const double r = x / mu;
  return (mu - 0.5 * x) * r * r * r;
}

double smoothing_derivative(double x, double mu) {
  if (x <= 0.0) return 0.0;
  if (x >= mu) return 1.0;
  const double r = x / mu;
  // d/dx [(mu - x/2) x^3 / mu^3] = 3 r^2 - 2 r^3
  return r * r * (3.0 - 2.0 * r);
}

double rotation_residual(double yaw_a, double yaw_b) {
  return 4.0 * (1.0 - std::cos(yaw_a - yaw_b));
}

namespace {

CostEval smoothness_and_time(const Trajectory& traj, const Weights& w) {
  CostEval e;
  e.terms.jm = control_effort(traj);
  e.terms.jt = traj.total_duration();
  e.grad_coeffs = w.lambda_m * control_effort_grad_coeffs(traj);
  e.grad_times = w.lambda_m * control_effort_grad_times(traj) +
                 Eigen::VectorXd::Constant(traj.pieces(), w.lambda_t);
  return e;
}

void finish(CostEval& e, const Weights& w) {
  e.terms.total = w.lambda_m * e.terms.jm + w.lambda_t * e.terms.jt + w.lambda_s * e.terms.js +
                  w.lambda_d * e.terms.jd + w.lambda_p * e.terms.gp + w.lambda_r * e.terms.gr;
  e.value = e.terms.total;
}

}  // namespace

CostEval se2_cost(const Trajectory& traj, const Weights& w, const RobotShape& shape,
                  const std::vector<Vec2>& obstacles, double resolution) {
  if (traj.dim() != 3) throw ArgumentError("SE(2) cost needs a 3-dimensional trajectory");
  CostEval e = smoothness_and_time(traj, w);

  // Safety: each obstacle point penalised through the pose where the swept
  // volume comes closest to it; the local time fraction is held fixed.
  if (w.lambda_s > 0.0 && !obstacles.empty()) {
    SweptOptions so;
    so.resolution = resolution;
    const SweptSampler sampler(traj, shape, so);
    const double d_safe = w.safe_distance(resolution);
    for (const Vec2& x : obstacles) {
      if (sampler.distance_lower_bound(x) >= d_safe) continue;
      const SweptQueryResult q = sampler.query(x, d_safe);
      const double viol = d_safe - q.value;
      if (viol <= 0.0) continue;
      e.terms.js += smoothing(viol, w.mu);
      const double dl = -w.lambda_s * smoothing_derivative(viol, w.mu);  // d(cost)/d(sdf)

      const auto [i, tau] = traj.locate(q.t_star);
      const Eigen::VectorXd s0 = traj.eval_piece(i, tau, 0);
      const Eigen::VectorXd s1 = traj.eval_piece(i, tau, 1);
      const Mat2 r = rotation(s0(2));
      const Vec2 qb = r.transpose() * (x - s0.head<2>());
      const SdfSample g = body_sdf_gradient(shape, qb);
      const Vec2 dpos = -(r * g.gradient);
      const double dyaw = g.gradient.dot(Vec2(qb.y(), -qb.x()));

      const auto b0 = basis(tau, 0);
      e.grad_coeffs.block(6 * i, 0, 6, 2) += dl * b0 * dpos.transpose();
      e.grad_coeffs.block(6 * i, 2, 6, 1) += dl * dyaw * b0;
      const double frac = tau / traj.duration(i);
      e.grad_times(i) += dl * frac * (dpos.dot(s1.head<2>()) + dyaw * s1(2));
    }
  }

  // Dynamics: smoothed speed and yaw-rate limit violations, midpoint quadrature.
  if (w.lambda_d > 0.0) {
    const double v2 = w.v_max * w.v_max, o2 = w.omega_max * w.omega_max;
    for (int i = 0; i < traj.pieces(); ++i) {
      const double T = traj.duration(i);
      const double h = T / kQuadratureNodes;
      const auto c = traj.piece_coeffs(i);
      for (int j = 0; j < kQuadratureNodes; ++j) {
        const double s = (j + 0.5) / kQuadratureNodes;
        const double tau = s * T;
        const auto b1 = basis(tau, 1), b2 = basis(tau, 2);
        const Eigen::Vector3d v = c.transpose() * b1;
        const Eigen::Vector3d a = c.transpose() * b2;
        const double gv = v.head<2>().squaredNorm() - v2;
        const double go = v(2) * v(2) - o2;
        const double lv = smoothing(gv, w.mu), lo = smoothing(go, w.mu);
        const double dv = smoothing_derivative(gv, w.mu), dom = smoothing_derivative(go, w.mu);
        e.terms.jd += h * (lv + lo);
        if (dv == 0.0 && dom == 0.0 && lv == 0.0 && lo == 0.0) continue;
        const double k = w.lambda_d * h;
        e.grad_coeffs.block(6 * i, 0, 6, 2) += k * dv * 2.0 * b1 * v.head<2>().transpose();
        e.grad_coeffs.block(6 * i, 2, 6, 1) += k * dom * 2.0 * v(2) * b1;
        e.grad_times(i) += w.lambda_d * (lv + lo) / kQuadratureNodes +
                           k * s * (dv * 2.0 * v.head<2>().dot(a.head<2>()) + dom * 2.0 * v(2) * a(2));
      }
    }
  }
  finish(e, w);
  return e;
}

std::vector<double> anchor_timestamps(const std::vector<Vec3>& anchors, double total) {
  const std::size_t n = anchors.size();
  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    arc[i] = arc[i - 1] + (anchors[i].head<2>() - anchors[i - 1].head<2>()).norm();
  std::vector<double> stamps(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (n == 1)
      stamps[i] = 0.0;
    else if (arc.back() > 1e-12)
      stamps[i] = total * arc[i] / arc.back();
    else
      stamps[i] = total * double(i) / double(n - 1);
  }
  return stamps;
}

namespace {

std::size_t nearest_stamp(const std::vector<double>& stamps, double t) {
  const auto it = std::lower_bound(stamps.begin(), stamps.end(), t);
  if (it == stamps.begin()) return 0;
  if (it == stamps.end()) return stamps.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - stamps.begin());
  return (t - stamps[hi - 1] <= stamps[hi] - t) ? hi - 1 : hi;
}

}  // namespace

CostEval r2_cost(const Trajectory& traj, const Weights& w, const std::vector<Vec3>& anchors,
                 const std::vector<double>& stamps) {
  if (traj.dim() != 3) throw ArgumentError("residual cost needs a 3-dimensional trajectory");
  if (anchors.empty() || anchors.size() != stamps.size())
    throw ArgumentError("anchors and timestamps must be non-empty and aligned");
  CostEval e = smoothness_and_time(traj, w);

  double start = 0.0;
  for (int i = 0; i < traj.pieces(); ++i) {
    const double T = traj.duration(i);
    const double h = T / kQuadratureNodes;
    const auto c = traj.piece_coeffs(i);
    for (int j = 0; j < kQuadratureNodes; ++j) {
      const double s = (j + 0.5) / kQuadratureNodes;
      const double tau = s * T;
      const auto b0 = basis(tau, 0), b1 = basis(tau, 1);
      const Eigen::Vector3d p = c.transpose() * b0;
      const Eigen::Vector3d v = c.transpose() * b1;
      const Vec3& a = anchors[nearest_stamp(stamps, start + tau)];

      const Vec2 err = p.head<2>() - a.head<2>();
      const double gp = err.squaredNorm();
      const double lp = smoothing(gp, w.mu), dp = smoothing_derivative(gp, w.mu);
      const double gr = rotation_residual(p(2), a(2));
      const double lr = smoothing(gr, w.mu), dr = smoothing_derivative(gr, w.mu);
      const double dgr = 4.0 * std::sin(p(2) - a(2));
      e.terms.gp += h * lp;
      e.terms.gr += h * lr;

      const double kp = w.lambda_p * h * dp, kr = w.lambda_r * h * dr;
      e.grad_coeffs.block(6 * i, 0, 6, 2) += kp * 2.0 * b0 * err.transpose();
      e.grad_coeffs.block(6 * i, 2, 6, 1) += kr * dgr * b0;
      e.grad_times(i) += (w.lambda_p * lp + w.lambda_r * lr) / kQuadratureNodes +
                         s * (kp * 2.0 * err.dot(v.head<2>()) + kr * dgr * v(2));
    }
    start += T;
  }
  finish(e, w);
  return e;
}

LbfgsResult minimize_lbfgs(const Objective& fn, Eigen::VectorXd x0, const LbfgsOptions& options) {
  LbfgsResult out;
  out.x = std::move(x0);
  Eigen::VectorXd g(out.x.size());
  out.f = fn(out.x, g);
  if (!std::isfinite(out.f)) throw ArgumentError("objective is not finite at the initial point");
  if (g.size() == 0 || g.lpNorm<Eigen::Infinity>() < options.grad_tol) {
    out.converged = true;
    return out;
  }

  std::deque<Eigen::VectorXd> ss, ys;
  std::deque<double> rhos;
  Eigen::VectorXd x_new(out.x.size()), g_new(out.x.size());
  constexpr double kArmijo = 1e-4;

  for (int it = 0; it < options.max_iterations; ++it) {
    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alphas(ss.size());
    for (int k = static_cast<int>(ss.size()) - 1; k >= 0; --k) {
      alphas[k] = rhos[k] * ss[k].dot(d);
      d -= alphas[k] * ys[k];
    }
    if (!ss.empty()) d *= ss.back().dot(ys.back()) / ys.back().squaredNorm();
    for (std::size_t k = 0; k < ss.size(); ++k) {
      const double beta = rhos[k] * ys[k].dot(d);
      d += (alphas[k] - beta) * ss[k];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      ss.clear();
      ys.clear();
      rhos.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = ss.empty() ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = out.x + step * d;
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= out.f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) return out;

    const Eigen::VectorXd s = x_new - out.x, y = g_new - g;
    const double f_old = out.f;
    out.x = x_new;
    out.f = f_new;
    g = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      ss.push_back(s);
      ys.push_back(y);
      rhos.push_back(1.0 / sy);
      if (static_cast<int>(ss.size()) > options.memory) {
        ss.pop_front();
        ys.pop_front();
        rhos.pop_front();
      }
    }
    if (g.lpNorm<Eigen::Infinity>() < options.grad_tol ||
        std::abs(f_old - out.f) <= options.rel_tol * std::max(1.0, std::abs(out.f))) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

double tau_to_time(double tau) {
  return tau > 0.0 ? (0.5 * tau + 1.0) * tau + 1.0 : 1.0 / ((0.5 * tau - 1.0) * tau + 1.0);
}

double time_to_tau(double t) {
  if (!(t > 0.0)) throw ArgumentError("duration must be positive");
  return t > 1.0 ? std::sqrt(2.0 * t - 1.0) - 1.0 : 1.0 - std::sqrt(2.0 / t - 1.0);
}

double tau_to_time_derivative(double tau) {
  if (tau > 0.0) return tau + 1.0;
  const double den = (0.5 * tau - 1.0) * tau + 1.0;
  return (1.0 - tau) / (den * den);
}

double wrap_period(double angle, double period) {
  return angle - period * std::round(angle / period);
}

std::vector<Vec3> state_anchors(const std::vector<MotionState>& states, const RobotKernel& kernel) {
  std::vector<Vec3> out;
  out.reserve(states.size());
  const double period = kernel.yaw_period();
  double prev = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    double yaw = wrap_angle(kernel.yaw(states[i].k));
    if (i > 0) yaw = prev + wrap_period(yaw - prev, period);
    out.emplace_back(states[i].position.x(), states[i].position.y(), yaw);
    prev = yaw;
  }
  return out;
}

OptProblem make_problem(const std::vector<MotionState>& states, const RobotKernel& kernel) {
  if (states.size() < 2) throw ArgumentError("sub-problem needs at least two states");
  OptProblem p;
  p.anchors = state_anchors(states, kernel);
  p.head = BoundaryCondition::Zero(3, 3);
  p.tail = BoundaryCondition::Zero(3, 3);
  p.head.col(0) = p.anchors.front();
  p.tail.col(0) = p.anchors.back();
  return p;
}

std::vector<Vec2> farthest_point_subsample(const std::vector<Vec2>& points, std::size_t cap) {
  if (points.size() <= cap) return points;
  std::vector<Vec2> out;
  if (cap == 0) return out;
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  for (std::size_t k = 0; k < cap; ++k) {
    out.push_back(points[next]);
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      dist[i] = std::min(dist[i], (points[i] - points[next]).squaredNorm());
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    next = best;
  }
  return out;
}

std::vector<Vec2> nearby_obstacles(const std::vector<Vec3>& anchors, const RobotShape& shape,
                                   const OccupancyGrid& grid, const Weights& w, std::size_t cap) {
  Vec2 lo = anchors.front().head<2>(), hi = lo;
  for (const auto& a : anchors) {
    lo = lo.cwiseMin(a.head<2>());
    hi = hi.cwiseMax(a.head<2>());
  }
  const double pad = shape.circumradius() + w.safe_distance(grid.resolution()) + 2.0 * grid.resolution();
  const Vec2 center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo).maxCoeff() + pad;
  return farthest_point_subsample(extract_obstacles(grid, center, half), cap);
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> initial_guess(const OptProblem& problem, const Weights& w,
                                                          double piece_length, int max_pieces) {
  const auto& an = problem.anchors;
  const std::size_t n = an.size();
  std::vector<double> arc(n, 0.0), rot(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    arc[i] = arc[i - 1] + (an[i].head<2>() - an[i - 1].head<2>()).norm();
    rot[i] = rot[i - 1] + std::abs(an[i](2) - an[i - 1](2));
  }
  if (arc.back() < 1e-9 && rot.back() < 1e-9)
    throw DegenerateInputError("sub-problem states are all coincident");

  // Progress measure mixing distance and rotation so in-place turns get pieces too.
  constexpr double kMetersPerRadian = 0.25;
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = arc[i] + kMetersPerRadian * rot[i];
  const int M = std::clamp(static_cast<int>(std::ceil(sigma.back() / piece_length - 1e-9)), 1, max_pieces);

  auto at = [&](double target) -> Vec3 {
    if (target <= 0.0) return an.front();
    if (target >= sigma.back()) return an.back();
    const std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(sigma.begin(), sigma.end(), target) - sigma.begin());
    const std::size_t lo = hi - 1;
    const double span = sigma[hi] - sigma[lo];
    const double f = span > 0.0 ? (target - sigma[lo]) / span : 0.0;
    return an[lo] + f * (an[hi] - an[lo]);
  };

  std::vector<Vec3> knots(M + 1);
  knots[0] = problem.head.col(0);
  knots[M] = problem.tail.col(0);
  Eigen::MatrixXd waypoints(3, M - 1);
  for (int k = 1; k < M; ++k) {
    knots[k] = at(sigma.back() * k / M);
    waypoints.col(k - 1) = knots[k];
  }
  Eigen::VectorXd durations(M);
  for (int k = 0; k < M; ++k) {
    const Vec3 d = knots[k + 1] - knots[k];
    durations(k) = std::max({d.head<2>().norm() / (0.5 * w.v_max), std::abs(d(2)) / (0.5 * w.omega_max), 0.1});
  }
  return {waypoints, durations};
}

namespace {

using CostFn = std::function<CostEval(const Trajectory&)>;

OptOutcome solve(const OptProblem& problem, const Weights& w, const SolverOptions& options,
                 double piece_length, const CostFn& cost) {
  w.validate();
  auto [q0, t0] = initial_guess(problem, w, piece_length, options.max_pieces);
  const int M = static_cast<int>(t0.size());
  const int nq = 3 * (M - 1);

  Eigen::VectorXd x0(nq + M);
  x0.head(nq) = Eigen::Map<const Eigen::VectorXd>(q0.data(), nq);
  for (int i = 0; i < M; ++i) x0(nq + i) = time_to_tau(t0(i));

  Minco minco(problem.head, problem.tail, M);
  auto unpack = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& q, Eigen::VectorXd& T) {
    q = Eigen::Map<const Eigen::MatrixXd>(x.data(), 3, M - 1);
    T.resize(M);
    for (int i = 0; i < M; ++i) T(i) = tau_to_time(x(nq + i));
  };

  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    Eigen::MatrixXd q;
    Eigen::VectorXd T;
    unpack(x, q, T);
    minco.generate(q, T);
    const CostEval e = cost(minco.trajectory());
    Eigen::MatrixXd gq;
    Eigen::VectorXd gT;
    minco.propagate_grad(e.grad_coeffs, e.grad_times, gq, gT);
    grad.resize(x.size());
    grad.head(nq) = Eigen::Map<const Eigen::VectorXd>(gq.data(), nq);
    for (int i = 0; i < M; ++i) grad(nq + i) = gT(i) * tau_to_time_derivative(x(nq + i));
    return e.value;
  };

  const LbfgsResult r = minimize_lbfgs(objective, x0, options.lbfgs);
  Eigen::MatrixXd q;
  Eigen::VectorXd T;
  unpack(r.x, q, T);
  minco.generate(q, T);

  OptOutcome out;
  out.trajectory = minco.trajectory();
  out.converged = r.converged;
  out.iterations = r.iterations;
  out.terms = cost(out.trajectory).terms;
  return out;
}

}  // namespace

OptOutcome se2_optimize(const OptProblem& problem, const Weights& w, const RobotShape& shape,
                        const OccupancyGrid& grid, const SolverOptions& options) {
  if (problem.anchors.size() < 2) throw ArgumentError("sub-problem needs at least two states");
  const auto obstacles = nearby_obstacles(problem.anchors, shape, grid, w);
  const double res = grid.resolution();
  OptOutcome out = solve(problem, w, options, options.se2_piece_length, [&](const Trajectory& t) {
    return se2_cost(t, w, shape, obstacles, res);
  });
  out.report = continuous_check(out.trajectory, shape, grid, 0.0);
  out.collision_free = out.report.clear();
  return out;
}

OptOutcome r2_optimize(const OptProblem& problem, const Weights& w, const SolverOptions& options) {
  if (problem.anchors.size() < 2) throw ArgumentError("sub-problem needs at least two states");
  return solve(problem, w, options, options.r2_piece_length, [&](const Trajectory& t) {
    return r2_cost(t, w, problem.anchors, anchor_timestamps(problem.anchors, t.total_duration()));
  });
}

OptOutcome se2_optimize(const SubProblem& sub, const Weights& w, const RobotShape& shape,
                        const RobotKernel& kernel, const OccupancyGrid& grid,
                        const SolverOptions& options) {
  return se2_optimize(make_problem(sub.states, kernel), w, shape, grid, options);
}

OptOutcome r2_optimize(const SubProblem& sub, const Weights& w, const RobotKernel& kernel,
                       const SolverOptions& options) {
  return r2_optimize(make_problem(sub.states, kernel), w, options);
}

}  // namespace wbplan
