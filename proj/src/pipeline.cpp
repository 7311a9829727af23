#include "wbplan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace wbplan {

void PlanConfig::validate() const {
  for (int v : {roadmap.budget, max_paths, max_candidates, max_path_vertices, n_orientations,
                max_depth, push_attempts, solver.lbfgs.max_iterations, solver.lbfgs.memory})
    if (v < 1) throw ArgumentError("planner counts must be at least 1");
  if (search_range < 0 || 2 * search_range > n_orientations)
    throw ArgumentError("search range must lie in [0, n_orientations / 2]");
  if (context_pad < 0) throw ArgumentError("context pad must be non-negative");
  if (check_margin < 0.0) throw ArgumentError("check margin must be non-negative");
  if (!(roadmap.connection_radius > 0.0)) throw ArgumentError("connection radius must be positive");
  weights.validate();
}

std::string to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Success: return "success";
    case PlanStatus::NoPath: return "no-path";
    case PlanStatus::AllCandidatesFailed: return "all-candidates-failed";
  }
  return "unknown";
}

std::string to_string(PieceSource s) {
  switch (s) {
    case PieceSource::SE2: return "SE2";
    case PieceSource::R2: return "R2";
    case PieceSource::R2Reoptimized: return "R2-reoptimized";
  }
  return "unknown";
}

World prepare_world(const OccupancyGrid& grid, const RobotShape& shape, const PlanConfig& config) {
  const double res = grid.resolution();
  const double margin = config.push_margin < 0.0 ? res : config.push_margin;
  return World{grid, inflate(grid, shape.inscribed_radius()), shape,
               build_body_esdf(shape, 0.5 * res, std::max(margin, res) + 3.0 * res),
               build_kernel(shape, config.n_orientations, res)};
}

std::vector<CandidateReport> topological_candidates(const World& world, const Vec2& start,
                                                    const Vec2& goal, const PlanConfig& config) {
  const Roadmap roadmap = build_roadmap(world.inflated, start, goal, config.roadmap);
  const auto raw = dedup_paths(extract_paths(roadmap, config.max_paths, config.max_path_vertices),
                               world.inflated);
  ShortcutOptions so;
  so.margin = config.push_margin;
  so.max_attempts = config.push_attempts;

  std::vector<Se2Path> refined;
  std::vector<Polyline> raw_kept;
  for (const auto& p : raw) {
    refined.push_back(shortcut(p, world.shape, world.esdf, world.inflated, world.grid, world.kernel, so));
    raw_kept.push_back(p);
  }
  std::vector<Polyline> positions;
  for (const auto& r : refined) positions.push_back(r.positions());
  std::vector<CandidateReport> out;
  for (std::size_t i : dedup_indices(positions, world.inflated)) {
    if (static_cast<int>(out.size()) >= config.max_candidates) break;
    CandidateReport c;
    c.topo_path = raw_kept[i];
    c.refined = refined[i];
    out.push_back(std::move(c));
  }
  return out;
}

Trajectory splice(const std::vector<Trajectory>& parts) {
  if (parts.empty()) throw ArgumentError("nothing to splice");
  Trajectory result = parts.front();
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  for (std::size_t k = 1; k < parts.size(); ++k) {
    Eigen::MatrixXd right = parts[k].coefficients();
    const Eigen::VectorXd right_T = parts[k].durations();
    if (parts[k].dim() != result.dim()) throw SpliceError("parts differ in dimension");

    const int last = result.pieces() - 1;
    const double t_last = result.duration(last);
    const Eigen::VectorXd left_end = result.eval_piece(last, t_last, 0);
    Eigen::VectorXd right_start = parts[k].eval_piece(0, 0.0, 0);
    if (result.dim() >= 3) {
      const double shift = kTwoPi * std::round((left_end(2) - right_start(2)) / kTwoPi);
      for (int i = 0; i < parts[k].pieces(); ++i) right(6 * i, 2) += shift;
      right_start(2) += shift;
    }
    if ((left_end - right_start).cwiseAbs().maxCoeff() > 1e-6)
      throw SpliceError("junction poses do not match");

    Trajectory right_traj(right_T, right);
    const int m = result.dim();
    BoundaryCondition junction(m, 3);
    junction.col(0) = left_end;
    double mismatch = 0.0;
    for (int o = 1; o <= 2; ++o) {
      const Eigen::VectorXd l = result.eval_piece(last, t_last, o);
      const Eigen::VectorXd r = right_traj.eval_piece(0, 0.0, o);
      junction.col(o) = 0.5 * (l + r);
      mismatch = std::max(mismatch, (l - r).cwiseAbs().maxCoeff());
    }
    if (mismatch > 1e-10 || (left_end - right_start).cwiseAbs().maxCoeff() > 0.0) {
      BoundaryCondition left_start(m, 3), right_end(m, 3);
      for (int o = 0; o <= 2; ++o) {
        left_start.col(o) = result.eval_piece(last, 0.0, o);
        right_end.col(o) = right_traj.eval_piece(0, right_traj.duration(0), o);
      }
      Eigen::MatrixXd lc = result.coefficients();
      lc.middleRows(6 * last, 6) = quintic_piece(left_start, junction, t_last);
      right.middleRows(0, 6) = quintic_piece(junction, right_end, right_traj.duration(0));
      result = Trajectory(result.durations(), lc);
      right_traj = Trajectory(right_T, right);
    }
    result.append(right_traj);
  }
  return result;
}

namespace {

using Clock = std::chrono::steady_clock;

// Attributes every interval between calls to exactly one stage.
class StageClock {
 public:
  explicit StageClock(StageTimings& t) : t_(t), last_(Clock::now()) {}
  void lap(double StageTimings::*stage) {
    const auto now = Clock::now();
    t_.*stage += std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  StageTimings& t_;
  Clock::time_point last_;
};

// Yaw of the requested pose, or the nearest collision-free kernel orientation.
double endpoint_yaw(const World& w, const Vec2& p, double yaw, const char* which,
                    std::vector<std::string>& warnings) {
  const int k = w.kernel.nearest_index(yaw);
  if (!kernel_collides(w.kernel, w.grid, p, k)) return yaw;
  const auto free = safe_yaw(p, k, w.kernel, w.grid, w.kernel.n_orientations() / 2);
  if (free.empty()) return yaw;
  warnings.push_back(std::string(which) + " yaw collides; using nearest free orientation");
  return w.kernel.yaw(free.front());
}

// Requested endpoint yaws are exact; interior anchors re-chain from the start
// modulo the symmetry period, and the goal takes the whole turn nearest the chain.
void pin_endpoint_yaws(std::vector<Vec3>& anchors, double start_yaw, double goal_yaw, double period) {
  anchors.front()(2) = start_yaw;
  for (std::size_t i = 1; i < anchors.size(); ++i)
    anchors[i](2) = anchors[i - 1](2) + wrap_period(anchors[i](2) - anchors[i - 1](2), period);
  const double last = anchors.size() > 1 ? anchors[anchors.size() - 2](2) : start_yaw;
  anchors.back()(2) = last + wrap_angle(goal_yaw - last);
}

Vec3 tangent_velocity(const std::vector<Vec3>& anchors, std::size_t i, double speed) {
  const std::size_t lo = i == 0 ? 0 : i - 1;
  const std::size_t hi = std::min(anchors.size() - 1, i + 1);
  Vec2 d = anchors[hi].head<2>() - anchors[lo].head<2>();
  if (d.norm() < 1e-12) return Vec3::Zero();
  d *= speed / d.norm();
  return Vec3(d.x(), d.y(), 0.0);
}

OptProblem slice_problem(const std::vector<Vec3>& anchors, const SubProblem& sp, double speed) {
  OptProblem p;
  p.anchors.assign(anchors.begin() + sp.begin, anchors.begin() + sp.end + 1);
  p.head = BoundaryCondition::Zero(3, 3);
  p.tail = BoundaryCondition::Zero(3, 3);
  p.head.col(0) = anchors[sp.begin];
  p.tail.col(0) = anchors[sp.end];
  if (sp.begin > 0) p.head.col(1) = tangent_velocity(anchors, sp.begin, speed);
  if (sp.end + 1 < anchors.size()) p.tail.col(1) = tangent_velocity(anchors, sp.end, speed);
  return p;
}

struct Assembled {
  Trajectory trajectory;
  std::vector<PieceSource> provenance;
  std::vector<std::pair<double, double>> spans;  ///< time span of each sub-problem
};

Assembled assemble(const std::vector<Trajectory>& parts, const std::vector<PieceSource>& sources) {
  Assembled a;
  a.trajectory = splice(parts);
  double t = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    a.spans.emplace_back(t, t + parts[i].total_duration());
    t += parts[i].total_duration();
    a.provenance.insert(a.provenance.end(), parts[i].pieces(), sources[i]);
  }
  return a;
}

// Sub-problems whose time span overlaps a collision interval.
std::vector<std::size_t> colliding_parts(const CollisionReport& report,
                                         const std::vector<std::pair<double, double>>& spans) {
  std::vector<std::size_t> out;
  for (const auto& iv : report.intervals) {
    for (const auto& pt : iv.points) {
      for (std::size_t i = 0; i < spans.size(); ++i) {
        if (pt.t_star >= spans[i].first - 1e-9 && pt.t_star <= spans[i].second + 1e-9 &&
            std::find(out.begin(), out.end(), i) == out.end())
          out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PlanResult plan(const OccupancyGrid& grid, const RobotShape& shape, const Pose2& start,
                const Pose2& goal, const PlanConfig& config) {
  config.validate();
  PlanResult result;
  StageClock clock(result.metrics.time);
  auto finish = [&](PlanStatus status, std::string message) {
    clock.lap(&StageTimings::se2);
    auto& t = result.metrics.time;
    t.total = t.refine + t.r2 + t.se2;
    result.status = status;
    result.message = std::move(message);
    return result;
  };

  const World world = prepare_world(grid, shape, config);
  std::vector<CandidateReport> candidates;
  try {
    candidates = topological_candidates(world, start.position, goal.position, config);
  } catch (const InfeasibleEndpointError& e) {
    clock.lap(&StageTimings::refine);
    return finish(PlanStatus::NoPath, e.what());
  }
  const double start_yaw = endpoint_yaw(world, start.position, start.yaw, "start", result.warnings);
  const double goal_yaw = endpoint_yaw(world, goal.position, goal.yaw, "goal", result.warnings);
  clock.lap(&StageTimings::refine);
  if (candidates.empty()) return finish(PlanStatus::NoPath, "no topological path between start and goal");

  SequenceOptions seq_opt;
  seq_opt.search_range = config.search_range;
  seq_opt.max_depth = config.max_depth;
  seq_opt.margin = config.push_margin;
  seq_opt.max_attempts = config.push_attempts;
  const double junction_speed = 0.5 * config.weights.v_max;

  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    CandidateReport& cand = candidates[ci];
    ++result.metrics.candidates_tried;
    cand.sequence = generate_sequence(cand.refined, shape, world.esdf, world.kernel, grid, seq_opt);
    cand.sequence.source_path = static_cast<int>(ci);
    cand.subproblems = extract_subproblems(cand.sequence, config.context_pad);

    std::vector<Vec3> anchors = state_anchors(cand.sequence.states, world.kernel);
    pin_endpoint_yaws(anchors, start_yaw, goal_yaw, world.kernel.yaw_period());
    clock.lap(&StageTimings::refine);

    const std::size_t n_sub = cand.subproblems.size();
    std::vector<Trajectory> parts(n_sub);
    std::vector<PieceSource> sources(n_sub);
    std::vector<OptProblem> problems(n_sub);
    for (std::size_t i = 0; i < n_sub; ++i) problems[i] = slice_problem(anchors, cand.subproblems[i], junction_speed);

    // SE(2) sub-problems first, in path order; the first failure voids the candidate.
    try {
      for (std::size_t i = 0; i < n_sub && cand.failure.empty(); ++i) {
        if (cand.subproblems[i].kind != SubProblemKind::SE2) continue;
        OptOutcome o = se2_optimize(problems[i], config.weights, shape, grid, config.solver);
        if (!o.collision_free.value_or(false))
          cand.failure = "SE(2) sub-problem " + std::to_string(i) + " remains in collision";
        parts[i] = std::move(o.trajectory);
        sources[i] = PieceSource::SE2;
      }
      clock.lap(&StageTimings::se2);
      if (!cand.failure.empty()) continue;

      for (std::size_t i = 0; i < n_sub; ++i) {
        if (cand.subproblems[i].kind != SubProblemKind::R2) continue;
        parts[i] = r2_optimize(problems[i], config.weights, config.solver).trajectory;
        sources[i] = PieceSource::R2;
      }
      clock.lap(&StageTimings::r2);

      Assembled a = assemble(parts, sources);
      CollisionReport report = continuous_check(a.trajectory, shape, grid, config.check_margin);
      if (!report.clear()) {
        const auto bad = colliding_parts(report, a.spans);
        for (std::size_t i : bad) {
          if (sources[i] != PieceSource::R2) {
            cand.failure = "SE(2) piece " + std::to_string(i) + " collides after splicing";
            break;
          }
        }
        if (cand.failure.empty()) {
          for (std::size_t i : bad) {
            OptOutcome o = se2_optimize(problems[i], config.weights, shape, grid, config.solver);
            parts[i] = std::move(o.trajectory);
            sources[i] = PieceSource::R2Reoptimized;
          }
          a = assemble(parts, sources);
          report = continuous_check(a.trajectory, shape, grid, config.check_margin);
          if (!report.clear()) cand.failure = "re-optimized trajectory still collides";
        }
      }
      clock.lap(&StageTimings::se2);
      if (!cand.failure.empty()) continue;

      cand.survived = true;
      cand.trajectory = std::move(a.trajectory);
      cand.provenance = std::move(a.provenance);
      cand.effort = control_effort(cand.trajectory);
      ++result.metrics.candidates_survived;
      if (result.selected < 0 || cand.effort < candidates[result.selected].effort) {
        result.selected = static_cast<int>(ci);
        result.certificate = std::move(report);
      }
    } catch (const DegenerateInputError& e) {
      cand.failure = e.what();
      clock.lap(&StageTimings::se2);
    } catch (const SpliceError& e) {
      cand.failure = e.what();
      clock.lap(&StageTimings::se2);
    }
  }

  result.candidates = std::move(candidates);
  if (result.selected < 0) {
    std::string why = "all candidates failed:";
    for (std::size_t i = 0; i < result.candidates.size(); ++i)
      why += " [" + std::to_string(i) + "] " + result.candidates[i].failure + ";";
    return finish(PlanStatus::AllCandidatesFailed, why);
  }

  const CandidateReport& best = result.candidates[result.selected];
  result.trajectory = best.trajectory;
  result.provenance = best.provenance;
  auto& m = result.metrics;
  for (int i = 0; i < result.trajectory.pieces(); ++i) {
    Trajectory piece(result.trajectory.durations().segment(i, 1),
                     result.trajectory.coefficients().middleRows(6 * i, 6));
    const double len = planar_length(piece);
    (result.provenance[i] == PieceSource::R2 ? m.len_r2 : m.len_se2) += len;
  }
  m.len_total = m.len_r2 + m.len_se2;
  return finish(PlanStatus::Success, "");
}

}  // namespace wbplan
