#pragma once

#include "wbplan/minco.hpp"
#include "wbplan/sequence.hpp"
#include "wbplan/sweep.hpp"

#include <functional>
#include <optional>

namespace wbplan {

struct Weights {
  double lambda_m{1.0};
  double lambda_t{20.0};
  double lambda_s{1e4};
  double lambda_d{1e3};
  double lambda_p{1e3};
  double lambda_r{1e3};
  double mu{0.01};
  double d_safe{-1.0};  ///< negative selects the map resolution
  double v_max{1.0};
  double omega_max{1.5};

  /// Throws ArgumentError for negative weights or non-positive mu / limits.
  void validate() const;
  double safe_distance(double resolution) const { return d_safe < 0.0 ? resolution : d_safe; }
};

/// C2 ramp: 0 below zero, cubic blend on (0, mu), x - mu/2 above mu.
double smoothing(double x, double mu);
double smoothing_derivative(double x, double mu);

struct CostTerms {
  double jm{0.0}, jt{0.0}, js{0.0}, jd{0.0}, gp{0.0}, gr{0.0};
  double total{0.0};
};

struct CostEval {
  double value{0.0};
  CostTerms terms;
  Eigen::MatrixXd grad_coeffs;  ///< 6M x m
  Eigen::VectorXd grad_times;   ///< M
};

/// Quadrature nodes per piece for the integral penalties.
inline constexpr int kQuadratureNodes = 16;

/// Smoothness, time, swept-volume safety and dynamics penalties of an SE(2) trajectory.
/// `resolution` sets the coarse time step of the swept queries.
CostEval se2_cost(const Trajectory& traj, const Weights& w, const RobotShape& shape,
                  const std::vector<Vec2>& obstacles, double resolution);

/// Anchor timestamps proportional to cumulative arc length over [0, total].
std::vector<double> anchor_timestamps(const std::vector<Vec3>& anchors, double total);

/// Smoothness, time, position and rotation residual penalties against anchors.
CostEval r2_cost(const Trajectory& traj, const Weights& w, const std::vector<Vec3>& anchors,
                 const std::vector<double>& stamps);

/// Squared Frobenius norm of R(a)^-1 R(b) - I.
double rotation_residual(double yaw_a, double yaw_b);

struct LbfgsOptions {
  int max_iterations{200};
  int memory{8};
  double grad_tol{1e-5};
  double rel_tol{1e-8};
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f{0.0};
  int iterations{0};
  bool converged{false};
};

/// Objective returns f(x) and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with backtracking Armijo line search. Accepted steps never increase f.
LbfgsResult minimize_lbfgs(const Objective& fn, Eigen::VectorXd x0, const LbfgsOptions& options = {});

/// Positive time map used for unconstrained duration variables, and its inverse.
double tau_to_time(double tau);
double time_to_tau(double t);
double tau_to_time_derivative(double tau);

/// Spline fitting problem between two boundary states through anchor poses (x, y, unwrapped yaw).
struct OptProblem {
  BoundaryCondition head;  ///< 3 x 3: rows x, y, yaw; cols p, v, a
  BoundaryCondition tail;
  std::vector<Vec3> anchors;
};

struct SolverOptions {
  LbfgsOptions lbfgs{};
  double se2_piece_length{0.3};
  double r2_piece_length{0.5};
  int max_pieces{48};
};

struct OptOutcome {
  Trajectory trajectory;
  bool converged{false};
  CostTerms terms;
  int iterations{0};
  std::optional<bool> collision_free;  ///< set by the SE(2) solver only
  CollisionReport report;
};

/// Angle shifted by whole periods into [-period/2, period/2].
double wrap_period(double angle, double period);

/// Yaw anchors of motion states, unwrapped modulo the body's symmetry period
/// so that equivalent orientations never cost a rotation.
std::vector<Vec3> state_anchors(const std::vector<MotionState>& states, const RobotKernel& kernel);

/// Rest-to-rest problem over the states of a sub-problem.
OptProblem make_problem(const std::vector<MotionState>& states, const RobotKernel& kernel);

/// Deterministic farthest-point subsample, starting from the first point.
std::vector<Vec2> farthest_point_subsample(const std::vector<Vec2>& points, std::size_t cap);

/// Occupied cell centers that can influence a trajectory following the anchors.
std::vector<Vec2> nearby_obstacles(const std::vector<Vec3>& anchors, const RobotShape& shape,
                                   const OccupancyGrid& grid, const Weights& w, std::size_t cap = 512);

/// Throws DegenerateInputError when the anchors neither move nor rotate.
OptOutcome se2_optimize(const OptProblem& problem, const Weights& w, const RobotShape& shape,
                        const OccupancyGrid& grid, const SolverOptions& options = {});
OptOutcome r2_optimize(const OptProblem& problem, const Weights& w, const SolverOptions& options = {});

OptOutcome se2_optimize(const SubProblem& sub, const Weights& w, const RobotShape& shape,
                        const RobotKernel& kernel, const OccupancyGrid& grid,
                        const SolverOptions& options = {});
OptOutcome r2_optimize(const SubProblem& sub, const Weights& w, const RobotKernel& kernel,
                       const SolverOptions& options = {});

/// Initial waypoints (3 x (M-1)) and durations (M) from the anchors.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> initial_guess(const OptProblem& problem, const Weights& w,
                                                          double piece_length, int max_pieces);

}  // namespace wbplan
