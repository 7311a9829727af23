#pragma once

#include "wbplan/types.hpp"

#include <optional>
#include <string_view>

namespace wbplan {

/// Piecewise quintic in the natural basis [1, t, ..., t^5] with local time per
/// piece. Coefficients are stacked as a (6*M) x m matrix: row 6*i + j holds the
/// t^j coefficient of piece i.
class Trajectory {
 public:
  static constexpr int kOrder = 5;
  static constexpr int kCoeffs = kOrder + 1;

  Trajectory() = default;
  Trajectory(Eigen::VectorXd durations, Eigen::MatrixXd coefficients);

  int dim() const { return static_cast<int>(coeffs_.cols()); }
  int pieces() const { return static_cast<int>(durations_.size()); }
  bool empty() const { return durations_.size() == 0; }
  const Eigen::VectorXd& durations() const { return durations_; }
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  double duration(int i) const { return durations_(i); }
  double total_duration() const { return durations_.sum(); }
  double piece_start(int i) const { return durations_.head(i).sum(); }

  auto piece_coeffs(int i) const { return coeffs_.middleRows(kCoeffs * i, kCoeffs); }

  /// Piece index and local time for global time t (clamped onto the last piece at the end).
  std::pair<int, double> locate(double t) const;

  /// Derivative of the given order (0..5) at global time t. Throws DomainError outside [0, T].
  Eigen::VectorXd eval(double t, int order = 0) const;
  Eigen::VectorXd eval_piece(int piece, double tau, int order = 0) const;

  /// Time-reversed copy: same geometric path traversed backwards.
  Trajectory reversed() const;

  /// Appends another trajectory's pieces after this one.
  void append(const Trajectory& other);

 private:
  Eigen::VectorXd durations_;
  Eigen::MatrixXd coeffs_;
};

/// d^order/dt^order of the basis [1, t, ..., t^5] at t.
Eigen::Matrix<double, 6, 1> basis(double t, int order);

/// Integral of the squared jerk norm over the whole trajectory.
double control_effort(const Trajectory& traj);
/// Partial derivatives of control_effort with respect to coefficients (6M x m) and durations (M).
Eigen::MatrixXd control_effort_grad_coeffs(const Trajectory& traj);
Eigen::VectorXd control_effort_grad_times(const Trajectory& traj);

/// Arc length of the first two dimensions, by Gauss-Legendre quadrature per piece.
double planar_length(const Trajectory& traj);

std::string serialize(const Trajectory& traj);
Trajectory deserialize_trajectory(std::string_view document);

/// Band matrix with LU factorization without pivoting. Holds the
/// unfactorized copy for residual checks.
class BandedSystem {
 public:
  BandedSystem() = default;
  BandedSystem(int n, int lower, int upper);

  int size() const { return n_; }
  double& operator()(int i, int j) { return data_[(i - j + upper_) * n_ + j]; }
  double operator()(int i, int j) const { return data_[(i - j + upper_) * n_ + j]; }

  void reset();
  void factorize_lu();
  /// Solves A x = b in place (b is n x m).
  void solve(Eigen::MatrixXd& b) const;
  /// Solves A^T x = b in place.
  void solve_adjoint(Eigen::MatrixXd& b) const;
  /// y = A x, valid before factorization.
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd dense() const;

 private:
  int n_{0};
  int lower_{0};
  int upper_{0};
  std::vector<double> data_;
};

/// Head or tail condition: an m x 3 matrix with columns position, velocity, acceleration.
using BoundaryCondition = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Minimum-jerk (s = 3) piecewise quintic through waypoints with fixed
/// boundary position, velocity and acceleration. The mapping from
/// (waypoints, durations) to coefficients is one banded linear solve, and
/// cost gradients on the coefficients are pulled back through its adjoint.
class Minco {
 public:
  Minco() = default;
  Minco(BoundaryCondition head, BoundaryCondition tail, int pieces);

  int pieces() const { return pieces_; }
  int dim() const { return static_cast<int>(head_.rows()); }
  const BoundaryCondition& head() const { return head_; }
  const BoundaryCondition& tail() const { return tail_; }

  /// waypoints: m x (M-1); durations: M, all positive.
  void generate(const Eigen::MatrixXd& waypoints, const Eigen::VectorXd& durations);

  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  const Eigen::VectorXd& durations() const { return durations_; }
  Trajectory trajectory() const { return Trajectory(durations_, coeffs_); }
  /// True when the banded factorization failed its residual check.
  bool used_pivoted_fallback() const { return dense_lu_.has_value(); }

  double energy() const;
  Eigen::MatrixXd energy_grad_coeffs() const;
  Eigen::VectorXd energy_grad_times() const;

  /// Given dK/dc (6M x m) and explicit dK/dT (M), returns dK/dq (m x (M-1))
  /// and the total dK/dT including the dependence of c on T.
  void propagate_grad(const Eigen::MatrixXd& grad_coeffs, const Eigen::VectorXd& grad_times,
                      Eigen::MatrixXd& grad_waypoints, Eigen::VectorXd& grad_times_total) const;

 private:
  int pieces_{0};
  BoundaryCondition head_, tail_;
  BandedSystem system_;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu_;
  Eigen::VectorXd durations_;
  Eigen::MatrixXd coeffs_;
};

/// Unique minimum-jerk spline meeting the boundary conditions and waypoints.
Trajectory construct(const BoundaryCondition& head, const BoundaryCondition& tail,
                     const Eigen::MatrixXd& waypoints, const Eigen::VectorXd& durations);

struct MincoGradients {
  Eigen::MatrixXd waypoints;  ///< m x (M-1)
  Eigen::VectorXd times;      ///< M
};

/// Pull-back of coefficient/time gradients through the spline construction.
MincoGradients gradients(const Minco& minco, const Eigen::MatrixXd& grad_coeffs,
                         const Eigen::VectorXd& grad_times);

/// Single quintic with prescribed position/velocity/acceleration at both ends.
/// Returns the 6 x m coefficient block.
Eigen::MatrixXd quintic_piece(const BoundaryCondition& start, const BoundaryCondition& end,
                              double duration);

}  // namespace wbplan
