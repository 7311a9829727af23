#include "wbplan/minco.hpp"

#include <array>
#include <cstdio>
#include <sstream>

namespace wbplan {

Trajectory::Trajectory(Eigen::VectorXd durations, Eigen::MatrixXd coefficients)
    : durations_(std::move(durations)), coeffs_(std::move(coefficients)) {
  if (coeffs_.rows() != kCoeffs * durations_.size())
    throw ArgumentError("coefficient rows must be 6 per piece");
  for (int i = 0; i < durations_.size(); ++i)
    if (!(durations_(i) > 0.0)) throw ArgumentError("piece durations must be positive");
}

Eigen::Matrix<double, 6, 1> basis(double t, int order) {
  Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
  for (int j = order; j < 6; ++j) {
    double f = 1.0;
    for (int k = 0; k < order; ++k) f *= (j - k);
    b(j) = f * std::pow(t, j - order);
  }
  return b;
}

std::pair<int, double> Trajectory::locate(double t) const {
  if (empty()) throw DomainError("empty trajectory");
  const double total = total_duration();
  const double tol = 1e-12 * std::max(1.0, total);
  if (t < -tol || t > total + tol) throw DomainError("time outside trajectory duration");
  t = std::clamp(t, 0.0, total);
  double start = 0.0;
  for (int i = 0; i < pieces() - 1; ++i) {
    if (t < start + durations_(i)) return {i, t - start};
    start += durations_(i);
  }
  return {pieces() - 1, std::min(t - start, durations_(pieces() - 1))};
}

Eigen::VectorXd Trajectory::eval_piece(int piece, double tau, int order) const {
  if (order < 0 || order > kOrder) throw ArgumentError("derivative order must be in 0..5");
  return piece_coeffs(piece).transpose() * basis(tau, order);
}

Eigen::VectorXd Trajectory::eval(double t, int order) const {
  const auto [i, tau] = locate(t);
  return eval_piece(i, tau, order);
}

Trajectory Trajectory::reversed() const {
  const int m = pieces();
  Eigen::VectorXd durs(m);
  Eigen::MatrixXd coeffs(coeffs_.rows(), coeffs_.cols());
  static constexpr std::array<std::array<double, 6>, 6> binom{{{1, 0, 0, 0, 0, 0},
                                                               {1, 1, 0, 0, 0, 0},
                                                               {1, 2, 1, 0, 0, 0},
                                                               {1, 3, 3, 1, 0, 0},
                                                               {1, 4, 6, 4, 1, 0},
                                                               {1, 5, 10, 10, 5, 1}}};
  for (int i = 0; i < m; ++i) {
    const int k = m - 1 - i;
    const double T = durations_(i);
    durs(k) = T;
    const auto c = piece_coeffs(i);
    for (int l = 0; l < kCoeffs; ++l) {
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim());
      for (int j = l; j < kCoeffs; ++j) acc += c.row(j) * (binom[j][l] * std::pow(T, j - l));
      coeffs.row(kCoeffs * k + l) = (l % 2 == 0 ? 1.0 : -1.0) * acc;
    }
  }
  return Trajectory(std::move(durs), std::move(coeffs));
}

void Trajectory::append(const Trajectory& other) {
  if (empty()) {
    *this = other;
    return;
  }
  if (other.dim() != dim()) throw ArgumentError("cannot append trajectories of different dimension");
  Eigen::VectorXd durs(durations_.size() + other.durations_.size());
  durs << durations_, other.durations_;
  Eigen::MatrixXd coeffs(coeffs_.rows() + other.coeffs_.rows(), dim());
  coeffs << coeffs_, other.coeffs_;
  durations_ = std::move(durs);
  coeffs_ = std::move(coeffs);
}

double control_effort(const Trajectory& traj) {
  double cost = 0.0;
  for (int i = 0; i < traj.pieces(); ++i) {
    const auto c = traj.piece_coeffs(i);
    const double t1 = traj.duration(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    cost += 36.0 * c.row(3).squaredNorm() * t1 + 144.0 * c.row(4).dot(c.row(3)) * t2 +
            192.0 * c.row(4).squaredNorm() * t3 + 240.0 * c.row(5).dot(c.row(3)) * t3 +
            720.0 * c.row(5).dot(c.row(4)) * t4 + 720.0 * c.row(5).squaredNorm() * t5;
  }
  return cost;
}

double planar_length(const Trajectory& traj) {
  static constexpr std::array<double, 8> x{-0.9602898564975363, -0.7966664774136267,
                                           -0.5255324099163290, -0.1834346424956498,
                                           0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> w{0.1012285362903763, 0.2223810344533745,
                                           0.3137066458778873, 0.3626837833783620,
                                           0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
  constexpr int kSplits = 4;
  double len = 0.0;
  for (int i = 0; i < traj.pieces(); ++i) {
    const double h = traj.duration(i) / kSplits;
    for (int s = 0; s < kSplits; ++s) {
      const double mid = (s + 0.5) * h;
      for (std::size_t q = 0; q < x.size(); ++q) {
        const Eigen::VectorXd v = traj.eval_piece(i, mid + 0.5 * h * x[q], 1);
        len += 0.5 * h * w[q] * v.head<2>().norm();
      }
    }
  }
  return len;
}

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize(const Trajectory& traj) {
  std::string out = "trajectory\npieces " + std::to_string(traj.pieces()) + "\ndim " +
                    std::to_string(traj.dim()) + "\n";
  for (int i = 0; i < traj.pieces(); ++i) {
    out += "piece " + fmt17(traj.duration(i)) + "\n";
    const auto c = traj.piece_coeffs(i);
    for (int j = 0; j < Trajectory::kCoeffs; ++j) {
      for (int d = 0; d < traj.dim(); ++d) {
        if (d) out += ' ';
        out += fmt17(c(j, d));
      }
      out += '\n';
    }
  }
  return out;
}

Trajectory deserialize_trajectory(std::string_view document) {
  std::istringstream in{std::string(document)};
  std::string tag;
  int pieces = 0, dim = 0;
  if (!(in >> tag) || tag != "trajectory") throw ParseError("missing trajectory header");
  if (!(in >> tag >> pieces) || tag != "pieces" || pieces < 1) throw ParseError("bad piece count");
  if (!(in >> tag >> dim) || tag != "dim" || dim < 1) throw ParseError("bad dimension");
  Eigen::VectorXd durs(pieces);
  Eigen::MatrixXd coeffs(Trajectory::kCoeffs * pieces, dim);
  for (int i = 0; i < pieces; ++i) {
    if (!(in >> tag >> durs(i)) || tag != "piece") throw ParseError("bad piece header");
    for (int j = 0; j < Trajectory::kCoeffs; ++j)
      for (int d = 0; d < dim; ++d)
        if (!(in >> coeffs(Trajectory::kCoeffs * i + j, d))) throw ParseError("bad coefficient");
  }
  return Trajectory(std::move(durs), std::move(coeffs));
}

BandedSystem::BandedSystem(int n, int lower, int upper)
    : n_(n), lower_(lower), upper_(upper), data_(static_cast<std::size_t>(n) * (lower + upper + 1), 0.0) {}

void BandedSystem::reset() { std::fill(data_.begin(), data_.end(), 0.0); }

void BandedSystem::factorize_lu() {
  for (int k = 0; k <= n_ - 2; ++k) {
    const int i_max = std::min(k + lower_, n_ - 1);
    const double pivot = (*this)(k, k);
    for (int i = k + 1; i <= i_max; ++i)
      if ((*this)(i, k) != 0.0) (*this)(i, k) /= pivot;
    const int j_max = std::min(k + upper_, n_ - 1);
    for (int j = k + 1; j <= j_max; ++j) {
      const double v = (*this)(k, j);
      if (v == 0.0) continue;
      for (int i = k + 1; i <= i_max; ++i)
        if ((*this)(i, k) != 0.0) (*this)(i, j) -= (*this)(i, k) * v;
    }
  }
}

void BandedSystem::solve(Eigen::MatrixXd& b) const {
  for (int j = 0; j < n_; ++j) {
    const int i_max = std::min(j + lower_, n_ - 1);
    for (int i = j + 1; i <= i_max; ++i)
      if ((*this)(i, j) != 0.0) b.row(i) -= (*this)(i, j) * b.row(j);
  }
  for (int j = n_ - 1; j >= 0; --j) {
    b.row(j) /= (*this)(j, j);
    for (int i = std::max(0, j - upper_); i <= j - 1; ++i)
      if ((*this)(i, j) != 0.0) b.row(i) -= (*this)(i, j) * b.row(j);
  }
}

void BandedSystem::solve_adjoint(Eigen::MatrixXd& b) const {
  for (int j = 0; j < n_; ++j) {
    b.row(j) /= (*this)(j, j);
    const int i_max = std::min(j + upper_, n_ - 1);
    for (int i = j + 1; i <= i_max; ++i)
      if ((*this)(j, i) != 0.0) b.row(i) -= (*this)(j, i) * b.row(j);
  }
  for (int j = n_ - 1; j >= 0; --j) {
    for (int i = std::max(0, j - lower_); i <= j - 1; ++i)
      if ((*this)(j, i) != 0.0) b.row(i) -= (*this)(j, i) * b.row(j);
  }
}

Eigen::MatrixXd BandedSystem::multiply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_, x.cols());
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j)
      y.row(i) += (*this)(i, j) * x.row(j);
  return y;
}

Eigen::MatrixXd BandedSystem::dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - lower_); j <= std::min(n_ - 1, i + upper_); ++j) a(i, j) = (*this)(i, j);
  return a;
}

Minco::Minco(BoundaryCondition head, BoundaryCondition tail, int pieces)
    : pieces_(pieces), head_(std::move(head)), tail_(std::move(tail)) {
  if (pieces < 1) throw ArgumentError("need at least one piece");
  if (head_.rows() != tail_.rows()) throw ArgumentError("boundary dimensions differ");
}

void Minco::generate(const Eigen::MatrixXd& waypoints, const Eigen::VectorXd& durations) {
  const int M = pieces_;
  const int m = dim();
  if (durations.size() != M) throw ArgumentError("need one duration per piece");
  if (waypoints.cols() != M - 1 || (M > 1 && waypoints.rows() != m))
    throw ArgumentError("waypoint count must be pieces - 1");
  for (int i = 0; i < M; ++i)
    if (!(durations(i) > 0.0)) throw ArgumentError("piece durations must be positive");

  durations_ = durations;
  system_ = BandedSystem(6 * M, 6, 6);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6 * M, m);
  BandedSystem& A = system_;

  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  A(2, 2) = 2.0;
  b.row(0) = head_.col(0).transpose();
  b.row(1) = head_.col(1).transpose();
  b.row(2) = head_.col(2).transpose();

  for (int i = 0; i < M - 1; ++i) {
    const double t1 = durations(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    const int r = 6 * i + 3, c = 6 * i;
    // jerk continuity
    A(r, c + 3) = 6.0;
    A(r, c + 4) = 24.0 * t1;
    A(r, c + 5) = 60.0 * t2;
    A(r, c + 9) = -6.0;
    // snap continuity
    A(r + 1, c + 4) = 24.0;
    A(r + 1, c + 5) = 120.0 * t1;
    A(r + 1, c + 10) = -24.0;
    // waypoint interpolation
    A(r + 2, c + 0) = 1.0;
    A(r + 2, c + 1) = t1;
    A(r + 2, c + 2) = t2;
    A(r + 2, c + 3) = t3;
    A(r + 2, c + 4) = t4;
    A(r + 2, c + 5) = t5;
    // position continuity
    A(r + 3, c + 0) = 1.0;
    A(r + 3, c + 1) = t1;
    A(r + 3, c + 2) = t2;
    A(r + 3, c + 3) = t3;
    A(r + 3, c + 4) = t4;
    A(r + 3, c + 5) = t5;
    A(r + 3, c + 6) = -1.0;
    // velocity continuity
    A(r + 4, c + 1) = 1.0;
    A(r + 4, c + 2) = 2.0 * t1;
    A(r + 4, c + 3) = 3.0 * t2;
    A(r + 4, c + 4) = 4.0 * t3;
    A(r + 4, c + 5) = 5.0 * t4;
    A(r + 4, c + 7) = -1.0;
    // acceleration continuity
    A(r + 5, c + 2) = 2.0;
    A(r + 5, c + 3) = 6.0 * t1;
    A(r + 5, c + 4) = 12.0 * t2;
    A(r + 5, c + 5) = 20.0 * t3;
    A(r + 5, c + 8) = -2.0;

    b.row(r + 2) = waypoints.col(i).transpose();
  }

  {
    const double t1 = durations(M - 1), t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    const int r = 6 * M - 3, c = 6 * (M - 1);
    A(r, c + 0) = 1.0;
    A(r, c + 1) = t1;
    A(r, c + 2) = t2;
    A(r, c + 3) = t3;
    A(r, c + 4) = t4;
    A(r, c + 5) = t5;
    A(r + 1, c + 1) = 1.0;
    A(r + 1, c + 2) = 2.0 * t1;
    A(r + 1, c + 3) = 3.0 * t2;
    A(r + 1, c + 4) = 4.0 * t3;
    A(r + 1, c + 5) = 5.0 * t4;
    A(r + 2, c + 2) = 2.0;
    A(r + 2, c + 3) = 6.0 * t1;
    A(r + 2, c + 4) = 12.0 * t2;
    A(r + 2, c + 5) = 20.0 * t3;
    b.row(r) = tail_.col(0).transpose();
    b.row(r + 1) = tail_.col(1).transpose();
    b.row(r + 2) = tail_.col(2).transpose();
  }

  const BandedSystem original = A;
  A.factorize_lu();
  coeffs_ = b;
  A.solve(coeffs_);

  // The unpivoted band LU is fine for well-scaled durations; fall back to a
  // pivoted dense solve when the residual says otherwise.
  const double residual = (original.multiply(coeffs_) - b).cwiseAbs().maxCoeff();
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  dense_lu_.reset();
  if (!std::isfinite(residual) || residual > 1e-8 * scale) {
    dense_lu_.emplace(original.dense());
    coeffs_ = dense_lu_->solve(b);
  }
}

double Minco::energy() const { return control_effort(trajectory()); }

Eigen::MatrixXd control_effort_grad_coeffs(const Trajectory& traj) {
  const Eigen::MatrixXd& coeffs = traj.coefficients();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(coeffs.rows(), coeffs.cols());
  for (int i = 0; i < traj.pieces(); ++i) {
    const auto c = traj.piece_coeffs(i);
    const double t1 = traj.duration(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    g.row(6 * i + 3) = 72.0 * c.row(3) * t1 + 144.0 * c.row(4) * t2 + 240.0 * c.row(5) * t3;
    g.row(6 * i + 4) = 144.0 * c.row(3) * t2 + 384.0 * c.row(4) * t3 + 720.0 * c.row(5) * t4;
    g.row(6 * i + 5) = 240.0 * c.row(3) * t3 + 720.0 * c.row(4) * t4 + 1440.0 * c.row(5) * t5;
  }
  return g;
}

Eigen::VectorXd control_effort_grad_times(const Trajectory& traj) {
  Eigen::VectorXd g(traj.pieces());
  for (int i = 0; i < traj.pieces(); ++i) {
    const auto c = traj.piece_coeffs(i);
    const double t1 = traj.duration(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1;
    g(i) = 36.0 * c.row(3).squaredNorm() + 288.0 * c.row(4).dot(c.row(3)) * t1 +
           576.0 * c.row(4).squaredNorm() * t2 + 720.0 * c.row(5).dot(c.row(3)) * t2 +
           2880.0 * c.row(5).dot(c.row(4)) * t3 + 3600.0 * c.row(5).squaredNorm() * t4;
  }
  return g;
}

Eigen::MatrixXd Minco::energy_grad_coeffs() const { return control_effort_grad_coeffs(trajectory()); }

Eigen::VectorXd Minco::energy_grad_times() const { return control_effort_grad_times(trajectory()); }

void Minco::propagate_grad(const Eigen::MatrixXd& grad_coeffs, const Eigen::VectorXd& grad_times,
                           Eigen::MatrixXd& grad_waypoints, Eigen::VectorXd& grad_times_total) const {
  const int M = pieces_;
  Eigen::MatrixXd adj = grad_coeffs;
  if (dense_lu_) {
    adj = dense_lu_->transpose().solve(grad_coeffs);
  } else {
    system_.solve_adjoint(adj);
  }

  grad_waypoints.resize(dim(), M - 1);
  for (int i = 0; i < M - 1; ++i) grad_waypoints.col(i) = adj.row(6 * i + 5).transpose();

  grad_times_total = grad_times;
  Trajectory traj = trajectory();
  for (int i = 0; i < M - 1; ++i) {
    const double T = durations_(i);
    const int r = 6 * i + 3;
    // d(A c)/dT_i row by row for the junction block of piece i
    const Eigen::VectorXd vel = traj.eval_piece(i, T, 1);
    const Eigen::VectorXd acc = traj.eval_piece(i, T, 2);
    const Eigen::VectorXd jerk = traj.eval_piece(i, T, 3);
    const Eigen::VectorXd snap = traj.eval_piece(i, T, 4);
    const Eigen::VectorXd crackle = traj.eval_piece(i, T, 5);
    double g = 0.0;
    g += adj.row(r).dot(snap);
    g += adj.row(r + 1).dot(crackle);
    g += adj.row(r + 2).dot(vel);
    g += adj.row(r + 3).dot(vel);
    g += adj.row(r + 4).dot(acc);
    g += adj.row(r + 5).dot(jerk);
    grad_times_total(i) -= g;
  }
  {
    const double T = durations_(M - 1);
    const int r = 6 * M - 3;
    const Eigen::VectorXd vel = traj.eval_piece(M - 1, T, 1);
    const Eigen::VectorXd acc = traj.eval_piece(M - 1, T, 2);
    const Eigen::VectorXd jerk = traj.eval_piece(M - 1, T, 3);
    grad_times_total(M - 1) -= adj.row(r).dot(vel) + adj.row(r + 1).dot(acc) + adj.row(r + 2).dot(jerk);
  }
}

Trajectory construct(const BoundaryCondition& head, const BoundaryCondition& tail,
                     const Eigen::MatrixXd& waypoints, const Eigen::VectorXd& durations) {
  Minco minco(head, tail, static_cast<int>(durations.size()));
  minco.generate(waypoints, durations);
  return minco.trajectory();
}

MincoGradients gradients(const Minco& minco, const Eigen::MatrixXd& grad_coeffs,
                         const Eigen::VectorXd& grad_times) {
  MincoGradients out;
  minco.propagate_grad(grad_coeffs, grad_times, out.waypoints, out.times);
  return out;
}

Eigen::MatrixXd quintic_piece(const BoundaryCondition& start, const BoundaryCondition& end,
                              double duration) {
  if (!(duration > 0.0)) throw ArgumentError("piece duration must be positive");
  Eigen::Matrix<double, 6, 6> a;
  a.row(0) = basis(0.0, 0).transpose();
  a.row(1) = basis(0.0, 1).transpose();
  a.row(2) = basis(0.0, 2).transpose();
  a.row(3) = basis(duration, 0).transpose();
  a.row(4) = basis(duration, 1).transpose();
  a.row(5) = basis(duration, 2).transpose();
  Eigen::MatrixXd rhs(6, start.rows());
  rhs.topRows(3) = start.transpose();
  rhs.bottomRows(3) = end.transpose();
  return a.fullPivLu().solve(rhs);
}

}  // namespace wbplan
