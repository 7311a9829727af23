#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbplan {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Cell = Eigen::Vector2i;

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Rotation2 = Eigen::Matrix<Scalar, 2, 2>;

using Polyline = std::vector<Vec2>;

// Error hierarchy. Each module throws the narrowest type that applies.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MapError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct OutOfWindowError : Error {
  using Error::Error;
};
struct InfeasibleEndpointError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct DegenerateInputError : Error {
  using Error::Error;
};
struct SpliceError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};

/// Rotation taking body-frame vectors to the world frame.
template <typename Scalar>
Rotation2<Scalar> rotation(Scalar yaw) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(yaw), s = sin(yaw);
  Rotation2<Scalar> r;
  r << c, -s, s, c;
  return r;
}

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * pi);
  if (a <= -pi) a += Scalar(2) * pi;
  return a;
}

struct Pose2 {
  Vec2 position{Vec2::Zero()};
  double yaw{0.0};
};

double polyline_length(const Polyline& path);

}  // namespace wbplan
