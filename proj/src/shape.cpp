#include "wbplan/shape.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace wbplan {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  if (v > 1e-14) return 1;
  if (v < -1e-14) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) - 1e-14 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-14 &&
         std::min(a.y(), b.y()) - 1e-14 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-14;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

Vec2 area_centroid(const std::vector<Vec2>& v) {
  double area = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const double w = cross(a, b);
    area += w;
    c += w * (a + b);
  }
  if (std::abs(area) < 1e-300) throw GeometryError("polygon has zero area");
  return c / (3.0 * area);
}

}  // namespace

RobotShape::RobotShape(std::vector<Vec2> vertices) : RobotShape(vertices, area_centroid(vertices)) {}

RobotShape::RobotShape(std::vector<Vec2> vertices, const Vec2& reference) : reference_(reference) {
  const std::size_t n = vertices.size();
  if (n < 3) throw GeometryError("robot polygon needs at least three vertices");

  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) area += cross(vertices[i], vertices[(i + 1) % n]);
  if (std::abs(area) < 1e-12) throw GeometryError("robot polygon has zero area");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
        throw GeometryError("robot polygon is not simple");
    }
  }

  vertices_.reserve(n);
  for (const auto& v : vertices) vertices_.push_back(v - reference);

  if (winding_number(Vec2::Zero()) == 0)
    throw GeometryError("reference point lies outside the robot polygon");

  inscribed_radius_ = std::numeric_limits<double>::infinity();
  circumradius_ = 0.0;
  aabb_min_ = aabb_max_ = vertices_.front();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    inscribed_radius_ = std::min(inscribed_radius_, closest_on_segment(Vec2::Zero(), a, b).norm());
    circumradius_ = std::max(circumradius_, a.norm());
    aabb_min_ = aabb_min_.cwiseMin(a);
    aabb_max_ = aabb_max_.cwiseMax(a);
  }
  if (inscribed_radius_ <= 1e-12)
    throw GeometryError("reference point lies on the robot polygon boundary");

  // Largest m whose rotation by 2*pi/m about the reference maps the vertex set onto itself.
  const double tol = 1e-9 * circumradius_;
  for (int m = 12; m >= 2; --m) {
    const Mat2 r = rotation(2.0 * std::numbers::pi / m);
    const bool maps = std::all_of(vertices_.begin(), vertices_.end(), [&](const Vec2& v) {
      const Vec2 w = r * v;
      return std::any_of(vertices_.begin(), vertices_.end(), [&](const Vec2& u) { return (u - w).norm() <= tol; });
    });
    if (maps) {
      symmetry_order_ = m;
      break;
    }
  }
}

int RobotShape::winding_number(const Vec2& q) const {
  int wn = 0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    if (a.y() <= q.y()) {
      if (b.y() > q.y() && cross(b - a, q - a) > 0.0) ++wn;
    } else if (b.y() <= q.y() && cross(b - a, q - a) < 0.0) {
      --wn;
    }
  }
  return wn;
}

std::vector<Vec2> RobotShape::outline(const Pose2& pose) const {
  const Mat2 r = rotation(pose.yaw);
  std::vector<Vec2> out;
  out.reserve(vertices_.size());
  for (const auto& v : vertices_) out.push_back(pose.position + r * v);
  return out;
}

RobotShape load_shape(std::string_view document) {
  std::vector<Vec2> vertices;
  std::optional<Vec2> reference;
  std::istringstream in{std::string(document)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line.substr(first));
    std::string key;
    ls >> key;
    Vec2 p;
    if (!(ls >> p.x() >> p.y()))
      throw ParseError("shape line " + std::to_string(line_no) + ": expected two numbers");
    if (key == "vertex:") {
      vertices.push_back(p);
    } else if (key == "reference:") {
      reference = p;
    } else {
      throw ParseError("shape line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  if (reference) return RobotShape(std::move(vertices), *reference);
  return RobotShape(std::move(vertices));
}

RobotShape load_shape_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open shape file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_shape(buf.str());
}

double inscribed_radius(const RobotShape& shape) { return shape.inscribed_radius(); }

SdfSample body_sdf_gradient(const RobotShape& shape, const Vec2& q) {
  const auto& v = shape.vertices();
  double best = std::numeric_limits<double>::infinity();
  Vec2 nearest = v.front();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 c = closest_on_segment(q, v[i], shape.vertex(i + 1));
    const double d2 = (q - c).squaredNorm();
    if (d2 < best) {
      best = d2;
      nearest = c;
    }
  }
  const double dist = std::sqrt(best);
  SdfSample out;
  if (dist <= 1e-12) {
    out.value = 0.0;
    return out;
  }
  const bool inside = shape.winding_number(q) != 0;
  out.value = inside ? -dist : dist;
  out.gradient = (q - nearest) / dist;
  if (inside) out.gradient = -out.gradient;
  return out;
}

double body_sdf(const RobotShape& shape, const Vec2& q) { return body_sdf_gradient(shape, q).value; }

BodyEsdf::BodyEsdf(const RobotShape& shape, double resolution, double padding)
    : resolution_(resolution) {
  if (!(resolution > 0.0)) throw ArgumentError("esdf resolution must be positive");
  if (padding < resolution) throw ArgumentError("esdf padding must be at least one cell");
  origin_ = shape.aabb_min() - Vec2::Constant(padding);
  const Vec2 extent = shape.aabb_max() - shape.aabb_min() + Vec2::Constant(2.0 * padding);
  const int nx = static_cast<int>(std::ceil(extent.x() / resolution - 1e-9));
  const int ny = static_cast<int>(std::ceil(extent.y() / resolution - 1e-9));

  values_.resize(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) values_(i, j) = body_sdf(shape, node_center(i, j));

  grad_x_.resize(nx, ny);
  grad_y_.resize(nx, ny);
  const double h = resolution_;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      // central differences, one-sided at the window border
      const int il = std::max(i - 1, 0), ir = std::min(i + 1, nx - 1);
      const int jl = std::max(j - 1, 0), jr = std::min(j + 1, ny - 1);
      grad_x_(i, j) = ir > il ? (values_(ir, j) - values_(il, j)) / (h * (ir - il)) : 0.0;
      grad_y_(i, j) = jr > jl ? (values_(i, jr) - values_(i, jl)) / (h * (jr - jl)) : 0.0;
    }
  }
}

bool BodyEsdf::contains(const Vec2& q) const {
  const Vec2 u = (q - origin_) / resolution_ - Vec2::Constant(0.5);
  return u.x() >= 0.0 && u.y() >= 0.0 && u.x() <= cols() - 1 && u.y() <= rows() - 1;
}

SdfSample BodyEsdf::sample(const Vec2& q) const {
  if (!contains(q)) throw OutOfWindowError("query outside the body esdf window");
  const Vec2 u = (q - origin_) / resolution_ - Vec2::Constant(0.5);
  const int i0 = std::min(static_cast<int>(std::floor(u.x())), cols() - 2);
  const int j0 = std::min(static_cast<int>(std::floor(u.y())), rows() - 2);
  const double fx = u.x() - i0, fy = u.y() - j0;
  auto bilerp = [&](const Eigen::MatrixXd& m) {
    return (1 - fx) * (1 - fy) * m(i0, j0) + fx * (1 - fy) * m(i0 + 1, j0) +
           (1 - fx) * fy * m(i0, j0 + 1) + fx * fy * m(i0 + 1, j0 + 1);
  };
  SdfSample out;
  out.value = bilerp(values_);
  out.gradient = Vec2(bilerp(grad_x_), bilerp(grad_y_));
  return out;
}

BodyEsdf build_body_esdf(const RobotShape& shape, double resolution, double padding) {
  return BodyEsdf(shape, resolution, padding);
}

SdfSample sdf_gradient_world(const BodyEsdf& esdf, const Vec2& x_obs, const Pose2& pose) {
  const Mat2 r = rotation(pose.yaw);
  SdfSample s = esdf.sample(r.transpose() * (x_obs - pose.position));
  s.gradient = r * s.gradient;
  return s;
}

RobotKernel::RobotKernel(const RobotShape& shape, int n_orientations, double resolution)
    : resolution_(resolution), yaw_period_(2.0 * std::numbers::pi / shape.symmetry_order()) {
  if (n_orientations < 1) throw ArgumentError("kernel needs at least one orientation");
  if (!(resolution > 0.0)) throw ArgumentError("kernel resolution must be positive");
  footprints_.resize(n_orientations);
  const int reach = static_cast<int>(std::ceil(shape.circumradius() / resolution)) + 1;
  for (int k = 0; k < n_orientations; ++k) {
    const Mat2 rt = rotation(k * angular_step()).transpose();
    auto& cells = footprints_[k];
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const Vec2 q = rt * (resolution * Vec2(dx, dy));
        if (body_sdf(shape, q) < 0.0) cells.emplace_back(dx, dy);
      }
    }
    if (cells.empty()) cells.emplace_back(0, 0);
  }
}

int RobotKernel::nearest_index(double yaw) const {
  const double step = angular_step();
  const int n = n_orientations();
  int k = static_cast<int>(std::lround(yaw / step)) % n;
  if (k < 0) k += n;
  return k;
}

RobotKernel build_kernel(const RobotShape& shape, int n_orientations, double resolution) {
  return RobotKernel(shape, n_orientations, resolution);
}

bool kernel_collides(const RobotKernel& kernel, const OccupancyGrid& grid, const Vec2& p, int k) {
  if (k < 0 || k >= kernel.n_orientations()) throw ArgumentError("orientation index out of range");
  if (std::abs(kernel.resolution() - grid.resolution()) > 1e-12 * grid.resolution())
    throw ArgumentError("kernel and map resolution differ");
  const Cell ref = grid.world_to_cell(p);
  for (const Cell& off : kernel.footprint(k))
    if (grid.occupied_or_outside(ref + off)) return true;
  return false;
}

}  // namespace wbplan
