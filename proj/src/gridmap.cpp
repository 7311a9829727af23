#include "wbplan/gridmap.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace wbplan {

double polyline_length(const Polyline& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  return len;
}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin)
    : resolution_(resolution), origin_(std::move(origin)) {
  if (width < 1 || height < 1) throw MapError("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw MapError("grid resolution must be positive");
  cells_ = CellArray::Constant(width, height, false);
}

Cell OccupancyGrid::world_to_cell(const Vec2& p) const {
  const Vec2 u = (p - origin_) / resolution_;
  return Cell(static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())));
}

Vec2 OccupancyGrid::cell_center(const Cell& c) const {
  return origin_ + resolution_ * (c.cast<double>() + Vec2::Constant(0.5));
}

bool OccupancyGrid::operator==(const OccupancyGrid& other) const {
  return width() == other.width() && height() == other.height() &&
         resolution_ == other.resolution_ && origin_ == other.origin_ &&
         (cells_ == other.cells_).all();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

OccupancyGrid load_map(std::string_view document) {
  std::optional<double> resolution;
  Vec2 origin = Vec2::Zero();
  std::vector<std::string> rows;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= document.size()) {
    const std::size_t end = std::min(document.find('\n', pos), document.size());
    const std::string_view line = trim(document.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == document.size()) break;
      continue;
    }
    if (line.starts_with("resolution:")) {
      std::istringstream in(std::string(line.substr(11)));
      double r = 0.0;
      if (!(in >> r)) throw MapError("line " + std::to_string(line_no) + ": bad resolution");
      if (!(r > 0.0)) throw MapError("resolution must be positive");
      resolution = r;
    } else if (line.starts_with("origin:")) {
      std::istringstream in(std::string(line.substr(7)));
      if (!(in >> origin.x() >> origin.y()))
        throw MapError("line " + std::to_string(line_no) + ": bad origin");
    } else {
      for (char ch : line) {
        if (ch != '#' && ch != '.')
          throw MapError("line " + std::to_string(line_no) + ": unknown map character '" +
                         std::string(1, ch) + "'");
      }
      rows.emplace_back(line);
    }
    if (end == document.size()) break;
  }

  if (!resolution) throw MapError("missing resolution header");
  if (rows.empty()) throw MapError("empty raster");
  const std::size_t width = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != width) throw MapError("ragged raster rows");
  }

  const int height = static_cast<int>(rows.size());
  OccupancyGrid grid(static_cast<int>(width), height, *resolution, origin);
  for (int r = 0; r < height; ++r) {
    const int iy = height - 1 - r;
    for (std::size_t ix = 0; ix < width; ++ix) grid.set(static_cast<int>(ix), iy, rows[r][ix] == '#');
  }
  return grid;
}

OccupancyGrid load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open map file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_map(buf.str());
}

std::string save_map(const OccupancyGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "resolution: " << grid.resolution() << "\n";
  out << "origin: " << grid.origin().x() << " " << grid.origin().y() << "\n";
  for (int iy = grid.height() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.width(); ++ix) out << (grid.occupied(ix, iy) ? '#' : '.');
    out << "\n";
  }
  return out.str();
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  if (radius < 0.0) throw ArgumentError("inflation radius must be non-negative");
  OccupancyGrid out = grid;
  const double r_cells = radius / grid.resolution();
  const int reach = static_cast<int>(std::floor(r_cells + 1e-9));
  if (reach == 0) return out;

  // Integer offsets within the disc; a small tolerance keeps exact-boundary
  // offsets (e.g. radius == 2 cells) inside.
  std::vector<Cell> disc;
  const double r2 = r_cells * r_cells * (1.0 + 1e-12);
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx)
      if (double(dx * dx + dy * dy) <= r2) disc.emplace_back(dx, dy);

  for (int iy = 0; iy < grid.height(); ++iy) {
    for (int ix = 0; ix < grid.width(); ++ix) {
      if (!grid.occupied(ix, iy)) continue;
      for (const Cell& d : disc) {
        const Cell c(ix + d.x(), iy + d.y());
        if (grid.in_bounds(c)) out.set(c, true);
      }
    }
  }
  return out;
}

std::vector<Vec2> extract_obstacles(const OccupancyGrid& grid, const Vec2& center,
                                    double half_extent) {
  std::vector<Vec2> points;
  const Vec2 lo = center - Vec2::Constant(half_extent);
  const Vec2 hi = center + Vec2::Constant(half_extent);
  const Cell c0 = grid.world_to_cell(lo);
  const Cell c1 = grid.world_to_cell(hi);
  const int x0 = std::max(0, c0.x()), y0 = std::max(0, c0.y());
  const int x1 = std::min(grid.width() - 1, c1.x()), y1 = std::min(grid.height() - 1, c1.y());
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      if (!grid.occupied(ix, iy)) continue;
      const Vec2 p = grid.cell_center(ix, iy);
      if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) points.push_back(p);
    }
  }
  return points;
}

namespace {

constexpr double kGridEps = 1e-9;

// Indices of the closed unit intervals containing coordinate u.
int containing(double u, int out[2]) {
  const double r = std::round(u);
  if (std::abs(u - r) < kGridEps) {
    out[0] = static_cast<int>(r) - 1;
    out[1] = static_cast<int>(r);
    return 2;
  }
  out[0] = static_cast<int>(std::floor(u));
  return 1;
}

// Visits supercover cells in order; fn returns false to stop early.
template <typename Fn>
void walk_supercover(const OccupancyGrid& grid, const Vec2& a, const Vec2& b, Fn&& fn) {
  const Vec2 ua = (a - grid.origin()) / grid.resolution();
  const Vec2 ub = (b - grid.origin()) / grid.resolution();
  const Vec2 d = ub - ua;

  std::vector<double> ts{0.0, 1.0};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) continue;
    const double lo = std::min(ua[axis], ub[axis]), hi = std::max(ua[axis], ub[axis]);
    for (int k = static_cast<int>(std::ceil(lo)); k <= static_cast<int>(std::floor(hi)); ++k) {
      const double t = (k - ua[axis]) / d[axis];
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(), [](double x, double y) { return y - x < 1e-12; }),
           ts.end());

  std::vector<double> samples;
  samples.reserve(2 * ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    samples.push_back(ts[i]);
    if (i + 1 < ts.size()) samples.push_back(0.5 * (ts[i] + ts[i + 1]));
  }

  std::vector<Cell> previous, current;
  for (double t : samples) {
    const Vec2 u = ua + t * d;
    int xs[2], ys[2];
    const int nx = containing(u.x(), xs), ny = containing(u.y(), ys);
    current.clear();
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        const Cell c(xs[i], ys[j]);
        if (!grid.in_bounds(c)) continue;
        current.push_back(c);
        if (std::find(previous.begin(), previous.end(), c) != previous.end()) continue;
        if (!fn(c)) return;
      }
    }
    std::swap(previous, current);
  }
}

}  // namespace

std::vector<Cell> supercover(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
  std::vector<Cell> cells;
  walk_supercover(grid, a, b, [&](const Cell& c) {
    cells.push_back(c);
    return true;
  });
  return cells;
}

Visibility visibility(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
  if (!grid.in_bounds(a) || !grid.in_bounds(b))
    throw ArgumentError("visibility endpoint outside the grid");
  Visibility result;
  walk_supercover(grid, a, b, [&](const Cell& c) {
    if (grid.occupied(c)) {
      result.visible = false;
      result.blocked_at = grid.cell_center(c);
      return false;
    }
    return true;
  });
  return result;
}

}  // namespace wbplan
