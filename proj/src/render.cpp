#include "wbplan/render.hpp"

#include <cstdio>

namespace wbplan {

namespace {

constexpr double kPixelsPerMeter = 100.0;

// Builds an SVG document in world coordinates with y pointing up.
class Svg {
 public:
  explicit Svg(const OccupancyGrid& g) : g_(g) {
    const double w = g.width() * g.resolution(), h = g.height() * g.resolution();
    body_ += open_tag(w, h);
    body_ += "<g transform=\"matrix(1 0 0 -1 " + num(-g.origin().x()) + " " + num(h + g.origin().y()) + ")\">\n";
    body_ += "<rect x=\"" + num(g.origin().x()) + "\" y=\"" + num(g.origin().y()) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x)
        if (g.occupied(Cell(x, y))) {
          const Vec2 c = g.cell_center(x, y) - Vec2::Constant(0.5 * g.resolution());
          body_ += "<rect x=\"" + num(c.x()) + "\" y=\"" + num(c.y()) + "\" width=\"" + num(g.resolution()) +
                   "\" height=\"" + num(g.resolution()) + "\" fill=\"#333\"/>\n";
        }
  }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& color, double width, bool closed = false,
                const std::string& extra = "") {
    if (pts.empty()) return;
    std::string d = "M";
    for (const auto& p : pts) d += " " + num(p.x()) + " " + num(p.y());
    if (closed) d += " Z";
    body_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
             "\"" + extra + "/>\n";
  }

  void circle(const Vec2& p, double r, const std::string& color) {
    body_ += "<circle cx=\"" + num(p.x()) + "\" cy=\"" + num(p.y()) + "\" r=\"" + num(r) + "\" fill=\"" + color +
             "\"/>\n";
  }

  void pose(const Pose2& p, const std::string& color) {
    circle(p.position, 0.6 * g_.resolution(), color);
    const Vec2 tip = p.position + 2.0 * g_.resolution() * Vec2(std::cos(p.yaw), std::sin(p.yaw));
    polyline({p.position, tip}, color, 0.3 * g_.resolution());
  }

  std::string finish() { return body_ + "</g>\n</svg>\n"; }

 private:
  std::string open_tag(double w, double h) const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           num(w * kPixelsPerMeter) + "\" height=\"" + num(h * kPixelsPerMeter) + "\" viewBox=\"0 0 " + num(w) +
           " " + num(h) + "\">\n";
  }

  const OccupancyGrid& g_;
  std::string body_;
};

const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % 7];
}

const char* provenance_color(PieceSource s) {
  switch (s) {
    case PieceSource::SE2: return "#d62728";
    case PieceSource::R2: return "#1f77b4";
    case PieceSource::R2Reoptimized: return "#ff7f0e";
  }
  return "black";
}

std::vector<Vec2> sample_positions(const Trajectory& traj, int piece, int n) {
  std::vector<Vec2> out;
  for (int k = 0; k <= n; ++k) {
    const Eigen::VectorXd p = traj.eval_piece(piece, traj.duration(piece) * k / n, 0);
    out.emplace_back(p(0), p(1));
  }
  return out;
}

}  // namespace

std::string render_candidates(const World& world, const std::vector<CandidateReport>& candidates,
                              const Pose2& start, const Pose2& goal) {
  Svg svg(world.grid);
  const double res = world.grid.resolution();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    svg.polyline(candidates[i].topo_path, palette(i), 0.15 * res, false, " stroke-dasharray=\"0.05 0.05\"");
    svg.polyline(candidates[i].refined.positions(), palette(i), 0.3 * res);
  }
  svg.pose(start, "#2ca02c");
  svg.pose(goal, "#d62728");
  return svg.finish();
}

std::string render_sequence(const World& world, const CandidateReport& candidate) {
  Svg svg(world.grid);
  const double res = world.grid.resolution();
  svg.polyline(candidate.refined.positions(), "#999", 0.2 * res);
  for (const auto& s : candidate.sequence.states) {
    const bool high = s.risk == Risk::High;
    svg.circle(s.position, 0.25 * res, high ? "#d62728" : "#2ca02c");
    const double yaw = world.kernel.yaw(s.k);
    svg.polyline({s.position, s.position + res * Vec2(std::cos(yaw), std::sin(yaw))}, high ? "#d62728" : "#2ca02c",
                 0.1 * res);
  }
  return svg.finish();
}

std::string render_trajectory(const OccupancyGrid& grid, const Trajectory& traj,
                              const std::vector<PieceSource>& provenance) {
  Svg svg(grid);
  for (int i = 0; i < traj.pieces(); ++i) {
    const PieceSource src = i < static_cast<int>(provenance.size()) ? provenance[i] : PieceSource::R2;
    svg.polyline(sample_positions(traj, i, 16), provenance_color(src), 0.3 * grid.resolution(), false,
                 " class=\"piece " + to_string(src) + "\"");
  }
  return svg.finish();
}

std::string render_swept(const OccupancyGrid& grid, const RobotShape& shape, const Trajectory& traj,
                         int samples) {
  Svg svg(grid);
  for (const auto& outline : swept_boundary_samples(traj, shape, samples))
    svg.polyline(outline, "#1f77b4", 0.1 * grid.resolution(), true);
  return svg.finish();
}

}  // namespace wbplan
