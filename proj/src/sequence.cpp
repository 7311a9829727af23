#include "wbplan/sequence.hpp"

#include <algorithm>

namespace wbplan {

std::size_t MotionSequence::high_risk_count() const {
  return static_cast<std::size_t>(std::count_if(
      states.begin(), states.end(), [](const MotionState& s) { return s.risk == Risk::High; }));
}

std::vector<int> safe_yaw(const Vec2& p, int preferred_k, const RobotKernel& kernel,
                          const OccupancyGrid& grid, int search_range) {
  const int n = kernel.n_orientations();
  if (search_range < 0 || 2 * search_range > n)
    throw ArgumentError("search range must lie in [0, n_orientations / 2]");
  auto wrap = [n](int k) { return ((k % n) + n) % n; };

  std::vector<int> order{wrap(preferred_k)};
  for (int d = 1; d <= search_range; ++d) {
    order.push_back(wrap(preferred_k + d));
    order.push_back(wrap(preferred_k - d));
  }
  std::vector<int> free;
  for (int k : order) {
    if (std::find(free.begin(), free.end(), k) != free.end()) continue;
    if (!kernel_collides(kernel, grid, p, k)) free.push_back(k);
  }
  return free;
}

Polyline discretize_segment(const Vec2& a, const Vec2& b, double step) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
  Polyline out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) out.push_back(a + (b - a) * (double(i) / n));
  out.back() = b;
  return out;
}

namespace {

int heading_index(const RobotKernel& kernel, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  if (d.squaredNorm() == 0.0) return 0;
  return kernel.nearest_index(std::atan2(d.y(), d.x()));
}

struct Adjuster {
  const RobotShape& shape;
  const BodyEsdf& esdf;
  const RobotKernel& kernel;
  const OccupancyGrid& grid;
  const SequenceOptions& options;
  double margin;

  bool run(const Vec2& a, const Vec2& b, int depth, Polyline& out) const {
    const Polyline pts = discretize_segment(a, b, grid.resolution());
    const int pref = heading_index(kernel, a, b);
    std::size_t bad = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (safe_yaw(pts[i], pref, kernel, grid, options.search_range).empty()) {
        bad = i;
        break;
      }
    }
    if (bad == pts.size()) {
      out.push_back(b);
      return true;
    }
    if (bad == 0 || bad + 1 == pts.size() || depth >= options.max_depth) return false;

    const double yaw = std::atan2((b - a).y(), (b - a).x());
    const PushResult pushed = push_away(shape, esdf, {pts[bad], yaw}, grid, margin,
                                        options.max_attempts, kernel.angular_step() / 4.0);
    const Vec2 p = pushed.state.position;
    if ((p - a).norm() < 1e-9 || (p - b).norm() < 1e-9 || !grid.in_bounds(p)) return false;
    return run(a, p, depth + 1, out) && run(p, b, depth + 1, out);
  }
};

}  // namespace

std::optional<Polyline> seg_adjust(const Vec2& a, const Vec2& b, const RobotShape& shape,
                                   const BodyEsdf& esdf, const RobotKernel& kernel,
                                   const OccupancyGrid& grid, const SequenceOptions& options) {
  const double margin = options.margin < 0.0 ? grid.resolution() : options.margin;
  const Adjuster adj{shape, esdf, kernel, grid, options, margin};
  Polyline out{a};
  if (!adj.run(a, b, 0, out)) return std::nullopt;
  return out;
}

MotionSequence generate_sequence(const Se2Path& path, const RobotShape& shape, const BodyEsdf& esdf,
                                 const RobotKernel& kernel, const OccupancyGrid& grid,
                                 const SequenceOptions& options) {
  if (path.waypoints.size() < 2) throw ArgumentError("sequence needs at least two waypoints");
  const double res = grid.resolution();
  MotionSequence seq;

  for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s) {
    const Vec2 a = path.waypoints[s].position, b = path.waypoints[s + 1].position;
    const std::size_t skip = s == 0 ? 0 : 1;  // shared junction already emitted
    const Polyline pts = discretize_segment(a, b, res);
    const int pref = heading_index(kernel, a, b);

    std::vector<MotionState> tmp;
    bool adjust_failed = false;
    for (std::size_t i = skip; i < pts.size(); ++i) {
      const auto free = safe_yaw(pts[i], pref, kernel, grid, options.search_range);
      if (!free.empty()) {
        tmp.push_back({pts[i], free.front(), Risk::Low});
        continue;
      }
      // A failed repair of this segment fails identically at every later point.
      const auto adjusted =
          adjust_failed ? std::nullopt : seg_adjust(a, b, shape, esdf, kernel, grid, options);
      if (!adjusted) {
        adjust_failed = true;
        tmp.push_back({pts[i], pref, Risk::High});
        continue;
      }
      tmp.clear();
      const Polyline& poly = *adjusted;
      for (std::size_t j = 0; j + 1 < poly.size(); ++j) {
        const Polyline sub = discretize_segment(poly[j], poly[j + 1], res);
        const int sub_pref = heading_index(kernel, poly[j], poly[j + 1]);
        for (std::size_t m = (j == 0 ? skip : 1); m < sub.size(); ++m) {
          const auto f = safe_yaw(sub[m], sub_pref, kernel, grid, options.search_range);
          tmp.push_back({sub[m], f.empty() ? sub_pref : f.front(), f.empty() ? Risk::High : Risk::Low});
        }
      }
      break;
    }
    seq.states.insert(seq.states.end(), tmp.begin(), tmp.end());
  }
  return seq;
}

std::vector<SubProblem> extract_subproblems(const MotionSequence& seq, int pad) {
  if (seq.states.empty()) throw ArgumentError("empty motion sequence");
  if (pad < 0) throw ArgumentError("pad must be non-negative");
  const long n = static_cast<long>(seq.states.size());

  // Dilated high-risk runs, merged when they touch.
  std::vector<std::pair<long, long>> runs;
  for (long i = 0; i < n; ++i) {
    if (seq.states[i].risk != Risk::High) continue;
    const long lo = std::max(0L, i - pad), hi = std::min(n - 1, i + pad);
    if (!runs.empty() && lo <= runs.back().second + 1)
      runs.back().second = std::max(runs.back().second, hi);
    else
      runs.emplace_back(lo, hi);
  }

  std::vector<SubProblem> out;
  auto emit = [&](SubProblemKind kind, long b, long e) {
    SubProblem sp{kind, static_cast<std::size_t>(b), static_cast<std::size_t>(e), {}};
    sp.states.assign(seq.states.begin() + b, seq.states.begin() + e + 1);
    out.push_back(std::move(sp));
  };
  long cursor = 0;
  for (const auto& [lo, hi] : runs) {
    if (lo > cursor) emit(SubProblemKind::R2, cursor, lo);
    emit(SubProblemKind::SE2, lo, hi);
    cursor = hi;
  }
  if (runs.empty())
    emit(SubProblemKind::R2, 0, n - 1);
  else if (cursor < n - 1)
    emit(SubProblemKind::R2, cursor, n - 1);
  return out;
}

}  // namespace wbplan
