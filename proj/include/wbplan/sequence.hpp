#pragma once

#include "wbplan/topo.hpp"

#include <optional>

namespace wbplan {

enum class Risk { Low, High };

struct MotionState {
  Vec2 position;
  int k{0};  ///< kernel orientation index; the preferred index for HighRisk states
  Risk risk{Risk::Low};
};

struct MotionSequence {
  std::vector<MotionState> states;
  int source_path{0};

  std::size_t high_risk_count() const;
};

enum class SubProblemKind { SE2, R2 };

/// Contiguous slice [begin, end] (inclusive) of a motion sequence.
struct SubProblem {
  SubProblemKind kind{SubProblemKind::R2};
  std::size_t begin{0};
  std::size_t end{0};
  std::vector<MotionState> states;
};

struct SequenceOptions {
  int search_range{4};
  int max_depth{4};
  double margin{-1.0};  ///< push margin; negative selects the map resolution
  int max_attempts{20};
};

/// Free orientation indices near preferred_k, tested in the order k, k+1, k-1, k+2, ...
std::vector<int> safe_yaw(const Vec2& p, int preferred_k, const RobotKernel& kernel,
                          const OccupancyGrid& grid, int search_range);

/// Segment points spaced at most one resolution apart, both ends included.
Polyline discretize_segment(const Vec2& a, const Vec2& b, double step);

/// Recursive local repair of a segment. Returns the repaired polyline (same
/// endpoints) or nothing when some child segment cannot be freed.
std::optional<Polyline> seg_adjust(const Vec2& a, const Vec2& b, const RobotShape& shape,
                                   const BodyEsdf& esdf, const RobotKernel& kernel,
                                   const OccupancyGrid& grid, const SequenceOptions& options = {});

MotionSequence generate_sequence(const Se2Path& path, const RobotShape& shape, const BodyEsdf& esdf,
                                 const RobotKernel& kernel, const OccupancyGrid& grid,
                                 const SequenceOptions& options = {});

/// Dilated HighRisk runs become SE2 slices, the gaps R2 slices; neighbours share one state.
std::vector<SubProblem> extract_subproblems(const MotionSequence& seq, int pad = 5);

}  // namespace wbplan
