#pragma once

#include "wbplan/optimize.hpp"
#include "wbplan/sequence.hpp"
#include "wbplan/sweep.hpp"
#include "wbplan/topo.hpp"

#include <string>

namespace wbplan {

struct PlanConfig {
  RoadmapOptions roadmap{};
  int max_paths{32};       ///< raw depth-first paths taken from the roadmap
  int max_candidates{4};   ///< distinct topologies carried into optimization
  int max_path_vertices{16};
  int n_orientations{18};
  int search_range{4};
  int max_depth{4};
  int context_pad{5};
  int push_attempts{20};
  double push_margin{-1.0};  ///< negative selects the map resolution
  double check_margin{0.0};
  Weights weights{};
  SolverOptions solver{};

  /// Throws ArgumentError when a count is below one or a weight is invalid.
  void validate() const;
};

enum class PlanStatus { Success, NoPath, AllCandidatesFailed };
enum class PieceSource { SE2, R2, R2Reoptimized };

std::string to_string(PlanStatus s);
std::string to_string(PieceSource s);

/// Wall-clock seconds per stage; total is their sum.
struct StageTimings {
  double refine{0.0};  ///< roadmap, shortcut, sequences
  double r2{0.0};
  double se2{0.0};  ///< SE(2) sub-problems, final swept check and re-optimization
  double total{0.0};
};

struct PlanMetrics {
  StageTimings time;
  double len_r2{0.0};
  double len_se2{0.0};
  double len_total{0.0};
  int candidates_tried{0};
  int candidates_survived{0};
};

struct CandidateReport {
  Polyline topo_path;
  Se2Path refined;
  MotionSequence sequence;
  std::vector<SubProblem> subproblems;
  bool survived{false};
  std::string failure;
  Trajectory trajectory;
  std::vector<PieceSource> provenance;  ///< per polynomial piece
  double effort{0.0};
};

struct PlanResult {
  PlanStatus status{PlanStatus::NoPath};
  Trajectory trajectory;
  std::vector<PieceSource> provenance;  ///< per polynomial piece of `trajectory`
  PlanMetrics metrics;
  CollisionReport certificate;
  std::vector<CandidateReport> candidates;
  int selected{-1};
  std::vector<std::string> warnings;
  std::string message;
};

/// Raw map plus everything derived from it and the robot for one query.
struct World {
  OccupancyGrid grid;
  OccupancyGrid inflated;
  RobotShape shape;
  BodyEsdf esdf;
  RobotKernel kernel;
};

World prepare_world(const OccupancyGrid& grid, const RobotShape& shape, const PlanConfig& config);

/// Stage 1 only: roadmap paths, deduplicated, shortcut, deduplicated again.
std::vector<CandidateReport> topological_candidates(const World& world, const Vec2& start,
                                                    const Vec2& goal, const PlanConfig& config);

PlanResult plan(const OccupancyGrid& grid, const RobotShape& shape, const Pose2& start,
                const Pose2& goal, const PlanConfig& config = {});

/// Concatenates SE(2) trajectories; yaw is shifted by whole turns to line up,
/// and derivative mismatches at junctions are averaged into re-solved end pieces.
/// Throws SpliceError when junction poses differ by more than 1e-6.
Trajectory splice(const std::vector<Trajectory>& parts);

}  // namespace wbplan
