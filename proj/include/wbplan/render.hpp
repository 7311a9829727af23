#pragma once

#include "wbplan/pipeline.hpp"

#include <string>

namespace wbplan {

/// Map with every topological candidate (raw and refined) overlaid.
std::string render_candidates(const World& world, const std::vector<CandidateReport>& candidates,
                              const Pose2& start, const Pose2& goal);

/// One candidate's motion sequence; high-risk states in red, low-risk in green.
std::string render_sequence(const World& world, const CandidateReport& candidate);

/// Final trajectory, one <path> per polynomial piece colored by provenance.
std::string render_trajectory(const OccupancyGrid& grid, const Trajectory& traj,
                              const std::vector<PieceSource>& provenance);

/// Robot outlines sampled along the trajectory over the map.
std::string render_swept(const OccupancyGrid& grid, const RobotShape& shape, const Trajectory& traj,
                         int samples = 60);

}  // namespace wbplan
