#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctxfab/context_types.hpp"
#include "ctxfab/spatial_model.hpp"

namespace ctxfab {

inline constexpr double kSnapRadiusM = 50.0;

/// Which edge tags each disability tag rules out. Edges passing through a
/// feature marked "disqualified_for:<tag>" are ruled out as well.
using DisqualificationTable = std::map<std::string, std::set<std::string>>;

DisqualificationTable default_disqualifications();

struct Route {
  std::vector<NodeId> nodes;
  double length = 0.0;  // graph edges only
  std::vector<std::string> instructions;
  std::vector<FeatureId> traversed_features;
  /// Tags of each traversed edge, one entry per node transition.
  std::vector<std::set<std::string>> step_tags;
  double start_snap_m = 0.0;
  double goal_snap_m = 0.0;
};

nlohmann::json route_to_json(const Route& r);

/// True when the edge may be used by someone with the given profile.
bool edge_admissible(const NavEdge& edge, const DisabilityProfile& profile,
                     const SpatialModel& model,
                     const DisqualificationTable& table = default_disqualifications());

/// Shortest admissible path between the nodes nearest to start and goal.
/// Ties: fewer edges, then lexicographically smaller node-id sequence.
/// Throws NoNearbyNode or NoAccessibleRoute.
Route plan_route(const SpatialModel& model, Vec2 start, Vec2 goal, const DisabilityProfile& profile,
                 const DisqualificationTable& table = default_disqualifications(),
                 double snap_radius = kSnapRadiusM);

/// One instruction per node transition plus the arrival line.
std::vector<std::string> generate_instructions(const Route& route, const SpatialModel& model);

}  // namespace ctxfab
