#include "ctxfab/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "ctxfab/error.hpp"

namespace ctxfab {
namespace {

struct Label {
  double length = 0.0;
  std::vector<std::size_t> path;   // node indices
  std::vector<std::size_t> edges;  // edge indices
};

/// (length, edge count, node-id sequence), lengths equal within a relative 1e-9.
bool better(const Label& x, const Label& y, const NavGraph& g) {
  double tol = 1e-9 * std::max(1.0, std::max(x.length, y.length));
  if (std::abs(x.length - y.length) > tol) return x.length < y.length;
  if (x.edges.size() != y.edges.size()) return x.edges.size() < y.edges.size();
  return std::lexicographical_compare(x.path.begin(), x.path.end(), y.path.begin(), y.path.end(),
                                      [&](std::size_t a, std::size_t b) { return g.nodes[a].id < g.nodes[b].id; });
}

std::size_t snap(const NavGraph& g, Vec2 p, double radius, double& offset) {
  std::size_t best = g.nodes.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double d = dist(p, g.nodes[i].pos);
    if (d < best_d || (d == best_d && g.nodes[i].id < g.nodes[best].id)) {
      best = i;
      best_d = d;
    }
  }
  if (best == g.nodes.size() || best_d > radius) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "no navigation node within %.1f m of (%.2f, %.2f)", radius, p.x, p.y);
    throw Error(ErrorCode::NoNearbyNode, buf);
  }
  offset = best_d;
  return best;
}

std::string_view entry_tag(const std::set<std::string>& tags) {
  for (std::string_view t : {"door", "elevator", "stairs"})
    if (tags.contains(std::string(t))) return t;
  return {};
}

}  // namespace

DisqualificationTable default_disqualifications() { return {{tags::kWheelchair, {"stairs"}}}; }

nlohmann::json route_to_json(const Route& r) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : r.nodes) nodes.push_back(n.str());
  auto features = nlohmann::json::array();
  for (const auto& f : r.traversed_features) features.push_back(f.str());
  return {{"nodes", nodes},
          {"length_m", r.length},
          {"instructions", r.instructions},
          {"traversed_features", features},
          {"start_snap_m", r.start_snap_m},
          {"goal_snap_m", r.goal_snap_m}};
}

bool edge_admissible(const NavEdge& edge, const DisabilityProfile& profile, const SpatialModel& model,
                     const DisqualificationTable& table) {
  const Feature* feature = edge.feature ? model.feature(*edge.feature) : nullptr;
  for (const auto& tag : profile) {
    if (auto it = table.find(tag); it != table.end()) {
      for (const auto& banned : it->second)
        if (edge.tags.contains(banned)) return false;
    }
    if (feature && feature->disqualified_for(tag)) return false;
  }
  return true;
}

Route plan_route(const SpatialModel& model, Vec2 start, Vec2 goal, const DisabilityProfile& profile,
                 const DisqualificationTable& table, double snap_radius) {
  const NavGraph& g = model.navgraph();
  if (g.nodes.empty()) throw Error(ErrorCode::NoNearbyNode, "navigation graph is empty");
  Route route;
  std::size_t src = snap(g, start, snap_radius, route.start_snap_m);
  std::size_t dst = snap(g, goal, snap_radius, route.goal_snap_m);

  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index.emplace(g.nodes[i].id, i);
  // adjacency: node -> (neighbor, edge index)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(g.nodes.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (!edge_admissible(edge, profile, model, table)) continue;
    std::size_t a = index.at(edge.a);
    std::size_t b = index.at(edge.b);
    adj[a].emplace_back(b, e);
    if (edge.bidirectional) adj[b].emplace_back(a, e);
  }

  std::vector<std::optional<Label>> best(g.nodes.size());
  std::vector<bool> settled(g.nodes.size(), false);
  auto cmp = [&](const std::pair<Label, std::size_t>& x, const std::pair<Label, std::size_t>& y) {
    return better(y.first, x.first, g);
  };
  std::priority_queue<std::pair<Label, std::size_t>, std::vector<std::pair<Label, std::size_t>>, decltype(cmp)> open(
      cmp);
  best[src] = Label{0.0, {src}, {}};
  open.emplace(*best[src], src);
  while (!open.empty()) {
    auto [label, u] = open.top();
    open.pop();
    if (settled[u]) continue;
    settled[u] = true;
    if (u == dst) break;
    for (auto [v, e] : adj[u]) {
      if (settled[v]) continue;
      Label next = label;
      next.length += g.edges[e].length;
      next.path.push_back(v);
      next.edges.push_back(e);
      if (!best[v] || better(next, *best[v], g)) {
        best[v] = next;
        open.emplace(std::move(next), v);
      }
    }
  }
  if (!best[dst]) {
    throw Error(ErrorCode::NoAccessibleRoute,
                "no admissible path from '" + g.nodes[src].id.str() + "' to '" + g.nodes[dst].id.str() + "'");
  }

  const Label& found = *best[dst];
  for (std::size_t i : found.path) route.nodes.push_back(g.nodes[i].id);
  for (std::size_t e : found.edges) {
    route.length += g.edges[e].length;
    route.step_tags.push_back(g.edges[e].tags);
    const auto& f = g.edges[e].feature;
    if (f && (route.traversed_features.empty() || route.traversed_features.back() != *f))
      route.traversed_features.push_back(*f);
  }
  route.instructions = generate_instructions(route, model);
  return route;
}

std::vector<std::string> generate_instructions(const Route& route, const SpatialModel& model) {
  const NavGraph& g = model.navgraph();
  std::vector<Vec2> pos;
  for (const auto& id : route.nodes) {
    const NavNode* n = g.node(id);
    pos.push_back(n ? n->pos : Vec2{});
  }
  auto tags_of = [&](std::size_t step) -> std::set<std::string> {
    if (step < route.step_tags.size()) return route.step_tags[step];
    // Fall back to the shortest edge joining the two nodes.
    const NavEdge* pick = nullptr;
    for (const auto& e : g.edges) {
      bool fwd = e.a == route.nodes[step] && e.b == route.nodes[step + 1];
      bool bwd = e.bidirectional && e.b == route.nodes[step] && e.a == route.nodes[step + 1];
      if ((fwd || bwd) && (!pick || e.length < pick->length)) pick = &e;
    }
    return pick ? pick->tags : std::set<std::string>{};
  };
  auto with_entry = [](std::string_view tag, std::string movement) {
    if (tag.empty()) return movement;
    return "enter the " + std::string(tag) + " and " + movement;
  };

  std::vector<std::string> out;
  std::size_t steps = route.nodes.empty() ? 0 : route.nodes.size() - 1;
  for (std::size_t i = 0; i + 1 < steps; ++i) {
    Vec2 in = pos[i + 1] - pos[i];
    Vec2 outv = pos[i + 2] - pos[i + 1];
    double delta = 0.0;
    if (norm(in) > kGeomEps && norm(outv) > kGeomEps) {
      // positive = clockwise = right turn
      delta = -std::atan2(cross(in, outv), dot(in, outv)) * 180.0 / std::numbers::pi;
      if (delta <= -180.0) delta += 360.0;
    }
    std::string movement;
    if (std::abs(delta) <= 30.0) {
      movement = "continue straight";
    } else if (delta > 30.0 && delta <= 150.0) {
      movement = "turn right";
    } else if (delta >= -150.0 && delta < -30.0) {
      movement = "turn left";
    } else {
      movement = "turn around";
    }
    out.push_back(with_entry(entry_tag(tags_of(i)), std::move(movement)));
  }
  std::string_view last_tag = steps > 0 ? entry_tag(tags_of(steps - 1)) : std::string_view{};
  out.push_back(with_entry(last_tag, "you have arrived"));
  return out;
}

}  // namespace ctxfab
