#include "ctxfab/state_manager.hpp"

#include <algorithm>
#include <limits>

namespace ctxfab {
namespace {

nlohmann::json vec_json(Vec2 p) { return {{"x", p.x}, {"y", p.y}}; }

FusedPosition fuse_or_throw(const Framework& fw, const UserId& user, Timestamp now) {
  if (auto f = fw.location().try_fuse(user, now)) return *f;
  throw Error(ErrorCode::NoRecentFix, user.str());
}

void grow(Vec2& lo, Vec2& hi, Vec2 p) {
  lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
  hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
}

}  // namespace

std::string_view to_string(Style s) noexcept { return s == Style::HighContrast ? "high_contrast" : "normal"; }

std::string_view to_string(DisplayTarget t) noexcept {
  return t == DisplayTarget::Handheld ? "handheld" : "fixed_monitor";
}

std::string_view to_string(DetailLevel d) noexcept {
  switch (d) {
    case DetailLevel::Brief: return "brief";
    case DetailLevel::Detailed: return "detailed";
    default: return "normal";
  }
}

nlohmann::json visibility_to_json(const VisibilityAnswer& a) {
  auto blocking = nlohmann::json::array();
  for (std::size_t i = 0; i < a.blocking.size(); ++i)
    blocking.push_back({{"id", a.blocking[i].str()}, {"name", a.blocking_names[i]}});
  auto features = nlohmann::json::array();
  for (const auto& f : a.render.features)
    features.push_back({{"id", f.id.str()}, {"name", f.name}, {"highlight", f.highlight}});
  return {{"verdict", a.visible ? "visible" : "blocked"},
          {"blocking", blocking},
          {"text", a.text},
          {"render",
           {{"bbox", {vec_json(a.render.bbox_min), vec_json(a.render.bbox_max)}},
            {"user_a", vec_json(a.render.user_a)},
            {"user_b", vec_json(a.render.user_b)},
            {"features", features},
            {"style", to_string(a.render.style)}}}};
}

nlohmann::json presentation_to_json(const PresentationHints& h) {
  return {{"style", to_string(h.style)}, {"target", to_string(h.target)}, {"detail_level", to_string(h.detail)}};
}

nlohmann::json position_to_json(const PositionAnswer& a) {
  auto j = fused_to_json(a.fused);
  if (a.global) j["global"] = {{"lon", a.global->lon}, {"lat", a.global->lat}};
  return j;
}

std::shared_ptr<const SpatialModel> StateManager::model() const { return fw_.model(); }

DisabilityProfile StateManager::disabilities(const UserId& user) const {
  if (!fw_.types().contains(types::kDisability)) return {};
  auto fact = fw_.facts().get_latest(user, types::kDisability);
  return fact ? disability_profile(*fact) : DisabilityProfile{};
}

VisibilityAnswer StateManager::answer_visibility(const UserId& a, const UserId& b, Timestamp now) const {
  auto m = model();
  FusedPosition pa = fuse_or_throw(fw_, a, now);
  FusedPosition pb = fuse_or_throw(fw_, b, now);
  VisibilityResult vis = visibility(pa.pos(), pb.pos(), *m);

  VisibilityAnswer out;
  out.visible = vis.visible;
  out.blocking = vis.blocking;
  for (const auto& id : vis.blocking) out.blocking_names.push_back(m->feature(id)->name);
  if (out.visible) {
    out.text = a.str() + " can see " + b.str();
  } else {
    for (std::size_t i = 0; i < out.blocking_names.size(); ++i) {
      if (i) out.text += "; ";
      out.text += out.blocking_names[i] + " is between the users";
    }
  }

  RenderData& r = out.render;
  r.user_a = pa.pos();
  r.user_b = pb.pos();
  r.bbox_min = r.bbox_max = r.user_a;
  grow(r.bbox_min, r.bbox_max, r.user_b);
  for (const auto& f : m->features()) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, PointGeom>) {
            grow(r.bbox_min, r.bbox_max, g.p);
          } else if constexpr (std::is_same_v<T, PolylineGeom>) {
            for (auto v : g.vertices) grow(r.bbox_min, r.bbox_max, v);
          } else {
            for (auto v : g.ring) grow(r.bbox_min, r.bbox_max, v);
          }
        },
        f.geometry);
    bool blocking = std::find(vis.blocking.begin(), vis.blocking.end(), f.id) != vis.blocking.end();
    if (f.opaque || blocking) r.features.push_back({f.id, f.name, blocking});
  }
  r.style = disabilities(a).contains(tags::kLowVision) ? Style::HighContrast : Style::Normal;
  return out;
}

Route StateManager::answer_route(const UserId& user, const Target& goal, Timestamp now) const {
  auto m = model();
  FusedPosition pos = fuse_or_throw(fw_, user, now);
  Vec2 goal_point = goal.is_point() ? std::get<Vec2>(goal.ref) : target_anchor(std::get<FeatureId>(goal.ref), *m);
  return plan_route(*m, pos.pos(), goal_point, disabilities(user), default_disqualifications(),
                    fw_.config().snap_radius_m);
}

PositionAnswer StateManager::answer_position(const UserId& user, Timestamp now) const {
  auto m = model();
  PositionAnswer out{fuse_or_throw(fw_, user, now), std::nullopt};
  if (!m->frame().frame_id.empty()) out.global = to_global(out.fused.pos(), m->frame());
  return out;
}

PresentationHints StateManager::presentation_for(const UserId& user, Vec2 content, Timestamp now) const {
  PresentationHints h;
  auto profile = disabilities(user);
  if (profile.contains(tags::kLowVision)) h.style = Style::HighContrast;
  if (profile.contains(tags::kBlearEyed)) {
    FusedPosition pos = fuse_or_throw(fw_, user, now);
    if (dist(pos.pos(), content) > fw_.config().blear_eyed_threshold_m) h.target = DisplayTarget::Handheld;
  }
  if (fw_.types().contains(types::kDetail)) {
    if (auto f = fw_.facts().get_latest(user, types::kDetail); f && f->value.is_string()) {
      const auto& level = f->value.get_ref<const std::string&>();
      if (level == "brief") h.detail = DetailLevel::Brief;
      if (level == "detailed") h.detail = DetailLevel::Detailed;
    }
  }
  return h;
}

double StateManager::answer_distance(const UserId& user, const Target& target, Timestamp now) const {
  auto m = model();
  FusedPosition pos = fuse_or_throw(fw_, user, now);
  return distance_to(pos.pos(), target, *m);
}

bool StateManager::answer_containment(const FeatureId& shape, const std::variant<Vec2, FeatureId>& what) const {
  auto m = model();
  if (const auto* p = std::get_if<Vec2>(&what)) return contains_point(shape, *p, *m);
  return contains_shape(shape, std::get<FeatureId>(what), *m);
}

std::vector<Recommendation> StateManager::answer_recommendations(const UserId& user, std::size_t k) const {
  return recommend(fw_.facts(), *fw_.catalogue(), user, k, fw_.config().recommender);
}

}  // namespace ctxfab
