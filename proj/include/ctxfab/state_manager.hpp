#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/framework.hpp"

namespace ctxfab {

enum class Style { Normal, HighContrast };
enum class DisplayTarget { FixedMonitor, Handheld };
enum class DetailLevel { Brief, Normal, Detailed };

std::string_view to_string(Style s) noexcept;
std::string_view to_string(DisplayTarget t) noexcept;
std::string_view to_string(DetailLevel d) noexcept;

struct RenderFeature {
  FeatureId id;
  std::string name;
  bool highlight = false;
};

/// Scene description for clients that draw the answer.
struct RenderData {
  Vec2 bbox_min;
  Vec2 bbox_max;
  Vec2 user_a;
  Vec2 user_b;
  std::vector<RenderFeature> features;
  Style style = Style::Normal;
};

struct VisibilityAnswer {
  bool visible = true;
  std::vector<FeatureId> blocking;
  std::vector<std::string> blocking_names;
  std::string text;
  RenderData render;
};

struct PresentationHints {
  Style style = Style::Normal;
  DisplayTarget target = DisplayTarget::FixedMonitor;
  DetailLevel detail = DetailLevel::Normal;

  friend bool operator==(const PresentationHints&, const PresentationHints&) = default;
};

struct PositionAnswer {
  FusedPosition fused;
  std::optional<LonLat> global;  // absent when the model has no frame
};

nlohmann::json visibility_to_json(const VisibilityAnswer& a);
nlohmann::json presentation_to_json(const PresentationHints& h);
nlohmann::json position_to_json(const PositionAnswer& a);

/// Splits application questions into location, geometry and context
/// sub-queries and combines the answers. Every query takes an explicit
/// evaluation time.
class StateManager {
 public:
  explicit StateManager(const Framework& fw) : fw_(fw) {}

  /// Throws NoRecentFix naming the silent user.
  VisibilityAnswer answer_visibility(const UserId& a, const UserId& b, Timestamp now) const;
  /// Throws NoRecentFix, NoNearbyNode, NoAccessibleRoute or UnknownTarget.
  Route answer_route(const UserId& user, const Target& goal, Timestamp now) const;
  PositionAnswer answer_position(const UserId& user, Timestamp now) const;
  PresentationHints presentation_for(const UserId& user, Vec2 content, Timestamp now) const;
  double answer_distance(const UserId& user, const Target& target, Timestamp now) const;
  bool answer_containment(const FeatureId& shape, const std::variant<Vec2, FeatureId>& what) const;
  std::vector<Recommendation> answer_recommendations(const UserId& user, std::size_t k) const;

  DisabilityProfile disabilities(const UserId& user) const;

 private:
  std::shared_ptr<const SpatialModel> model() const;

  const Framework& fw_;
};

}  // namespace ctxfab
