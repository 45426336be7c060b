#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "ctxfab/context_store.hpp"
#include "ctxfab/location_middleware.hpp"
#include "ctxfab/recommender.hpp"
#include "ctxfab/routing.hpp"
#include "ctxfab/spatial_model.hpp"
#include "ctxfab/trigger_engine.hpp"

namespace ctxfab {

struct FrameworkConfig {
  FusionParams fusion;
  RecommenderParams recommender;
  double blear_eyed_threshold_m = 1.0;
  double snap_radius_m = kSnapRadiusM;
};

struct IngestResult {
  FusedPosition fused;
  std::vector<FiredEvent> events;
};

/// The framework core's world state: registries, fact store, fix buffers,
/// trigger rules, the environment model and the item catalogue.
class Framework {
 public:
  explicit Framework(FrameworkConfig config = {});
  Framework(const Framework&) = delete;
  Framework& operator=(const Framework&) = delete;

  const FrameworkConfig& config() const noexcept { return config_; }

  ContextTypeRegistry& types() noexcept { return types_; }
  const ContextTypeRegistry& types() const noexcept { return types_; }
  const UserRegistry& users() const noexcept { return users_; }
  LocationMiddleware& location() noexcept { return location_; }
  const LocationMiddleware& location() const noexcept { return location_; }
  const FactStore& facts() const noexcept { return facts_; }
  TriggerEngine& triggers() noexcept { return triggers_; }
  const TriggerEngine& triggers() const noexcept { return triggers_; }

  /// Whole-model replacement; also resets the location frame.
  void set_model(SpatialModel model);
  std::shared_ptr<const SpatialModel> model() const;
  void set_catalogue(Catalogue catalogue);
  std::shared_ptr<const Catalogue> catalogue() const;

  void register_user(const UserId& user);
  void register_device(DeviceRecord record);
  void put_fact(ContextFact fact);

  /// Context2Core ingest: validate, buffer, fuse, then evaluate the user's
  /// trigger rules against the new fused position.
  IngestResult ingest_fix(const PositionFix& fix);

  /// Throws UnknownTarget.
  void add_rule(TriggerRule rule);

  SnapshotState snapshot() const;
  /// Loads registries and facts into an empty framework; facts are restored
  /// without schema checks so that check_consistency can report them.
  /// Throws CorruptSnapshot when the framework already holds state.
  void restore(const SnapshotState& state);

  std::vector<ConsistencyViolation> check_consistency() const;

 private:
  FrameworkConfig config_;
  ContextTypeRegistry types_;
  UserRegistry users_;
  LocationMiddleware location_;
  FactStore facts_;
  TriggerEngine triggers_;
  mutable std::mutex shared_mutex_;  // guards the two shared pointers
  std::shared_ptr<const SpatialModel> model_;
  std::shared_ptr<const Catalogue> catalogue_;
};

}  // namespace ctxfab
