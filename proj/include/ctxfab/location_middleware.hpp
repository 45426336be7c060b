#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <variant>
#include <vector>

#include "ctxfab/devices.hpp"
#include "ctxfab/projection.hpp"

namespace ctxfab {

struct FusionParams {
  Timestamp stale_ms = 30'000;
  double drift_mps = 1.0;
  std::size_t buffer_depth = 16;
};

/// A validated fix converted into the model's local frame.
struct LocalFix {
  DeviceId device;
  Technology technology = Technology::OTHER;
  Timestamp timestamp = 0;
  Vec2 pos;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double probability = 1.0;
};

struct SourceContribution {
  Technology technology = Technology::OTHER;
  DeviceId device;
  Timestamp age_ms = 0;
  double sigma_x = 0.0;  // inflated
  double sigma_y = 0.0;
};

struct FusedPosition {
  UserId user;
  Timestamp timestamp = 0;
  double x = 0.0;
  double y = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double probability = 1.0;
  std::vector<SourceContribution> sources;

  Vec2 pos() const { return {x, y}; }
};

nlohmann::json fused_to_json(const FusedPosition& f);

/// Combines the newest fix per source, fresh at time t. Pure; the candidates
/// may come in any order. Returns nullopt when no candidate is fresh.
std::optional<FusedPosition> fuse_fixes(const UserId& user, Timestamp t,
                                        const std::vector<LocalFix>& candidates,
                                        const FusionParams& params);

/// Per-user, per-technology ring of the most recent fixes, ordered by time.
class FixBuffer {
 public:
  explicit FixBuffer(std::size_t depth = 16) : depth_(depth) {}

  /// Late fixes are inserted by timestamp; the oldest beyond the depth drop.
  void insert(const LocalFix& fix);
  /// Newest fix per technology with timestamp <= t.
  std::vector<LocalFix> newest_at(Timestamp t) const;
  const std::map<Technology, std::deque<LocalFix>>& per_source() const { return sources_; }
  bool empty() const { return sources_.empty(); }

 private:
  std::size_t depth_;
  std::map<Technology, std::deque<LocalFix>> sources_;
};

struct TrackSample {
  Timestamp t = 0;
  std::optional<FusedPosition> position;  // nullopt marks a gap
};

/// Device registration, fix ingestion and per-user fusion.
class LocationMiddleware {
 public:
  LocationMiddleware(const UserRegistry& users, FusionParams params = {});

  const FusionParams& params() const noexcept { return params_; }
  DeviceRegistry& devices() noexcept { return devices_; }
  const DeviceRegistry& devices() const noexcept { return devices_; }

  /// Frame that LOCAL fixes must reference and GLOBAL fixes are projected into.
  void set_frame(std::optional<LocalFrame> frame);
  std::optional<LocalFrame> frame() const;

  /// Throws DuplicateDevice or UnknownOwner.
  void register_device(DeviceRecord record);

  /// Validates, converts and buffers the fix, then re-fuses the owner at its
  /// newest seen event time (nullopt when nothing is fresh at that time, which
  /// happens for very late fixes). Throws Error with the validation code.
  std::optional<FusedPosition> ingest_fix(const PositionFix& fix);

  /// Throws NoRecentFix (detail = user id).
  FusedPosition fuse(const UserId& user, Timestamp t) const;
  std::optional<FusedPosition> try_fuse(const UserId& user, Timestamp t) const;

  /// Throws BadRange for t0 > t1 or step <= 0.
  std::vector<TrackSample> track(const UserId& user, Timestamp t0, Timestamp t1,
                                 Timestamp step_ms) const;

  /// Copy of the buffer state for a user.
  std::optional<FixBuffer> buffer(const UserId& user) const;

 private:
  struct UserState {
    mutable std::mutex mutex;
    FixBuffer buffer;
    Timestamp clock = 0;
    explicit UserState(std::size_t depth) : buffer(depth) {}
  };

  UserState* state_for(const UserId& user) const;
  UserState& ensure_state(const UserId& user);

  const UserRegistry& users_;
  FusionParams params_;
  DeviceRegistry devices_;
  mutable std::shared_mutex mutex_;  // guards states_ and frame_
  std::map<UserId, std::unique_ptr<UserState>> states_;
  std::optional<LocalFrame> frame_;
};

}  // namespace ctxfab
