#include "ctxfab/location_middleware.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace ctxfab {

nlohmann::json fused_to_json(const FusedPosition& f) {
  auto sources = nlohmann::json::array();
  for (const auto& s : f.sources) {
    sources.push_back({{"technology", to_string(s.technology)},
                       {"device", s.device.str()},
                       {"age_ms", s.age_ms},
                       {"sigma_x", s.sigma_x},
                       {"sigma_y", s.sigma_y}});
  }
  return {{"user", f.user.str()},       {"timestamp", f.timestamp}, {"x", f.x},
          {"y", f.y},                   {"sigma_x", f.sigma_x},     {"sigma_y", f.sigma_y},
          {"probability", f.probability}, {"sources", sources}};
}

std::optional<FusedPosition> fuse_fixes(const UserId& user, Timestamp t, const std::vector<LocalFix>& candidates,
                                        const FusionParams& params) {
  // newest fresh fix per technology
  std::map<Technology, const LocalFix*> newest;
  for (const auto& fix : candidates) {
    Timestamp age = t - fix.timestamp;
    if (age < 0 || age > params.stale_ms) continue;
    auto& slot = newest[fix.technology];
    if (!slot || fix.timestamp >= slot->timestamp) slot = &fix;
  }
  if (newest.empty()) return std::nullopt;

  struct Term {
    double x, y, sx, sy, p;
  };
  FusedPosition out;
  out.user = user;
  out.timestamp = t;
  std::vector<Term> terms;
  for (const auto& [tech, fix] : newest) {
    double age_s = static_cast<double>(t - fix->timestamp) / 1000.0;
    double drift = params.drift_mps * age_s;
    double sx = std::sqrt(fix->sigma_x * fix->sigma_x + drift * drift);
    double sy = std::sqrt(fix->sigma_y * fix->sigma_y + drift * drift);
    out.sources.push_back({tech, fix->device, t - fix->timestamp, sx, sy});
    terms.push_back({fix->pos.x, fix->pos.y, sx, sy, fix->probability});
  }
  // Summation order depends on values only, so relabeling sources can not
  // change the result.
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return std::tie(a.x, a.y, a.sx, a.sy, a.p) < std::tie(b.x, b.y, b.sx, b.sy, b.p);
  });

  double wx = 0, wy = 0, wxx = 0, wyy = 0, wxp = 0, wyp = 0, ix = 0, iy = 0;
  for (const auto& term : terms) {
    double ax = term.p / (term.sx * term.sx);
    double ay = term.p / (term.sy * term.sy);
    wx += ax;
    wy += ay;
    wxx += ax * term.x;
    wyy += ay * term.y;
    wxp += ax * term.p;
    wyp += ay * term.p;
    ix += 1.0 / (term.sx * term.sx);
    iy += 1.0 / (term.sy * term.sy);
  }
  // Rounding can push a weighted mean or combined sigma past its exact bound.
  auto [min_x, max_x] = std::minmax_element(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.x < b.x; });
  auto [min_y, max_y] = std::minmax_element(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.y < b.y; });
  double min_sx = std::min_element(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.sx < b.sx; })->sx;
  double min_sy = std::min_element(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.sy < b.sy; })->sy;
  out.x = std::clamp(wxx / wx, min_x->x, max_x->x);
  out.y = std::clamp(wyy / wy, min_y->y, max_y->y);
  out.sigma_x = std::min(std::sqrt(1.0 / ix), min_sx);
  out.sigma_y = std::min(std::sqrt(1.0 / iy), min_sy);
  out.probability = std::clamp(0.5 * (wxp / wx + wyp / wy), 0.0, 1.0);
  if (terms.size() == 1) out.probability = terms.front().p;
  return out;
}

void FixBuffer::insert(const LocalFix& fix) {
  auto& q = sources_[fix.technology];
  auto pos = std::upper_bound(q.begin(), q.end(), fix.timestamp,
                              [](Timestamp t, const LocalFix& f) { return t < f.timestamp; });
  q.insert(pos, fix);
  while (q.size() > depth_) q.pop_front();
}

std::vector<LocalFix> FixBuffer::newest_at(Timestamp t) const {
  std::vector<LocalFix> out;
  for (const auto& [_, q] : sources_) {
    auto it = std::upper_bound(q.begin(), q.end(), t, [](Timestamp v, const LocalFix& f) { return v < f.timestamp; });
    if (it != q.begin()) out.push_back(*std::prev(it));
  }
  return out;
}

LocationMiddleware::LocationMiddleware(const UserRegistry& users, FusionParams params)
    : users_(users), params_(params) {}

void LocationMiddleware::set_frame(std::optional<LocalFrame> frame) {
  std::unique_lock lock(mutex_);
  frame_ = std::move(frame);
}

std::optional<LocalFrame> LocationMiddleware::frame() const {
  std::shared_lock lock(mutex_);
  return frame_;
}

void LocationMiddleware::register_device(DeviceRecord record) {
  if (!users_.contains(record.owner)) throw Error(ErrorCode::UnknownOwner, record.owner.str());
  devices_.add(std::move(record));
}

LocationMiddleware::UserState* LocationMiddleware::state_for(const UserId& user) const {
  std::shared_lock lock(mutex_);
  auto it = states_.find(user);
  return it == states_.end() ? nullptr : it->second.get();
}

LocationMiddleware::UserState& LocationMiddleware::ensure_state(const UserId& user) {
  if (auto* s = state_for(user)) return *s;
  std::unique_lock lock(mutex_);
  auto& slot = states_[user];
  if (!slot) slot = std::make_unique<UserState>(params_.buffer_depth);
  return *slot;
}

std::optional<FusedPosition> LocationMiddleware::ingest_fix(const PositionFix& fix) {
  auto frame = this->frame();
  FrameResolver resolver = [&](const std::string& id) { return frame && frame->frame_id == id; };
  if (auto v = validate_fix(fix, devices_, resolver)) throw Error(*v);

  LocalFix local;
  local.device = fix.device;
  local.technology = fix.technology;
  local.timestamp = *fix.timestamp;
  local.sigma_x = fix.coords.precision_x;
  local.sigma_y = fix.coords.precision_y;
  local.probability = fix.coords.probability;
  if (fix.coords.system.is_global()) {
    if (!frame) throw Error(ErrorCode::BadCoordinates, "no local frame to project global coordinates into");
    local.pos = to_local({fix.coords.x, fix.coords.y}, *frame);
  } else {
    local.pos = {fix.coords.x, fix.coords.y};
  }

  UserState& state = ensure_state(fix.user);
  std::lock_guard lock(state.mutex);
  state.buffer.insert(local);
  state.clock = std::max(state.clock, local.timestamp);
  return fuse_fixes(fix.user, state.clock, state.buffer.newest_at(state.clock), params_);
}

std::optional<FusedPosition> LocationMiddleware::try_fuse(const UserId& user, Timestamp t) const {
  const UserState* state = state_for(user);
  if (!state) return std::nullopt;
  std::lock_guard lock(state->mutex);
  return fuse_fixes(user, t, state->buffer.newest_at(t), params_);
}

FusedPosition LocationMiddleware::fuse(const UserId& user, Timestamp t) const {
  if (auto f = try_fuse(user, t)) return *f;
  throw Error(ErrorCode::NoRecentFix, user.str());
}

std::vector<TrackSample> LocationMiddleware::track(const UserId& user, Timestamp t0, Timestamp t1,
                                                   Timestamp step_ms) const {
  if (t0 > t1 || step_ms <= 0) throw Error(ErrorCode::BadRange, "track needs t0 <= t1 and step > 0");
  std::vector<TrackSample> out;
  const UserState* state = state_for(user);
  std::optional<std::lock_guard<std::mutex>> lock;
  if (state) lock.emplace(state->mutex);
  for (Timestamp t = t0; t <= t1; t += step_ms) {
    TrackSample sample{t, std::nullopt};
    if (state) sample.position = fuse_fixes(user, t, state->buffer.newest_at(t), params_);
    out.push_back(std::move(sample));
    if (t > t1 - step_ms) break;
  }
  return out;
}

std::optional<FixBuffer> LocationMiddleware::buffer(const UserId& user) const {
  const UserState* state = state_for(user);
  if (!state) return std::nullopt;
  std::lock_guard lock(state->mutex);
  return state->buffer;
}

}  // namespace ctxfab
