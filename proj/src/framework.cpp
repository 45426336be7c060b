#include "ctxfab/framework.hpp"

namespace ctxfab {

Framework::Framework(FrameworkConfig config)
    : config_(config),
      types_(default_context_types()),
      location_(users_, config.fusion),
      facts_(types_),
      model_(std::make_shared<const SpatialModel>()),
      catalogue_(std::make_shared<const Catalogue>()) {}

void Framework::set_model(SpatialModel model) {
  auto shared = std::make_shared<const SpatialModel>(std::move(model));
  location_.set_frame(shared->frame().frame_id.empty() ? std::nullopt : std::optional(shared->frame()));
  std::lock_guard lock(shared_mutex_);
  model_ = std::move(shared);
}

std::shared_ptr<const SpatialModel> Framework::model() const {
  std::lock_guard lock(shared_mutex_);
  return model_;
}

void Framework::set_catalogue(Catalogue catalogue) {
  auto shared = std::make_shared<const Catalogue>(std::move(catalogue));
  std::lock_guard lock(shared_mutex_);
  catalogue_ = std::move(shared);
}

std::shared_ptr<const Catalogue> Framework::catalogue() const {
  std::lock_guard lock(shared_mutex_);
  return catalogue_;
}

void Framework::register_user(const UserId& user) { users_.add(user); }

void Framework::register_device(DeviceRecord record) { location_.register_device(std::move(record)); }

void Framework::put_fact(ContextFact fact) { facts_.put_fact(std::move(fact)); }

IngestResult Framework::ingest_fix(const PositionFix& fix) {
  auto fused = location_.ingest_fix(fix);
  IngestResult result;
  if (!fused) return result;
  result.fused = *fused;
  auto m = model();
  result.events = triggers_.evaluate(fix.user, *fused, *m);
  return result;
}

void Framework::add_rule(TriggerRule rule) {
  if (!users_.contains(rule.user)) throw Error(ErrorCode::UnknownUser, rule.user.str());
  auto m = model();
  triggers_.add_rule(std::move(rule), *m);
}

SnapshotState Framework::snapshot() const {
  SnapshotState s;
  s.context_types = types_.all();
  s.users = users_.all();
  s.devices = location_.devices().all();
  s.facts = facts_.all_facts();
  return s;
}

void Framework::restore(const SnapshotState& state) {
  if (!users_.all().empty() || !location_.devices().all().empty() || facts_.size() > 0)
    throw Error(ErrorCode::CorruptSnapshot, "snapshot can only be restored into an empty framework");
  ContextTypeRegistry types;
  for (const auto& d : state.context_types) {
    try {
      types.register_type(d);
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptSnapshot, e.what());
    }
  }
  types_ = types;
  for (const auto& u : state.users) users_.ensure(u);
  for (const auto& d : state.devices) {
    try {
      location_.register_device(d);
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptSnapshot, e.what());
    }
  }
  for (const auto& f : state.facts) facts_.restore_fact(f);
}

std::vector<ConsistencyViolation> Framework::check_consistency() const {
  return ctxfab::check_consistency(facts_, types_, location_.devices(), catalogue()->ids());
}

}  // namespace ctxfab
