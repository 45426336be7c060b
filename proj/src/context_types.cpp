#include "ctxfab/context_types.hpp"

#include <array>
#include <cmath>

#include "ctxfab/coordinates.hpp"

namespace ctxfab {
namespace {

constexpr std::array<std::pair<ValueKind, std::string_view>, 6> kKindNames{{
    {ValueKind::Number, "number"},
    {ValueKind::Text, "text"},
    {ValueKind::Enum, "enum"},
    {ValueKind::TagSet, "tag_set"},
    {ValueKind::WeightedTags, "weighted_tags"},
    {ValueKind::Coordinates, "coordinates"},
}};

ValidationError mismatch(std::string why) { return {ErrorCode::SchemaMismatch, std::move(why)}; }

}  // namespace

std::string_view to_string(ValueKind kind) noexcept {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "text";
}

std::optional<ValueKind> value_kind_from_string(std::string_view s) noexcept {
  for (const auto& [k, n] : kKindNames)
    if (n == s) return k;
  return std::nullopt;
}

nlohmann::json descriptor_to_json(const ContextTypeDescriptor& d) {
  nlohmann::json j{{"name", d.name}, {"kind", to_string(d.schema.kind)}};
  if (!d.schema.unit.empty()) j["unit"] = d.schema.unit;
  if (!d.schema.allowed.empty()) j["allowed"] = d.schema.allowed;
  return j;
}

ContextTypeDescriptor descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
    throw Error(ErrorCode::BadRequest, "context type needs a name");
  ContextTypeDescriptor d;
  d.name = j.at("name").get<std::string>();
  auto kind = value_kind_from_string(j.value("kind", std::string{}));
  if (!kind) throw Error(ErrorCode::BadRequest, "unknown value kind for type '" + d.name + "'");
  d.schema.kind = *kind;
  d.schema.unit = j.value("unit", std::string{});
  if (j.contains("allowed")) d.schema.allowed = j.at("allowed").get<std::set<std::string>>();
  return d;
}

nlohmann::json fact_to_json(const ContextFact& f) {
  nlohmann::json j{{"user", f.user.str()}, {"type", f.type}, {"value", f.value}};
  if (f.timestamp) j["timestamp"] = *f.timestamp;
  if (f.rating) j["rating"] = *f.rating;
  if (f.source_device) j["device"] = f.source_device->str();
  return j;
}

ContextFact fact_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "fact must be an object");
  ContextFact f;
  if (j.contains("user")) {
    if (!j.at("user").is_string()) throw Error(ErrorCode::BadRequest, "user must be a string");
    f.user = UserId(j.at("user").get<std::string>());
  }
  if (j.contains("type")) {
    if (!j.at("type").is_string()) throw Error(ErrorCode::BadRequest, "type must be a string");
    f.type = j.at("type").get<std::string>();
  }
  if (j.contains("timestamp") && !j.at("timestamp").is_null()) {
    if (!j.at("timestamp").is_number_integer())
      throw Error(ErrorCode::BadRequest, "timestamp must be an integer");
    f.timestamp = j.at("timestamp").get<Timestamp>();
  }
  if (j.contains("value")) f.value = j.at("value");
  if (j.contains("rating")) {
    if (!j.at("rating").is_number()) throw Error(ErrorCode::BadRequest, "rating must be a number");
    f.rating = j.at("rating").get<double>();
  }
  if (j.contains("device")) f.source_device = DeviceId(j.at("device").get<std::string>());
  return f;
}

ContextTypeRegistry::ContextTypeRegistry(const ContextTypeRegistry& other) {
  std::shared_lock lock(other.mutex_);
  types_ = other.types_;
}

ContextTypeRegistry& ContextTypeRegistry::operator=(const ContextTypeRegistry& other) {
  if (this == &other) return *this;
  std::map<std::string, ContextTypeDescriptor> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.types_;
  }
  std::unique_lock lock(mutex_);
  types_ = std::move(copy);
  return *this;
}

void ContextTypeRegistry::register_type(ContextTypeDescriptor descriptor) {
  if (descriptor.name.empty()) throw Error(ErrorCode::BadRequest, "context type name is empty");
  if (descriptor.schema.kind == ValueKind::Enum && descriptor.schema.allowed.empty())
    throw Error(ErrorCode::SchemaMismatch, "enum type '" + descriptor.name + "' has no allowed values");
  std::unique_lock lock(mutex_);
  if (types_.contains(descriptor.name)) throw Error(ErrorCode::DuplicateTypeName, descriptor.name);
  auto name = descriptor.name;
  types_.emplace(std::move(name), std::move(descriptor));
}

void ContextTypeRegistry::extend_allowed(const std::string& name, const std::string& value) {
  std::unique_lock lock(mutex_);
  auto it = types_.find(name);
  if (it == types_.end()) throw Error(ErrorCode::UnknownType, name);
  auto& schema = it->second.schema;
  if (schema.kind != ValueKind::Enum && !(schema.kind == ValueKind::TagSet && !schema.allowed.empty()))
    throw Error(ErrorCode::SchemaMismatch, "type '" + name + "' has no closed value set");
  schema.allowed.insert(value);
}

bool ContextTypeRegistry::unregister_type(const std::string& name) {
  std::unique_lock lock(mutex_);
  return types_.erase(name) > 0;
}

std::optional<ContextTypeDescriptor> ContextTypeRegistry::lookup(const std::string& name) const {
  std::shared_lock lock(mutex_);
  auto it = types_.find(name);
  if (it == types_.end()) return std::nullopt;
  return it->second;
}

bool ContextTypeRegistry::contains(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return types_.contains(name);
}

std::vector<ContextTypeDescriptor> ContextTypeRegistry::all() const {
  std::shared_lock lock(mutex_);
  std::vector<ContextTypeDescriptor> out;
  out.reserve(types_.size());
  for (const auto& [_, d] : types_) out.push_back(d);
  return out;
}

ContextTypeRegistry default_context_types() {
  ContextTypeRegistry r;
  r.register_type({types::kDisability,
                   {ValueKind::TagSet, "", {tags::kWheelchair, tags::kLowVision, tags::kBlearEyed,
                                            tags::kHearingImpaired}}});
  r.register_type({types::kPreference, {ValueKind::WeightedTags, "", {}}});
  r.register_type({types::kDetail, {ValueKind::Enum, "", {"brief", "normal", "detailed"}}});
  r.register_type({types::kVisit, {ValueKind::Text, "", {}}});
  r.register_type({"activity", {ValueKind::Text, "", {}}});
  r.register_type({"role", {ValueKind::Text, "", {}}});
  r.register_type({"time", {ValueKind::Number, "ms", {}}});
  r.register_type({"location", {ValueKind::Coordinates, "", {}}});
  return r;
}

Verdict validate_value(const nlohmann::json& value, const ValueSchema& schema) {
  switch (schema.kind) {
    case ValueKind::Number:
      if (!value.is_number() || !std::isfinite(value.get<double>())) return mismatch("value must be a finite number");
      return std::nullopt;
    case ValueKind::Text:
      if (!value.is_string() || value.get_ref<const std::string&>().empty())
        return mismatch("value must be a non-empty string");
      return std::nullopt;
    case ValueKind::Enum:
      if (!value.is_string()) return mismatch("value must be a string");
      if (!schema.allowed.contains(value.get<std::string>()))
        return mismatch("value '" + value.get<std::string>() + "' not in allowed set");
      return std::nullopt;
    case ValueKind::TagSet: {
      if (!value.is_array()) return mismatch("value must be an array of tags");
      std::set<std::string> seen;
      for (const auto& tag : value) {
        if (!tag.is_string() || tag.get_ref<const std::string&>().empty())
          return mismatch("tags must be non-empty strings");
        const auto& s = tag.get_ref<const std::string&>();
        if (!seen.insert(s).second) return mismatch("duplicate tag '" + s + "'");
        if (!schema.allowed.empty() && !schema.allowed.contains(s)) return mismatch("tag '" + s + "' not allowed");
      }
      return std::nullopt;
    }
    case ValueKind::WeightedTags: {
      if (!value.is_object() || value.empty()) return mismatch("value must be a non-empty tag -> weight object");
      for (const auto& [tag, w] : value.items()) {
        if (tag.empty()) return mismatch("empty preference tag");
        if (!w.is_number()) return mismatch("weight of '" + tag + "' must be a number");
        double x = w.get<double>();
        if (!(x >= 0.0 && x <= 1.0)) return mismatch("weight of '" + tag + "' outside [0, 1]");
      }
      return std::nullopt;
    }
    case ValueKind::Coordinates: {
      Coordinates2D c;
      try {
        c = coordinates_from_json(value);
      } catch (const Error& e) {
        return mismatch(e.detail());
      }
      if (c.z) return mismatch("coordinates must not have a Z component");
      if (auto v = validate_coordinates(c)) return mismatch(v->reason);
      return std::nullopt;
    }
  }
  return mismatch("unsupported schema");
}

Verdict validate_fact(const ContextFact& fact, const ContextTypeRegistry& registry) {
  if (fact.user.empty()) return ValidationError{ErrorCode::MissingUser, "fact has no user"};
  if (!fact.timestamp) return ValidationError{ErrorCode::MissingTimestamp, "fact has no timestamp"};
  if (*fact.timestamp < 0) return ValidationError{ErrorCode::MissingTimestamp, "timestamp must be >= 0"};
  auto descriptor = registry.lookup(fact.type);
  if (!descriptor) return ValidationError{ErrorCode::UnknownType, "type '" + fact.type + "' is not registered"};
  if (auto v = validate_value(fact.value, descriptor->schema)) return v;
  if (fact.rating && !(*fact.rating >= 1.0 && *fact.rating <= 5.0)) return mismatch("rating outside [1, 5]");
  return std::nullopt;
}

DisabilityProfile disability_profile(const ContextFact& fact) {
  DisabilityProfile out;
  if (!fact.value.is_array()) return out;
  for (const auto& tag : fact.value)
    if (tag.is_string()) out.insert(tag.get<std::string>());
  return out;
}

PreferenceProfile preference_profile(const ContextFact& fact) {
  PreferenceProfile out;
  if (!fact.value.is_object()) return out;
  for (const auto& [tag, w] : fact.value.items())
    if (w.is_number()) out[tag] = w.get<double>();
  return out;
}

}  // namespace ctxfab
