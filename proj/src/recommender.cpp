#include "ctxfab/recommender.hpp"

#include <algorithm>
#include <fstream>

namespace ctxfab {

Catalogue::Catalogue(std::vector<Item> items) {
  for (auto& item : items) {
    if (item.id.empty()) throw Error(ErrorCode::BadRequest, "item with empty id");
    if (item.tags.empty()) throw Error(ErrorCode::BadRequest, "item '" + item.id.str() + "' has no tags");
    auto id = item.id;
    if (!items_.emplace(std::move(id), std::move(item)).second)
      throw Error(ErrorCode::BadRequest, "duplicate item id '" + item.id.str() + "'");
  }
}

const Item* Catalogue::find(const ItemId& id) const {
  auto it = items_.find(id);
  return it == items_.end() ? nullptr : &it->second;
}

std::set<ItemId> Catalogue::ids() const {
  std::set<ItemId> out;
  for (const auto& [id, _] : items_) out.insert(id);
  return out;
}

nlohmann::json catalogue_to_json(const Catalogue& c) {
  auto arr = nlohmann::json::array();
  for (const auto& [id, item] : c.items()) arr.push_back({{"id", id.str()}, {"name", item.name}, {"tags", item.tags}});
  return arr;
}

Catalogue catalogue_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::BadRequest, "catalogue must be an array");
  std::vector<Item> items;
  try {
    for (const auto& ij : j) {
      Item item;
      item.id = ItemId(ij.at("id").get<std::string>());
      item.name = ij.value("name", item.id.str());
      item.tags = ij.at("tags").get<std::set<std::string>>();
      items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("catalogue: ") + e.what());
  }
  return Catalogue(std::move(items));
}

Catalogue load_catalogue(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read catalogue '" + path + "'");
  try {
    return catalogue_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("catalogue: ") + e.what());
  }
}

VisitMatrix build_visit_matrix(const FactStore& store, const Catalogue& catalogue) {
  VisitMatrix m;
  for (const auto& f : store.facts_of_type(types::kVisit)) {
    if (!f.value.is_string()) continue;
    ItemId item(f.value.get<std::string>());
    if (!catalogue.find(item)) continue;
    double w = f.rating ? *f.rating / 5.0 : 1.0;
    auto& slot = m[f.user][item];
    slot = std::max(slot, w);
  }
  return m;
}

double similarity(const VisitMatrix& visits, const UserId& u, const UserId& v) {
  static const std::map<ItemId, double> kNone;
  auto iu = visits.find(u);
  auto iv = visits.find(v);
  const auto& a = iu == visits.end() ? kNone : iu->second;
  const auto& b = iv == visits.end() ? kNone : iv->second;
  double lo = 0.0;
  double hi = 0.0;
  // merge walk over the two sorted maps
  auto x = a.begin();
  auto y = b.begin();
  while (x != a.end() || y != b.end()) {
    if (y == b.end() || (x != a.end() && x->first < y->first)) {
      hi += x->second;
      ++x;
    } else if (x == a.end() || y->first < x->first) {
      hi += y->second;
      ++y;
    } else {
      lo += std::min(x->second, y->second);
      hi += std::max(x->second, y->second);
      ++x;
      ++y;
    }
  }
  return hi > 0.0 ? lo / hi : 0.0;
}

double profile_score(const PreferenceProfile& prefs, const Item& item) {
  double sum = 0.0;
  for (const auto& tag : item.tags) {
    if (auto it = prefs.find(tag); it != prefs.end()) sum += it->second;
  }
  return sum / std::max<double>(1.0, static_cast<double>(item.tags.size()));
}

std::vector<Recommendation> recommend(const VisitMatrix& visits, const PreferenceProfile& prefs,
                                      const Catalogue& catalogue, const UserId& user, std::size_t k,
                                      const RecommenderParams& params) {
  if (k < 1) throw Error(ErrorCode::BadRequest, "k must be >= 1");
  static const std::map<ItemId, double> kNone;
  auto own_it = visits.find(user);
  const auto& own = own_it == visits.end() ? kNone : own_it->second;

  std::vector<Recommendation> ranked;
  if (own.empty() && prefs.empty()) {
    std::map<ItemId, std::size_t> count;
    std::size_t with_history = 0;
    for (const auto& [v, items] : visits) {
      if (v == user || items.empty()) continue;
      ++with_history;
      for (const auto& [item, _] : items) ++count[item];
    }
    for (const auto& [id, _] : catalogue.items()) {
      double c = count.contains(id) ? static_cast<double>(count[id]) : 0.0;
      ranked.push_back({id, c / std::max<double>(1.0, static_cast<double>(with_history))});
    }
  } else {
    std::vector<std::pair<const std::map<ItemId, double>*, double>> neighbours;
    double total = 0.0;
    for (const auto& [v, items] : visits) {
      if (v == user) continue;
      double s = similarity(visits, user, v);
      if (s <= 0.0) continue;
      neighbours.emplace_back(&items, s);
      total += s;
    }
    for (const auto& [id, item] : catalogue.items()) {
      if (own.contains(id)) continue;
      double collab = 0.0;
      for (const auto& [items, s] : neighbours) {
        if (auto it = items->find(id); it != items->end()) collab += s * it->second;
      }
      collab /= std::max(1e-12, total);
      ranked.push_back({id, params.alpha * collab + (1.0 - params.alpha) * profile_score(prefs, item)});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::vector<Recommendation> recommend(const FactStore& store, const Catalogue& catalogue, const UserId& user,
                                      std::size_t k, const RecommenderParams& params) {
  PreferenceProfile prefs;
  if (store.registry().contains(types::kPreference)) {
    if (auto f = store.get_latest(user, types::kPreference)) prefs = preference_profile(*f);
  }
  return recommend(build_visit_matrix(store, catalogue), prefs, catalogue, user, k, params);
}

}  // namespace ctxfab
