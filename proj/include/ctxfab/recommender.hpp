#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxfab/context_store.hpp"

namespace ctxfab {

struct Item {
  ItemId id;
  std::string name;
  std::set<std::string> tags;
};

/// Item catalogue keyed by id.
class Catalogue {
 public:
  Catalogue() = default;
  /// Throws BadRequest on duplicate ids or empty tag sets.
  explicit Catalogue(std::vector<Item> items);

  const std::map<ItemId, Item>& items() const noexcept { return items_; }
  const Item* find(const ItemId& id) const;
  std::set<ItemId> ids() const;
  bool empty() const noexcept { return items_.empty(); }

 private:
  std::map<ItemId, Item> items_;
};

nlohmann::json catalogue_to_json(const Catalogue& c);
/// Throws BadRequest.
Catalogue catalogue_from_json(const nlohmann::json& j);
/// Throws IoError or BadRequest.
Catalogue load_catalogue(const std::string& path);

/// user -> item -> visit weight (1, or rating / 5 when the visit is rated; the
/// largest weight wins for repeat visits).
using VisitMatrix = std::map<UserId, std::map<ItemId, double>>;

/// Built from "visit" facts; visits of unknown items are skipped.
VisitMatrix build_visit_matrix(const FactStore& store, const Catalogue& catalogue);

/// Weighted Jaccard sum(min) / sum(max); equals |A n B| / |A u B| for unrated
/// visits. Both empty gives 0.
double similarity(const VisitMatrix& visits, const UserId& u, const UserId& v);

double profile_score(const PreferenceProfile& prefs, const Item& item);

struct RecommenderParams {
  double alpha = 0.7;  // collaborative share of the blended score
};

struct Recommendation {
  ItemId item;
  double score = 0.0;
};

/// Top-k unvisited items. Users without visits and preferences get the
/// global-popularity ranking instead.
std::vector<Recommendation> recommend(const VisitMatrix& visits, const PreferenceProfile& prefs,
                                      const Catalogue& catalogue, const UserId& user,
                                      std::size_t k, const RecommenderParams& params = {});

/// Convenience: matrix and preferences read from the store. Throws BadRequest for k < 1.
std::vector<Recommendation> recommend(const FactStore& store, const Catalogue& catalogue,
                                      const UserId& user, std::size_t k,
                                      const RecommenderParams& params = {});

}  // namespace ctxfab
