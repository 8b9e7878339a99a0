#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hkg/core.hpp"
#include "hkg/models.hpp"

namespace hkg::eval {

// Query identity for filtering: full statement minus the target slot. KGE
// models on decomposed graphs use an empty qualifier list, i.e. (s, r).
struct QueryKey {
  EntityId subject;
  RelationId relation;
  std::vector<Qualifier> qualifiers;  // canonical order
  friend auto operator<=>(const QueryKey&, const QueryKey&) = default;
};

QueryKey make_key(const HyperFact& query, bool with_qualifiers);

// Known-true answers per query key over train ∪ valid ∪ test; every query's
// own answer is a member of its set.
class FilterIndex {
 public:
  void insert(const QueryKey& key, EntityId answer) { index_[key].insert(answer); }
  const std::set<EntityId>* find(const QueryKey& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return index_.size(); }

 private:
  std::map<QueryKey, std::set<EntityId>> index_;
};

// One ranking task: score all entities as the object of `query`; the true
// answer is `target`. Subject-side tasks are mirrored through inverse
// relations before they get here and carry subject_side = true for reporting.
struct RankQuery {
  HyperFact query;
  EntityId target;
  bool subject_side = false;
  bool with_qualifier_key = true;
};

// Average-tie filtered rank. `filtered` holds the other known-true answers
// (never the target itself).
double filtered_rank(const std::vector<double>& scores, EntityId target,
                     const std::set<EntityId>& filtered);

struct DirectionMetrics {
  double mrr = 0.0;
  double hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
  std::int64_t n_queries = 0;
};

struct MetricsReport {
  DirectionMetrics overall;     // average over all queries, both directions
  DirectionMetrics object_side;
  DirectionMetrics subject_side;
  std::string to_json() const;
};

MetricsReport evaluate(const models::Model& model,
                       const std::vector<RankQuery>& queries,
                       const FilterIndex& filter);

}  // namespace hkg::eval
