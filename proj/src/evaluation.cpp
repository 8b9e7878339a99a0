#include "hkg/evaluation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hkg::eval {

QueryKey make_key(const HyperFact& query, bool with_qualifiers) {
  QueryKey key{query.subject, query.relation, {}};
  if (with_qualifiers) key.qualifiers = query.canonical_qualifiers();
  return key;
}

double filtered_rank(const std::vector<double>& scores, EntityId target,
                     const std::set<EntityId>& filtered) {
  if (filtered.count(target))
    throw std::logic_error("filtered_rank: target present in filter set");
  const double s_true = scores.at(target);
  std::int64_t above = 0, ties = 0;
  for (EntityId e = 0; e < static_cast<EntityId>(scores.size()); ++e) {
    if (e == target || filtered.count(e)) continue;
    if (scores[e] > s_true) ++above;
    else if (scores[e] == s_true) ++ties;
  }
  return 1.0 + above + 0.5 * ties;
}

namespace {

void accumulate(DirectionMetrics& m, double rank) {
  m.mrr += 1.0 / rank;
  m.hits1 += rank <= 1.0 ? 1.0 : 0.0;
  m.hits3 += rank <= 3.0 ? 1.0 : 0.0;
  m.hits10 += rank <= 10.0 ? 1.0 : 0.0;
  ++m.n_queries;
}

void finalize(DirectionMetrics& m) {
  if (m.n_queries == 0) return;
  m.mrr /= m.n_queries;
  m.hits1 /= m.n_queries;
  m.hits3 /= m.n_queries;
  m.hits10 /= m.n_queries;
}

nlohmann::json direction_json(const DirectionMetrics& m) {
  return {{"mrr", m.mrr},
          {"hits@1", m.hits1},
          {"hits@3", m.hits3},
          {"hits@10", m.hits10},
          {"n_queries", m.n_queries}};
}

}  // namespace

MetricsReport evaluate(const models::Model& model,
                       const std::vector<RankQuery>& queries,
                       const FilterIndex& filter) {
  MetricsReport report;
  for (const auto& q : queries) {
    std::vector<double> scores = model.score_candidates(q.query);
    std::set<EntityId> other_true;
    if (const auto* set = filter.find(make_key(q.query, q.with_qualifier_key))) {
      other_true = *set;
      other_true.erase(q.target);
    }
    double rank = filtered_rank(scores, q.target, other_true);
    accumulate(report.overall, rank);
    accumulate(q.subject_side ? report.subject_side : report.object_side, rank);
  }
  finalize(report.overall);
  finalize(report.object_side);
  finalize(report.subject_side);
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j{{"overall", direction_json(overall)},
                   {"object_side", direction_json(object_side)},
                   {"subject_side", direction_json(subject_side)}};
  return j.dump(2);
}

}  // namespace hkg::eval
