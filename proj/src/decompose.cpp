#include "hkg/decompose.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace hkg {

namespace {
const char* kSubjectRel = "_reify_subject";
const char* kObjectRel = "_reify_object";
const char* kPredicateRel = "_reify_predicate";

std::string escape_pipes(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '|' && i + 1 < s.size() && s[i + 1] == '|') {
      out += "||||";  // double the pair
      ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}
}  // namespace

const char* method_name(DecomposeMethod m) {
  switch (m) {
    case DecomposeMethod::prune: return "prune";
    case DecomposeMethod::direct: return "direct";
    case DecomposeMethod::hyper: return "hyper";
    default: return "reify";
  }
}

DecomposeMethod method_from_name(const std::string& name) {
  if (name == "prune") return DecomposeMethod::prune;
  if (name == "direct") return DecomposeMethod::direct;
  if (name == "hyper") return DecomposeMethod::hyper;
  if (name == "reify") return DecomposeMethod::reify;
  throw std::invalid_argument("unknown decomposition method: " + name);
}

std::string composite_label(const std::string& relation,
                            const std::string& qualifier_relation) {
  return escape_pipes(relation) + "||" + escape_pipes(qualifier_relation);
}

std::vector<Triple> decompose_prune(const HyperFact& f) {
  return {f.main_triple()};
}

std::vector<Triple> decompose_direct(const HyperFact& f) {
  std::vector<Triple> out{f.main_triple()};
  for (const auto& q : f.qualifiers) out.push_back({f.subject, q.relation, q.entity});
  return out;
}

std::vector<Triple> decompose_hyper(const HyperFact& f, Vocabulary& relations) {
  std::vector<Triple> out = decompose_direct(f);
  for (const auto& q : f.qualifiers) {
    RelationId composite = relations.intern(
        composite_label(relations.label_of(f.relation), relations.label_of(q.relation)));
    out.push_back({q.entity, composite, f.object});
  }
  return out;
}

std::vector<Triple> decompose_reify(const HyperFact& f, Vocabulary& entities,
                                    Vocabulary& relations, std::size_t fact_ordinal) {
  EntityId pe = entities.intern("_pe_" + std::to_string(fact_ordinal));
  EntityId promoted = entities.intern("_rel_" + relations.label_of(f.relation));
  RelationId r_sub = relations.intern(kSubjectRel);
  RelationId r_obj = relations.intern(kObjectRel);
  RelationId r_pre = relations.intern(kPredicateRel);
  std::vector<Triple> out{{pe, r_sub, f.subject},
                          {pe, r_obj, f.object},
                          {pe, r_pre, promoted}};
  for (const auto& q : f.qualifiers) out.push_back({pe, q.relation, q.entity});
  return out;
}

DecomposedGraph decompose_graph(const HyperGraph& graph, DecomposeMethod method) {
  DecomposedGraph out;
  out.method = method;
  out.entities = graph.entities;
  out.relations = graph.relations;
  out.entities.freeze_original();
  out.relations.freeze_original();

  std::size_t fact_ordinal = 0;
  for (Split sp : {Split::train, Split::valid, Split::test}) {
    int si = static_cast<int>(sp);
    auto& triples = out.triples[si];
    auto& prov = out.provenance[si];
    for (const auto& fact : graph.split(sp)) {
      std::vector<Triple> piece;
      switch (method) {
        case DecomposeMethod::prune: piece = decompose_prune(fact); break;
        case DecomposeMethod::direct: piece = decompose_direct(fact); break;
        case DecomposeMethod::hyper: piece = decompose_hyper(fact, out.relations); break;
        case DecomposeMethod::reify:
          piece = decompose_reify(fact, out.entities, out.relations, fact_ordinal);
          break;
      }
      std::vector<std::size_t> indices;
      indices.reserve(piece.size());
      for (const auto& t : piece) {
        indices.push_back(triples.size());
        triples.push_back(t);
      }
      prov.push_back(std::move(indices));
      ++fact_ordinal;
    }
  }
  return out;
}

std::vector<Triple> DecomposedGraph::deduplicated(Split s) const {
  const auto& src = triples[static_cast<int>(s)];
  std::vector<Triple> out;
  out.reserve(src.size());
  std::set<Triple> seen;
  for (const auto& t : src)
    if (seen.insert(t).second) out.push_back(t);
  return out;
}

std::size_t DecomposedGraph::duplicates_removed(Split s) const {
  return split(s).size() - deduplicated(s).size();
}

void export_decomposed(const DecomposedGraph& g, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (Split sp : {Split::train, Split::valid, Split::test}) {
    std::ofstream out(fs::path(out_dir) / (std::string(split_name(sp)) + ".tsv"));
    for (const auto& t : g.deduplicated(sp)) {
      out << g.entities.label_of(t.subject) << '\t'
          << g.relations.label_of(t.relation) << '\t'
          << g.entities.label_of(t.object) << '\n';
    }
  }
  {
    std::ofstream prov(fs::path(out_dir) / "provenance.jsonl");
    for (Split sp : {Split::train, Split::valid, Split::test}) {
      const auto& lists = g.provenance[static_cast<int>(sp)];
      for (std::size_t i = 0; i < lists.size(); ++i) {
        nlohmann::json j{{"split", split_name(sp)},
                         {"fact", i},
                         {"triples", lists[i]}};
        prov << j.dump() << "\n";
      }
    }
  }
  {
    std::ofstream ents(fs::path(out_dir) / "entities.tsv");
    for (std::int32_t i = 0; i < g.entities.size(); ++i)
      ents << i << '\t' << g.entities.label_of(i) << '\t'
           << (g.entities.is_synthesized(i) ? 1 : 0) << '\n';
    std::ofstream rels(fs::path(out_dir) / "relations.tsv");
    for (std::int32_t i = 0; i < g.relations.size(); ++i)
      rels << i << '\t' << g.relations.label_of(i) << '\t'
           << (g.relations.is_synthesized(i) ? 1 : 0) << '\n';
  }
}

}  // namespace hkg
