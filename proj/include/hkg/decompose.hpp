#pragma once

#include <array>
#include <string>
#include <vector>

#include "hkg/core.hpp"

namespace hkg {

enum class DecomposeMethod { prune, direct, hyper, reify };

const char* method_name(DecomposeMethod m);
DecomposeMethod method_from_name(const std::string& name);

// Composite relation label r||qr. A literal "||" inside a source label is
// escaped by doubling so the composite stays invertible.
std::string composite_label(const std::string& relation, const std::string& qualifier_relation);

struct DecomposedGraph {
  DecomposeMethod method;
  Vocabulary entities;   // copy of source, extended for reify
  Vocabulary relations;  // copy of source, extended with synthesized relations
  // Triples per split, pre-dedup, in emission order.
  std::array<std::vector<Triple>, 3> triples;
  // provenance[split][fact index] = indices into triples[split].
  std::array<std::vector<std::vector<std::size_t>>, 3> provenance;

  const std::vector<Triple>& split(Split s) const { return triples[static_cast<int>(s)]; }
  std::vector<Triple> deduplicated(Split s) const;
  std::size_t duplicates_removed(Split s) const;
};

// Per-fact decompositions. The vocabulary-mutating variants intern composite
// and reification labels globally, so repeated (r, qr) pairs share one id.
std::vector<Triple> decompose_prune(const HyperFact& fact);
std::vector<Triple> decompose_direct(const HyperFact& fact);
std::vector<Triple> decompose_hyper(const HyperFact& fact, Vocabulary& relations);
std::vector<Triple> decompose_reify(const HyperFact& fact, Vocabulary& entities,
                                    Vocabulary& relations, std::size_t fact_ordinal);

DecomposedGraph decompose_graph(const HyperGraph& graph, DecomposeMethod method);

// Writes <out_dir>/{train,valid,test}.tsv (deduplicated edge lists),
// provenance.jsonl, entities.tsv and relations.tsv (with synthesized flags).
void export_decomposed(const DecomposedGraph& g, const std::string& out_dir);

}  // namespace hkg
