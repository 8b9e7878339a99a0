#include "hkg/core.hpp"

#include <algorithm>
#include <unordered_set>

namespace hkg {

std::vector<Qualifier> HyperFact::canonical_qualifiers() const {
  std::vector<Qualifier> q = qualifiers;
  std::sort(q.begin(), q.end());
  return q;
}

bool HyperFact::canonical_equal(const HyperFact& other) const {
  return subject == other.subject && relation == other.relation &&
         object == other.object &&
         canonical_qualifiers() == other.canonical_qualifiers();
}

std::uint64_t canonical_hash(const HyperFact& fact) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::int64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<unsigned char>(v >> (8 * i));
      h *= 1099511628211ull;
    }
  };
  mix(fact.subject);
  mix(fact.relation);
  mix(fact.object);
  for (const auto& q : fact.canonical_qualifiers()) {
    mix(q.relation);
    mix(q.entity);
  }
  return h;
}

std::size_t HyperGraph::count_duplicates(Split s) const {
  const auto& facts = split(s);
  std::unordered_set<std::uint64_t> seen;
  std::size_t dups = 0;
  for (const auto& f : facts) {
    if (!seen.insert(canonical_hash(f)).second) ++dups;
  }
  return dups;
}

}  // namespace hkg
