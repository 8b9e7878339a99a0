#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hkg {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

// Label <-> dense id map. Ids are assigned in first-seen order.
// Ids at or above `synthesized_from` were synthesized (composite relations,
// reification relations, pseudo entities) rather than read from input.
class Vocabulary {
 public:
  std::int32_t intern(const std::string& label) {
    if (label.empty()) throw std::invalid_argument("Vocabulary: empty label");
    auto it = index_.find(label);
    if (it != index_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(labels_.size());
    labels_.push_back(label);
    index_.emplace(label, id);
    return id;
  }

  std::optional<std::int32_t> lookup(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label_of(std::int32_t id) const { return labels_.at(id); }
  std::int32_t size() const { return static_cast<std::int32_t>(labels_.size()); }

  void freeze_original() { synthesized_from_ = size(); }
  bool is_synthesized(std::int32_t id) const { return id >= synthesized_from_; }
  std::int32_t original_size() const { return synthesized_from_; }

  // FNV-1a over labels in id order; used to pair checkpoints with data.
  std::uint64_t content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& l : labels_) {
      for (char c : l) { h ^= static_cast<unsigned char>(c); h *= 1099511628211ull; }
      h ^= 0x1f; h *= 1099511628211ull;
    }
    return h;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::int32_t synthesized_from_ = 0;
};

struct Qualifier {
  RelationId relation;
  EntityId entity;
  friend bool operator==(const Qualifier&, const Qualifier&) = default;
  friend auto operator<=>(const Qualifier&, const Qualifier&) = default;
};

struct Triple {
  EntityId subject;
  RelationId relation;
  EntityId object;
  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// One hyper-relational statement: a main triple plus an ordered qualifier
// list. Source order of qualifiers is preserved for provenance; equality and
// hashing use the canonical (relation, entity) ascending order.
struct HyperFact {
  EntityId subject;
  RelationId relation;
  EntityId object;
  std::vector<Qualifier> qualifiers;

  int arity() const { return static_cast<int>(qualifiers.size()); }
  Triple main_triple() const { return {subject, relation, object}; }

  std::vector<Qualifier> canonical_qualifiers() const;
  bool canonical_equal(const HyperFact& other) const;
};

std::uint64_t canonical_hash(const HyperFact& fact);

enum class Split { train, valid, test };
inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    default: return "test";
  }
}

struct HyperGraph {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<HyperFact> train, valid, test;

  const std::vector<HyperFact>& split(Split s) const {
    switch (s) {
      case Split::train: return train;
      case Split::valid: return valid;
      default: return test;
    }
  }
  std::vector<HyperFact>& split(Split s) {
    switch (s) {
      case Split::train: return train;
      case Split::valid: return valid;
      default: return test;
    }
  }

  std::size_t total_facts() const { return train.size() + valid.size() + test.size(); }

  // Number of canonical duplicates within a split (available, not enforced).
  std::size_t count_duplicates(Split s) const;
};

}  // namespace hkg
