#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hkg/decompose.hpp"
#include "hkg/models.hpp"
#include "hkg/tensor.hpp"

namespace hkg::ckpt {

// Everything needed to reconstruct a trained model and verify it against a
// dataset. Tensor payloads are stored as raw IEEE-754 doubles so a
// save/load round trip is bit-exact.
struct Checkpoint {
  models::ModelKind kind = models::ModelKind::transh;
  std::optional<DecomposeMethod> method;  // empty for HKG-aware models
  models::ModelConfig config;
  int n_entities = 0;
  int n_relations = 0;
  std::uint64_t entity_hash = 0, relation_hash = 0;
  std::uint64_t seed = 0;
  ad::ParamSet params;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the model and installs the stored parameters.
std::unique_ptr<models::Model> restore_model(const Checkpoint& c);

}  // namespace hkg::ckpt
