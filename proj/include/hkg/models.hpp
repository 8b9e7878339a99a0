#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hkg/core.hpp"
#include "hkg/tensor.hpp"

namespace hkg::models {

enum class ModelKind { transh, complex_, gnn, formergnn };

const char* kind_name(ModelKind k);
ModelKind kind_from_name(const std::string& name);

struct ModelConfig {
  int dim = 64;        // embedding / token dimension; must be even for ComplEx
  int gnn_layers = 2;
  int qi_layers = 2;   // qualifier-integrator transformer depth
  int dec_layers = 2;  // decoder transformer depth
  int heads = 4;
  int max_arity = 8;
};

// Queries are facts with the target slot removed: score_candidates ranks all
// entities as the object of (subject, relation, qualifiers). Subject
// prediction is expressed by the caller through inverse relations, so every
// relation id below 2*n_relations is valid (r + n_relations is the inverse
// of r).
class Model {
 public:
  virtual ~Model() = default;
  virtual ModelKind kind() const = 0;
  virtual const ModelConfig& config() const = 0;
  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }

  virtual std::vector<double> score_candidates(const HyperFact& query) const = 0;

  // Scalar training loss for a batch of queries whose true object is
  // targets[i]. `negatives` is consumed only by margin-loss models.
  virtual ad::VarId build_loss(ad::Tape& tape, const ad::BoundParams& bound,
                               const std::vector<HyperFact>& queries,
                               const std::vector<EntityId>& targets,
                               const std::vector<std::vector<EntityId>>& negatives,
                               double label_smoothing, double margin) const = 0;

  // Graph-consuming models rebuild their message-passing index from the
  // training edge list; a no-op for fact-local models.
  virtual void set_graph(const std::vector<Triple>& train_edges) {}

  // Constraint projection applied after each optimizer step (e.g. unit
  // hyperplane normals); default none.
  virtual void project_constraints() {}

 protected:
  ad::ParamSet params_;
};

std::unique_ptr<Model> make_model(ModelKind kind, int n_entities, int n_relations,
                                  const ModelConfig& config, std::mt19937_64& rng);

// ---- concrete models -------------------------------------------------------

class TransHModel final : public Model {
 public:
  TransHModel(int n_entities, int n_relations, ModelConfig cfg, std::mt19937_64& rng);
  ModelKind kind() const override { return ModelKind::transh; }
  const ModelConfig& config() const override { return cfg_; }

  double score(EntityId s, RelationId r, EntityId o) const;
  std::vector<double> score_candidates(const HyperFact& query) const override;
  ad::VarId build_loss(ad::Tape&, const ad::BoundParams&,
                       const std::vector<HyperFact>&, const std::vector<EntityId>&,
                       const std::vector<std::vector<EntityId>>&, double,
                       double margin) const override;
  void project_constraints() override;  // renormalize hyperplane normals

 private:
  ModelConfig cfg_;
  int n_entities_, n_relations_;
  int ent_, normals_, translations_;  // param indices
};

class ComplExModel final : public Model {
 public:
  ComplExModel(int n_entities, int n_relations, ModelConfig cfg, std::mt19937_64& rng);
  ModelKind kind() const override { return ModelKind::complex_; }
  const ModelConfig& config() const override { return cfg_; }

  double score(EntityId s, RelationId r, EntityId o) const;
  std::vector<double> score_candidates(const HyperFact& query) const override;
  ad::VarId build_loss(ad::Tape&, const ad::BoundParams&,
                       const std::vector<HyperFact>&, const std::vector<EntityId>&,
                       const std::vector<std::vector<EntityId>>&,
                       double label_smoothing, double) const override;

 private:
  ModelConfig cfg_;
  int n_entities_, n_relations_;
  int ent_, rel_;
};

// Static message-passing index over a triple list: per-direction gather and
// segment vectors, rebuilt whenever the training edge list changes.
struct MessageIndex {
  std::vector<int> fwd_src, fwd_rel, fwd_dst;
  std::vector<int> inv_src, inv_rel, inv_dst;
  std::vector<int> node_degree;  // undirected degree in the edge list
  int self_relation_row = 0;     // row of the self-loop relation embedding
  void build(const std::vector<Triple>& edges, int n_entities, int n_relations);
};

class GnnModel final : public Model {
 public:
  GnnModel(int n_entities, int n_relations, ModelConfig cfg, std::mt19937_64& rng);
  ModelKind kind() const override { return ModelKind::gnn; }
  const ModelConfig& config() const override { return cfg_; }

  void set_graph(const std::vector<Triple>& train_edges) override;

  // L rounds of relational message passing; returns the encoded entity table.
  ad::VarId encode(ad::Tape&, const ad::BoundParams&, int layers) const;

  std::vector<double> score_candidates(const HyperFact& query) const override;
  ad::VarId build_loss(ad::Tape&, const ad::BoundParams&,
                       const std::vector<HyperFact>&, const std::vector<EntityId>&,
                       const std::vector<std::vector<EntityId>>&,
                       double label_smoothing, double) const override;

 private:
  friend class FormerGnnModel;
  ModelConfig cfg_;
  int n_entities_, n_relations_;
  int ent_, rel_;                      // rel includes inverses + self-loop row
  std::vector<int> layer_w_;           // 3 weight indices per layer (fwd,inv,self)
  MessageIndex index_;
};

class FormerGnnModel final : public Model {
 public:
  FormerGnnModel(int n_entities, int n_relations, ModelConfig cfg, std::mt19937_64& rng);
  ModelKind kind() const override { return ModelKind::formergnn; }
  const ModelConfig& config() const override { return cfg_; }

  void set_graph(const std::vector<Triple>& train_edges) override;

  // Token matrix of the qualifier integrator for one query; sequence layout
  // [s, r, MSK, qr1, qe1, ..., pad] with shared role positions per slot kind.
  ad::VarId qualifier_integrate(ad::Tape&, const ad::BoundParams&,
                                const HyperFact& query) const;

  // Score vector over all entities for one query, given a precomputed
  // graph-encoder output and entity-row matrix (pass -1 to build them on the
  // same tape).
  ad::VarId forward(ad::Tape&, const ad::BoundParams&, const HyperFact& query,
                    ad::VarId encoded_entities, ad::VarId entity_rows = -1) const;
  ad::VarId encode_graph(ad::Tape&, const ad::BoundParams&) const;

  std::vector<double> score_candidates(const HyperFact& query) const override;
  ad::VarId build_loss(ad::Tape&, const ad::BoundParams&,
                       const std::vector<HyperFact>&, const std::vector<EntityId>&,
                       const std::vector<std::vector<EntityId>>&,
                       double label_smoothing, double) const override;

  // Queries whose subject had no edge in the pruned graph (h_gt fell back to
  // the raw embedding row) since the last set_graph.
  mutable std::int64_t gt_fallbacks = 0;

 private:
  struct TransformerIdx {
    struct Layer {
      std::vector<int> wq, wk, wv;  // per head [d, d/heads]
      int wo;                       // [d, d]
      int ffn_w1, ffn_b1, ffn_w2, ffn_b2;
      int ln1_g, ln1_b, ln2_g, ln2_b;
    };
    std::vector<Layer> layers;
  };

  TransformerIdx make_transformer(const std::string& prefix, int n_layers,
                                  std::mt19937_64& rng);
  ad::VarId transformer_stack(ad::Tape&, const ad::BoundParams&,
                              const TransformerIdx&, ad::VarId tokens,
                              const ad::Tensor& key_mask) const;
  std::vector<int> sequence_entity_rows(const HyperFact& query) const;

  ModelConfig cfg_;
  int n_entities_, n_relations_;
  int msk_row_, pad_row_;             // rows in the entity table
  int ent_, rel_;                     // rel includes inverses
  int qi_roles_, dec_roles_;
  int align_w_, align_b_;
  std::vector<int> gnn_w_;            // 3 per layer
  TransformerIdx qi_, dec_;
  MessageIndex index_;
};

}  // namespace hkg::models
