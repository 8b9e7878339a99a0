#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hkg/core.hpp"
#include "hkg/decompose.hpp"
#include "hkg/evaluation.hpp"
#include "hkg/models.hpp"

namespace hkg::train {

struct TrainConfig {
  std::uint64_t seed = 1;
  int epochs = 100;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
  std::string loss = "softmax-ce";  // softmax-ce | margin
  double label_smoothing = 0.1;
  double margin = 1.0;
  int negatives = 10;   // margin loss only
  int eval_every = 10;  // validation cadence in epochs; 0 disables
  int patience = 20;    // validation checks without improvement before stop
  models::ModelConfig model;
};

TrainConfig config_from_json(const std::string& json_text);
std::string config_to_json(const TrainConfig& cfg);

// Model-space view of a dataset: training edges, ranking queries for every
// split (object direction plus subject direction mirrored through inverse
// relations), and the filter index over all known truths. KGE kinds require a
// decomposition method and train on the decomposed edges; formergnn consumes
// statements directly and message-passes over the pruned training edges.
struct Prepared {
  int n_entities = 0;
  int n_relations = 0;  // before inverse doubling
  bool qualifier_keys = false;
  std::vector<Triple> train_edges;  // deduplicated
  std::vector<HyperFact> train_queries;
  std::vector<EntityId> train_targets;
  std::vector<eval::RankQuery> train_rank, valid_rank, test_rank;
  eval::FilterIndex filter;
  std::uint64_t entity_hash = 0, relation_hash = 0;
};

Prepared prepare_data(const HyperGraph& graph, models::ModelKind kind,
                      std::optional<DecomposeMethod> method);

// k uniform corruptions of the object slot, none equal to the true object.
std::vector<EntityId> negative_sample(EntityId true_object, int k, int n_entities,
                                      std::mt19937_64& rng);

class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ad::ParamSet& params, const std::vector<ad::Tensor>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<ad::Tensor> m_, v_;
};

struct TraceRow {
  int epoch = 0;
  double loss = 0.0;
  double valid_mrr = -1.0;  // -1 when not evaluated this epoch
};

struct TrainResult {
  ad::ParamSet best_params;
  int best_epoch = 0;        // 0 = initialization
  double best_valid_mrr = -1.0;
  std::vector<TraceRow> trace;
  bool early_stopped = false;
};

std::string trace_to_csv(const std::vector<TraceRow>& trace);

// Deterministic under a fixed seed: identical parameters, losses, and trace.
// Throws std::runtime_error when the loss turns non-finite. With epochs = 0
// the initialization is returned untouched. On return the model holds
// best_params.
TrainResult train(models::Model& model, const Prepared& data, const TrainConfig& cfg);

}  // namespace hkg::train
