#include "hkg/training.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hkg::train {

TrainConfig config_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  TrainConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
  cfg.loss = j.value("loss", cfg.loss);
  cfg.label_smoothing = j.value("label_smoothing", cfg.label_smoothing);
  cfg.margin = j.value("margin", cfg.margin);
  cfg.negatives = j.value("negatives", cfg.negatives);
  cfg.eval_every = j.value("eval_every", cfg.eval_every);
  cfg.patience = j.value("patience", cfg.patience);
  cfg.model.dim = j.value("dim", cfg.model.dim);
  cfg.model.gnn_layers = j.value("gnn_layers", cfg.model.gnn_layers);
  cfg.model.qi_layers = j.value("qi_layers", cfg.model.qi_layers);
  cfg.model.dec_layers = j.value("dec_layers", cfg.model.dec_layers);
  cfg.model.heads = j.value("heads", cfg.model.heads);
  cfg.model.max_arity = j.value("max_arity", cfg.model.max_arity);
  if (cfg.loss != "softmax-ce" && cfg.loss != "margin")
    throw std::invalid_argument("unknown loss: " + cfg.loss);
  if (cfg.batch_size < 1 || cfg.epochs < 0 || cfg.learning_rate <= 0.0)
    throw std::invalid_argument("invalid training hyperparameters");
  return cfg;
}

std::string config_to_json(const TrainConfig& cfg) {
  nlohmann::json j{{"seed", cfg.seed},
                   {"epochs", cfg.epochs},
                   {"batch_size", cfg.batch_size},
                   {"learning_rate", cfg.learning_rate},
                   {"adam_beta1", cfg.adam_beta1},
                   {"adam_beta2", cfg.adam_beta2},
                   {"adam_eps", cfg.adam_eps},
                   {"loss", cfg.loss},
                   {"label_smoothing", cfg.label_smoothing},
                   {"margin", cfg.margin},
                   {"negatives", cfg.negatives},
                   {"eval_every", cfg.eval_every},
                   {"patience", cfg.patience},
                   {"dim", cfg.model.dim},
                   {"gnn_layers", cfg.model.gnn_layers},
                   {"qi_layers", cfg.model.qi_layers},
                   {"dec_layers", cfg.model.dec_layers},
                   {"heads", cfg.model.heads},
                   {"max_arity", cfg.model.max_arity}};
  return j.dump(2);
}

namespace {

// Object-direction and inverse-mirrored subject-direction rank queries for
// one statement.
void add_rank_queries(std::vector<eval::RankQuery>& out, const HyperFact& fact,
                      int n_relations, bool qualifier_keys) {
  out.push_back({fact, fact.object, false, qualifier_keys});
  HyperFact mirrored{fact.object, fact.relation + n_relations, fact.subject,
                     fact.qualifiers};
  out.push_back({mirrored, fact.subject, true, qualifier_keys});
}

void add_filter_entries(eval::FilterIndex& filter, const HyperFact& fact,
                        int n_relations, bool qualifier_keys) {
  filter.insert(eval::make_key(fact, qualifier_keys), fact.object);
  HyperFact mirrored{fact.object, fact.relation + n_relations, fact.subject,
                     fact.qualifiers};
  filter.insert(eval::make_key(mirrored, qualifier_keys), fact.subject);
}

std::vector<Triple> dedup_triples(std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  return triples;
}

}  // namespace

Prepared prepare_data(const HyperGraph& graph, models::ModelKind kind,
                      std::optional<DecomposeMethod> method) {
  Prepared out;
  const bool hkg_aware = kind == models::ModelKind::formergnn;
  out.qualifier_keys = hkg_aware;

  if (hkg_aware) {
    out.n_entities = graph.entities.size();
    out.n_relations = graph.relations.size();
    out.entity_hash = graph.entities.content_hash();
    out.relation_hash = graph.relations.content_hash();

    std::vector<Triple> edges;
    for (const auto& f : graph.train) edges.push_back(f.main_triple());
    out.train_edges = dedup_triples(std::move(edges));

    for (const auto& f : graph.train) {
      out.train_queries.push_back(f);
      out.train_targets.push_back(f.object);
      out.train_queries.push_back(
          {f.object, f.relation + out.n_relations, f.subject, f.qualifiers});
      out.train_targets.push_back(f.subject);
      add_rank_queries(out.train_rank, f, out.n_relations, true);
      add_filter_entries(out.filter, f, out.n_relations, true);
    }
    for (const auto& f : graph.valid) {
      add_rank_queries(out.valid_rank, f, out.n_relations, true);
      add_filter_entries(out.filter, f, out.n_relations, true);
    }
    for (const auto& f : graph.test) {
      add_rank_queries(out.test_rank, f, out.n_relations, true);
      add_filter_entries(out.filter, f, out.n_relations, true);
    }
    return out;
  }

  if (!method)
    throw std::invalid_argument("KGE models require a decomposition method");
  DecomposedGraph dg = decompose_graph(graph, *method);
  out.n_entities = dg.entities.size();
  out.n_relations = dg.relations.size();
  out.entity_hash = dg.entities.content_hash();
  out.relation_hash = dg.relations.content_hash();
  out.train_edges = dg.deduplicated(Split::train);

  // Training targets are the decomposed edges; ranking queries stay on the
  // main triples so scores are comparable across decompositions.
  for (const auto& e : out.train_edges) {
    out.train_queries.push_back({e.subject, e.relation, e.object, {}});
    out.train_targets.push_back(e.object);
    out.train_queries.push_back(
        {e.object, e.relation + out.n_relations, e.subject, {}});
    out.train_targets.push_back(e.subject);
    HyperFact edge_fact{e.subject, e.relation, e.object, {}};
    add_filter_entries(out.filter, edge_fact, out.n_relations, false);
  }
  for (const auto& f : graph.train) {
    HyperFact main{f.subject, f.relation, f.object, {}};
    add_rank_queries(out.train_rank, main, out.n_relations, false);
    add_filter_entries(out.filter, main, out.n_relations, false);
  }
  for (const auto& f : graph.valid) {
    HyperFact main{f.subject, f.relation, f.object, {}};
    add_rank_queries(out.valid_rank, main, out.n_relations, false);
    add_filter_entries(out.filter, main, out.n_relations, false);
  }
  for (const auto& f : graph.test) {
    HyperFact main{f.subject, f.relation, f.object, {}};
    add_rank_queries(out.test_rank, main, out.n_relations, false);
    add_filter_entries(out.filter, main, out.n_relations, false);
  }
  return out;
}

std::vector<EntityId> negative_sample(EntityId true_object, int k, int n_entities,
                                      std::mt19937_64& rng) {
  if (n_entities < 2)
    throw std::invalid_argument("negative_sample: need at least 2 entities");
  std::uniform_int_distribution<EntityId> dist(0, n_entities - 1);
  std::vector<EntityId> out;
  out.reserve(k);
  while (static_cast<int>(out.size()) < k) {
    EntityId e = dist(rng);
    if (e != true_object) out.push_back(e);
  }
  return out;
}

void AdamOptimizer::step(ad::ParamSet& params, const std::vector<ad::Tensor>& grads) {
  if (grads.size() != params.size())
    throw std::invalid_argument("AdamOptimizer: gradient count mismatch");
  if (m_.empty()) {
    for (const auto& t : params.values) {
      m_.emplace_back(t.rows, t.cols);
      v_.emplace_back(t.rows, t.cols);
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    ad::Tensor& w = params.values[p];
    const ad::Tensor& g = grads[p];
    if (g.rows != w.rows || g.cols != w.cols)
      throw std::invalid_argument("AdamOptimizer: gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      double gi = g.data[i];
      m_[p].data[i] = beta1_ * m_[p].data[i] + (1.0 - beta1_) * gi;
      v_[p].data[i] = beta2_ * v_[p].data[i] + (1.0 - beta2_) * gi * gi;
      double mhat = m_[p].data[i] / bc1;
      double vhat = v_[p].data[i] / bc2;
      w.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,loss,valid_mrr\n";
  for (const auto& row : trace) {
    out << row.epoch << ',' << row.loss << ',';
    if (row.valid_mrr >= 0.0) out << row.valid_mrr;
    out << '\n';
  }
  return out.str();
}

TrainResult train(models::Model& model, const Prepared& data, const TrainConfig& cfg) {
  if (data.train_queries.empty())
    throw std::invalid_argument("train: empty training query set");
  std::mt19937_64 rng(cfg.seed);
  model.set_graph(data.train_edges);

  AdamOptimizer adam(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  const bool margin_loss = cfg.loss == "margin";

  TrainResult result;
  result.best_params = model.params();

  std::vector<std::size_t> order(data.train_queries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int stalled = 0;
  bool evaluated_once = false;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<HyperFact> queries;
      std::vector<EntityId> targets;
      std::vector<std::vector<EntityId>> negatives;
      for (std::size_t i = begin; i < end; ++i) {
        queries.push_back(data.train_queries[order[i]]);
        targets.push_back(data.train_targets[order[i]]);
        negatives.push_back(margin_loss
                                ? negative_sample(targets.back(), cfg.negatives,
                                                  data.n_entities, rng)
                                : std::vector<EntityId>{});
      }
      ad::Tape tape;
      ad::BoundParams bound = ad::bind(tape, model.params());
      ad::VarId loss = model.build_loss(tape, bound, queries, targets, negatives,
                                        cfg.label_smoothing, cfg.margin);
      double loss_value = tape.value(loss).data[0];
      if (!std::isfinite(loss_value))
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch offset " +
                                 std::to_string(begin));
      tape.backward(loss);
      std::vector<ad::Tensor> grads;
      for (std::size_t p = 0; p < model.params().size(); ++p)
        grads.push_back(tape.grad(bound[static_cast<int>(p)]));
      adam.step(model.params(), grads);
      model.project_constraints();

      epoch_loss += loss_value * static_cast<double>(end - begin);
      seen += end - begin;
    }

    TraceRow row;
    row.epoch = epoch;
    row.loss = epoch_loss / static_cast<double>(seen);

    if (cfg.eval_every > 0 && epoch % cfg.eval_every == 0 && !data.valid_rank.empty()) {
      row.valid_mrr = eval::evaluate(model, data.valid_rank, data.filter).overall.mrr;
      evaluated_once = true;
      if (row.valid_mrr > result.best_valid_mrr) {
        result.best_valid_mrr = row.valid_mrr;
        result.best_params = model.params();
        result.best_epoch = epoch;
        stalled = 0;
      } else if (++stalled >= cfg.patience) {
        result.trace.push_back(row);
        result.early_stopped = true;
        break;
      }
    }
    result.trace.push_back(row);
  }

  // Without validation checkpoints the final parameters are the result.
  if (!evaluated_once) {
    result.best_params = model.params();
    result.best_epoch = result.trace.empty() ? 0 : result.trace.back().epoch;
  } else {
    model.params() = result.best_params;
    model.set_graph(data.train_edges);  // index untouched, kept for clarity
  }
  return result;
}

}  // namespace hkg::train
