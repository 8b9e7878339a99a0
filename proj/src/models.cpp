#include "hkg/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hkg::models {

using ad::BoundParams;
using ad::ParamSet;
using ad::Tape;
using ad::Tensor;
using ad::VarId;

namespace {

constexpr double kMaskedScore = -1e30;
constexpr double kNormEps = 1e-12;

Tensor uniform_init(int rows, int cols, std::mt19937_64& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (double& v : t.data) v = dist(rng);
  return t;
}

Tensor xavier_init(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (rows + cols)));
  Tensor t(rows, cols);
  for (double& v : t.data) v = dist(rng);
  return t;
}

Tensor ones_row(int cols) {
  Tensor t(1, cols);
  for (double& v : t.data) v = 1.0;
  return t;
}

Tensor filled(int rows, int cols, double v) {
  Tensor t(rows, cols);
  for (double& x : t.data) x = v;
  return t;
}

// -sum(q .* log_softmax(logits)) / B with label-smoothed targets q.
VarId cross_entropy(Tape& tape, VarId logits, const std::vector<EntityId>& targets,
                    double smoothing) {
  const Tensor& lv = tape.value(logits);
  int batch = lv.rows;
  int classes = lv.cols;
  Tensor q(batch, classes);
  double off = smoothing / classes;
  for (int r = 0; r < batch; ++r) {
    for (int c = 0; c < classes; ++c) q.at(r, c) = off;
    q.at(r, targets[r]) += 1.0 - smoothing;
  }
  VarId lp = tape.log_softmax_rows(logits);
  return tape.scale(tape.sum(tape.mul(lp, tape.input(std::move(q)))), -1.0 / batch);
}

std::vector<int> iota_rows(int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// Shared relational message-passing stack. `entities` must be a [V,d] var on
// the tape; relation rows are looked up in `relations` with inverses at
// r + n_relations and the self-loop row at 2*n_relations.
VarId gnn_stack(Tape& tape, VarId entities, VarId relations,
                const BoundParams& bound, const std::vector<int>& layer_weights,
                int layers, const MessageIndex& index, int n_entities, int dim) {
  VarId h = entities;
  std::vector<int> self_rel(n_entities, 0);
  // self-loop relation row id is encoded in the index
  for (auto& v : self_rel) v = index.self_relation_row;
  for (int layer = 0; layer < layers; ++layer) {
    VarId w_fwd = bound[layer_weights[3 * layer + 0]];
    VarId w_inv = bound[layer_weights[3 * layer + 1]];
    VarId w_self = bound[layer_weights[3 * layer + 2]];

    VarId fwd_pool, inv_pool;
    if (index.fwd_src.empty()) {
      fwd_pool = tape.input(Tensor(n_entities, dim));
    } else {
      VarId msgs = tape.sub(tape.gather_rows(h, index.fwd_src),
                            tape.gather_rows(relations, index.fwd_rel));
      fwd_pool = tape.segment_mean(msgs, index.fwd_dst, n_entities);
    }
    if (index.inv_src.empty()) {
      inv_pool = tape.input(Tensor(n_entities, dim));
    } else {
      VarId msgs = tape.sub(tape.gather_rows(h, index.inv_src),
                            tape.gather_rows(relations, index.inv_rel));
      inv_pool = tape.segment_mean(msgs, index.inv_dst, n_entities);
    }
    VarId self_msg = tape.sub(h, tape.gather_rows(relations, self_rel));
    VarId combined = tape.add(tape.add(tape.matmul(fwd_pool, w_fwd),
                                       tape.matmul(inv_pool, w_inv)),
                              tape.matmul(self_msg, w_self));
    h = tape.relu(combined);
  }
  return h;
}

}  // namespace

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::transh: return "transh";
    case ModelKind::complex_: return "complex";
    case ModelKind::gnn: return "gnn";
    default: return "formergnn";
  }
}

ModelKind kind_from_name(const std::string& name) {
  if (name == "transh") return ModelKind::transh;
  if (name == "complex") return ModelKind::complex_;
  if (name == "gnn") return ModelKind::gnn;
  if (name == "formergnn") return ModelKind::formergnn;
  throw std::invalid_argument("unknown model kind: " + name);
}

void MessageIndex::build(const std::vector<Triple>& edges, int n_entities,
                         int n_relations) {
  fwd_src.clear(); fwd_rel.clear(); fwd_dst.clear();
  inv_src.clear(); inv_rel.clear(); inv_dst.clear();
  node_degree.assign(n_entities, 0);
  self_relation_row = 2 * n_relations;
  for (const auto& t : edges) {
    fwd_src.push_back(t.subject);
    fwd_rel.push_back(t.relation);
    fwd_dst.push_back(t.object);
    inv_src.push_back(t.object);
    inv_rel.push_back(t.relation + n_relations);
    inv_dst.push_back(t.subject);
    ++node_degree[t.subject];
    ++node_degree[t.object];
  }
}

// ---- TransH -----------------------------------------------------------------

TransHModel::TransHModel(int n_entities, int n_relations, ModelConfig cfg,
                         std::mt19937_64& rng)
    : cfg_(cfg), n_entities_(n_entities), n_relations_(n_relations) {
  int d = cfg_.dim;
  int r2 = 2 * n_relations;
  ent_ = params_.add("ent", uniform_init(n_entities, d, rng));
  normals_ = params_.add("normals", uniform_init(r2, d, rng));
  translations_ = params_.add("translations", uniform_init(r2, d, rng));
  project_constraints();
}

void TransHModel::project_constraints() {
  Tensor& w = params_[normals_];
  for (int r = 0; r < w.rows; ++r) {
    double norm = 0.0;
    for (int c = 0; c < w.cols; ++c) norm += w.at(r, c) * w.at(r, c);
    norm = std::sqrt(std::max(norm, kNormEps));
    for (int c = 0; c < w.cols; ++c) w.at(r, c) /= norm;
  }
  // entity vectors live in the unit ball; without this cap the margin loss
  // is satisfied by scale blow-up instead of geometry
  Tensor& ent = params_[ent_];
  for (int r = 0; r < ent.rows; ++r) {
    double norm = 0.0;
    for (int c = 0; c < ent.cols; ++c) norm += ent.at(r, c) * ent.at(r, c);
    norm = std::sqrt(norm);
    if (norm > 1.0)
      for (int c = 0; c < ent.cols; ++c) ent.at(r, c) /= norm;
  }
}

double TransHModel::score(EntityId s, RelationId r, EntityId o) const {
  const Tensor& ent = params_[ent_];
  const Tensor& w = params_[normals_];
  const Tensor& dr = params_[translations_];
  int d = cfg_.dim;
  double dot_s = 0.0, dot_o = 0.0;
  for (int c = 0; c < d; ++c) {
    dot_s += w.at(r, c) * ent.at(s, c);
    dot_o += w.at(r, c) * ent.at(o, c);
  }
  double dist2 = 0.0;
  for (int c = 0; c < d; ++c) {
    double ps = ent.at(s, c) - w.at(r, c) * dot_s;
    double po = ent.at(o, c) - w.at(r, c) * dot_o;
    double diff = ps + dr.at(r, c) - po;
    dist2 += diff * diff;
  }
  return -std::sqrt(dist2);
}

std::vector<double> TransHModel::score_candidates(const HyperFact& query) const {
  std::vector<double> out(n_entities_);
  for (int o = 0; o < n_entities_; ++o)
    out[o] = score(query.subject, query.relation, static_cast<EntityId>(o));
  return out;
}

VarId TransHModel::build_loss(Tape& tape, const BoundParams& bound,
                              const std::vector<HyperFact>& queries,
                              const std::vector<EntityId>& targets,
                              const std::vector<std::vector<EntityId>>& negatives,
                              double, double margin) const {
  int batch = static_cast<int>(queries.size());
  std::vector<int> s_idx(batch), r_idx(batch), o_idx(batch);
  for (int i = 0; i < batch; ++i) {
    s_idx[i] = queries[i].subject;
    r_idx[i] = queries[i].relation;
    o_idx[i] = targets[i];
  }
  VarId ent = bound[ent_];
  VarId w = tape.gather_rows(bound[normals_], r_idx);
  VarId dr = tape.gather_rows(bound[translations_], r_idx);

  auto projected = [&](const std::vector<int>& rows) {
    VarId h = tape.gather_rows(ent, rows);
    VarId dot = tape.row_sum(tape.mul(w, h));
    return tape.sub(h, tape.scale_rows(w, dot));
  };
  auto distance = [&](VarId translated, VarId proj_tail) {
    VarId diff = tape.sub(translated, proj_tail);
    VarId sq = tape.row_sum(tape.mul(diff, diff));
    return tape.sqrt_elem(tape.add(sq, tape.input(filled(tape.value(sq).rows, 1, kNormEps))));
  };

  VarId translated = tape.add(projected(s_idx), dr);
  VarId d_pos = distance(translated, projected(o_idx));

  std::vector<int> rep;       // positive row per hinge term
  std::vector<int> neg_rows;  // corrupted tail entity rows
  for (int i = 0; i < batch; ++i)
    for (EntityId n : negatives[i]) {
      rep.push_back(i);
      neg_rows.push_back(n);
    }
  if (rep.empty()) return tape.scale(tape.sum(d_pos), 1.0 / batch);

  // corrupted distance reuses the translated head rows of its positive
  VarId neg_w = tape.gather_rows(w, rep);
  VarId neg_h = tape.gather_rows(ent, neg_rows);
  VarId neg_dot = tape.row_sum(tape.mul(neg_w, neg_h));
  VarId neg_proj = tape.sub(neg_h, tape.scale_rows(neg_w, neg_dot));
  VarId d_neg = distance(tape.gather_rows(translated, rep), neg_proj);

  int n = static_cast<int>(rep.size());
  VarId gap = tape.sub(tape.gather_rows(d_pos, rep), d_neg);
  VarId hinge = tape.relu(tape.add(gap, tape.input(filled(n, 1, margin))));
  return tape.scale(tape.sum(hinge), 1.0 / n);
}

// ---- ComplEx ----------------------------------------------------------------

ComplExModel::ComplExModel(int n_entities, int n_relations, ModelConfig cfg,
                           std::mt19937_64& rng)
    : cfg_(cfg), n_entities_(n_entities), n_relations_(n_relations) {
  if (cfg_.dim % 2 != 0)
    throw std::invalid_argument("ComplEx requires an even dimension, got " +
                                std::to_string(cfg_.dim));
  ent_ = params_.add("ent", uniform_init(n_entities, cfg_.dim, rng));
  rel_ = params_.add("rel", uniform_init(2 * n_relations, cfg_.dim, rng));
}

double ComplExModel::score(EntityId s, RelationId r, EntityId o) const {
  const Tensor& ent = params_[ent_];
  const Tensor& rel = params_[rel_];
  int hd = cfg_.dim / 2;
  double acc = 0.0;
  for (int k = 0; k < hd; ++k) {
    double sr = ent.at(s, k), si = ent.at(s, hd + k);
    double rr = rel.at(r, k), ri = rel.at(r, hd + k);
    double orr = ent.at(o, k), oi = ent.at(o, hd + k);
    acc += (sr * rr - si * ri) * orr + (sr * ri + si * rr) * oi;
  }
  return acc;
}

std::vector<double> ComplExModel::score_candidates(const HyperFact& query) const {
  std::vector<double> out(n_entities_);
  for (int o = 0; o < n_entities_; ++o)
    out[o] = score(query.subject, query.relation, static_cast<EntityId>(o));
  return out;
}

VarId ComplExModel::build_loss(Tape& tape, const BoundParams& bound,
                               const std::vector<HyperFact>& queries,
                               const std::vector<EntityId>& targets,
                               const std::vector<std::vector<EntityId>>&,
                               double label_smoothing, double) const {
  int batch = static_cast<int>(queries.size());
  int hd = cfg_.dim / 2;
  std::vector<int> s_idx(batch), r_idx(batch);
  for (int i = 0; i < batch; ++i) {
    s_idx[i] = queries[i].subject;
    r_idx[i] = queries[i].relation;
  }
  VarId hs = tape.gather_rows(bound[ent_], s_idx);
  VarId hr = tape.gather_rows(bound[rel_], r_idx);
  VarId re_s = tape.slice_cols(hs, 0, hd), im_s = tape.slice_cols(hs, hd, hd);
  VarId re_r = tape.slice_cols(hr, 0, hd), im_r = tape.slice_cols(hr, hd, hd);
  // s*r = a + ib; Re(<s,r,conj(o)>) = a.re_o + b.im_o
  VarId a = tape.sub(tape.mul(re_s, re_r), tape.mul(im_s, im_r));
  VarId b = tape.add(tape.mul(re_s, im_r), tape.mul(im_s, re_r));
  VarId logits = tape.matmul_nt(tape.concat_cols({a, b}), bound[ent_]);
  return cross_entropy(tape, logits, targets, label_smoothing);
}

// ---- neighbor GNN -----------------------------------------------------------

GnnModel::GnnModel(int n_entities, int n_relations, ModelConfig cfg,
                   std::mt19937_64& rng)
    : cfg_(cfg), n_entities_(n_entities), n_relations_(n_relations) {
  int d = cfg_.dim;
  ent_ = params_.add("ent", uniform_init(n_entities, d, rng));
  rel_ = params_.add("rel", uniform_init(2 * n_relations + 1, d, rng));
  for (int l = 0; l < cfg_.gnn_layers; ++l) {
    std::string p = "gnn.l" + std::to_string(l) + ".";
    layer_w_.push_back(params_.add(p + "w_fwd", xavier_init(d, d, rng)));
    layer_w_.push_back(params_.add(p + "w_inv", xavier_init(d, d, rng)));
    layer_w_.push_back(params_.add(p + "w_self", xavier_init(d, d, rng)));
  }
  index_.build({}, n_entities, n_relations);
}

void GnnModel::set_graph(const std::vector<Triple>& train_edges) {
  index_.build(train_edges, n_entities_, n_relations_);
}

VarId GnnModel::encode(Tape& tape, const BoundParams& bound, int layers) const {
  return gnn_stack(tape, bound[ent_], bound[rel_], bound, layer_w_, layers,
                   index_, n_entities_, cfg_.dim);
}

std::vector<double> GnnModel::score_candidates(const HyperFact& query) const {
  Tape tape;
  BoundParams bound = ad::bind(tape, params_);
  VarId enc = encode(tape, bound, cfg_.gnn_layers);
  VarId hs = tape.gather_rows(enc, {query.subject});
  VarId hr = tape.gather_rows(bound[rel_], {query.relation});
  VarId logits = tape.matmul_nt(tape.mul(hs, hr), enc);
  const Tensor& lv = tape.value(logits);
  return {lv.data.begin(), lv.data.end()};
}

VarId GnnModel::build_loss(Tape& tape, const BoundParams& bound,
                           const std::vector<HyperFact>& queries,
                           const std::vector<EntityId>& targets,
                           const std::vector<std::vector<EntityId>>&,
                           double label_smoothing, double) const {
  int batch = static_cast<int>(queries.size());
  std::vector<int> s_idx(batch), r_idx(batch);
  for (int i = 0; i < batch; ++i) {
    s_idx[i] = queries[i].subject;
    r_idx[i] = queries[i].relation;
  }
  VarId enc = encode(tape, bound, cfg_.gnn_layers);
  VarId hs = tape.gather_rows(enc, s_idx);
  VarId hr = tape.gather_rows(bound[rel_], r_idx);
  VarId logits = tape.matmul_nt(tape.mul(hs, hr), enc);
  return cross_entropy(tape, logits, targets, label_smoothing);
}

// ---- FormerGNN --------------------------------------------------------------

namespace {
// token roles: subject=0 relation=1 mask=2 qual-relation=3 qual-entity=4
// pad=5 topology=6 (decoder only)
enum Role { kRoleSubject = 0, kRoleRelation, kRoleMask, kRoleQualRel,
            kRoleQualEnt, kRolePad, kRoleTopology };
}  // namespace

FormerGnnModel::FormerGnnModel(int n_entities, int n_relations, ModelConfig cfg,
                               std::mt19937_64& rng)
    : cfg_(cfg), n_entities_(n_entities), n_relations_(n_relations) {
  if (cfg_.dim % cfg_.heads != 0)
    throw std::invalid_argument("head count must divide the dimension");
  int d = cfg_.dim;
  msk_row_ = n_entities;
  pad_row_ = n_entities + 1;
  ent_ = params_.add("ent", uniform_init(n_entities + 2, d, rng));
  rel_ = params_.add("rel", uniform_init(2 * n_relations + 1, d, rng));
  qi_roles_ = params_.add("qi_roles", uniform_init(6, d, rng));
  dec_roles_ = params_.add("dec_roles", uniform_init(7, d, rng));
  align_w_ = params_.add("align.w", xavier_init(d, d, rng));
  align_b_ = params_.add("align.b", Tensor(1, d));
  for (int l = 0; l < cfg_.gnn_layers; ++l) {
    std::string p = "ge.l" + std::to_string(l) + ".";
    gnn_w_.push_back(params_.add(p + "w_fwd", xavier_init(d, d, rng)));
    gnn_w_.push_back(params_.add(p + "w_inv", xavier_init(d, d, rng)));
    gnn_w_.push_back(params_.add(p + "w_self", xavier_init(d, d, rng)));
  }
  qi_ = make_transformer("qi", cfg_.qi_layers, rng);
  dec_ = make_transformer("dec", cfg_.dec_layers, rng);
  index_.build({}, n_entities, n_relations);
}

FormerGnnModel::TransformerIdx FormerGnnModel::make_transformer(
    const std::string& prefix, int n_layers, std::mt19937_64& rng) {
  TransformerIdx idx;
  int d = cfg_.dim;
  int dh = d / cfg_.heads;
  for (int l = 0; l < n_layers; ++l) {
    TransformerIdx::Layer layer;
    std::string p = prefix + ".l" + std::to_string(l) + ".";
    for (int h = 0; h < cfg_.heads; ++h) {
      std::string hp = p + "h" + std::to_string(h) + ".";
      layer.wq.push_back(params_.add(hp + "wq", xavier_init(d, dh, rng)));
      layer.wk.push_back(params_.add(hp + "wk", xavier_init(d, dh, rng)));
      layer.wv.push_back(params_.add(hp + "wv", xavier_init(d, dh, rng)));
    }
    layer.wo = params_.add(p + "wo", xavier_init(d, d, rng));
    layer.ffn_w1 = params_.add(p + "ffn.w1", xavier_init(d, 4 * d, rng));
    layer.ffn_b1 = params_.add(p + "ffn.b1", Tensor(1, 4 * d));
    layer.ffn_w2 = params_.add(p + "ffn.w2", xavier_init(4 * d, d, rng));
    layer.ffn_b2 = params_.add(p + "ffn.b2", Tensor(1, d));
    layer.ln1_g = params_.add(p + "ln1.g", ones_row(d));
    layer.ln1_b = params_.add(p + "ln1.b", Tensor(1, d));
    layer.ln2_g = params_.add(p + "ln2.g", ones_row(d));
    layer.ln2_b = params_.add(p + "ln2.b", Tensor(1, d));
    idx.layers.push_back(std::move(layer));
  }
  return idx;
}

void FormerGnnModel::set_graph(const std::vector<Triple>& train_edges) {
  index_.build(train_edges, n_entities_, n_relations_);
  gt_fallbacks = 0;
}

VarId FormerGnnModel::transformer_stack(Tape& tape, const BoundParams& bound,
                                        const TransformerIdx& idx, VarId tokens,
                                        const Tensor& key_mask) const {
  int dh = cfg_.dim / cfg_.heads;
  double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  VarId x = tokens;
  for (const auto& layer : idx.layers) {
    std::vector<VarId> heads;
    for (int h = 0; h < cfg_.heads; ++h) {
      VarId q = tape.matmul(x, bound[layer.wq[h]]);
      VarId k = tape.matmul(x, bound[layer.wk[h]]);
      VarId v = tape.matmul(x, bound[layer.wv[h]]);
      VarId scores = tape.scale(tape.matmul_nt(q, k), inv_sqrt_dh);
      scores = tape.add(scores, tape.input(key_mask));
      heads.push_back(tape.matmul(tape.softmax_rows(scores), v));
    }
    VarId attn = tape.matmul(tape.concat_cols(heads), bound[layer.wo]);
    x = tape.layer_norm_rows(tape.add(x, attn), bound[layer.ln1_g], bound[layer.ln1_b]);
    VarId hidden = tape.relu(
        tape.add_rowvec(tape.matmul(x, bound[layer.ffn_w1]), bound[layer.ffn_b1]));
    VarId ff = tape.add_rowvec(tape.matmul(hidden, bound[layer.ffn_w2]),
                               bound[layer.ffn_b2]);
    x = tape.layer_norm_rows(tape.add(x, ff), bound[layer.ln2_g], bound[layer.ln2_b]);
  }
  return x;
}

VarId FormerGnnModel::qualifier_integrate(Tape& tape, const BoundParams& bound,
                                          const HyperFact& query) const {
  int n = query.arity();
  if (n > cfg_.max_arity)
    throw std::invalid_argument("fact arity " + std::to_string(n) +
                                " exceeds configured maximum " +
                                std::to_string(cfg_.max_arity));
  // canonical qualifier order makes the token sequence, and therefore the
  // score, independent of the source qualifier order
  auto quals = query.canonical_qualifiers();
  int seq_len = 3 + 2 * cfg_.max_arity;

  std::vector<VarId> tokens;
  std::vector<int> roles;
  tokens.push_back(tape.gather_rows(bound[ent_], {query.subject}));
  roles.push_back(kRoleSubject);
  tokens.push_back(tape.gather_rows(bound[rel_], {query.relation}));
  roles.push_back(kRoleRelation);
  tokens.push_back(tape.gather_rows(bound[ent_], {msk_row_}));
  roles.push_back(kRoleMask);
  for (const auto& q : quals) {
    tokens.push_back(tape.gather_rows(bound[rel_], {q.relation}));
    roles.push_back(kRoleQualRel);
    tokens.push_back(tape.gather_rows(bound[ent_], {q.entity}));
    roles.push_back(kRoleQualEnt);
  }
  if (int pad = seq_len - static_cast<int>(tokens.size()); pad > 0) {
    std::vector<int> pad_rows(pad, pad_row_);
    tokens.push_back(tape.gather_rows(bound[ent_], pad_rows));
    roles.insert(roles.end(), pad, kRolePad);
  }
  VarId seq = tape.add(tape.concat_rows(tokens),
                       tape.gather_rows(bound[qi_roles_], roles));

  Tensor mask(seq_len, seq_len);
  for (int col = 3 + 2 * n; col < seq_len; ++col)
    for (int row = 0; row < seq_len; ++row) mask.at(row, col) = kMaskedScore;
  return transformer_stack(tape, bound, qi_, seq, mask);
}

VarId FormerGnnModel::encode_graph(Tape& tape, const BoundParams& bound) const {
  VarId base = tape.gather_rows(bound[ent_], iota_rows(n_entities_));
  return gnn_stack(tape, base, bound[rel_], bound, gnn_w_, cfg_.gnn_layers,
                   index_, n_entities_, cfg_.dim);
}

VarId FormerGnnModel::forward(Tape& tape, const BoundParams& bound,
                              const HyperFact& query, VarId encoded_entities,
                              VarId entity_rows) const {
  if (encoded_entities < 0) encoded_entities = encode_graph(tape, bound);
  if (entity_rows < 0)
    entity_rows = tape.gather_rows(bound[ent_], iota_rows(n_entities_));
  VarId qi_out = qualifier_integrate(tape, bound, query);
  int seq_len = tape.value(qi_out).rows;

  VarId gt_row;
  if (index_.node_degree.empty() || index_.node_degree[query.subject] > 0) {
    gt_row = tape.gather_rows(encoded_entities, {query.subject});
  } else {
    gt_row = tape.gather_rows(bound[ent_], {query.subject});
    ++gt_fallbacks;
  }
  VarId h_gt = tape.add_rowvec(tape.matmul(gt_row, bound[align_w_]), bound[align_b_]);

  VarId dec_in = tape.concat_rows({qi_out, h_gt});
  std::vector<int> roles(seq_len + 1, kRolePad);
  roles[0] = kRoleSubject;
  roles[1] = kRoleRelation;
  roles[2] = kRoleMask;
  int n = query.arity();
  for (int i = 0; i < n; ++i) {
    roles[3 + 2 * i] = kRoleQualRel;
    roles[4 + 2 * i] = kRoleQualEnt;
  }
  roles[seq_len] = kRoleTopology;
  dec_in = tape.add(dec_in, tape.gather_rows(bound[dec_roles_], roles));

  Tensor mask(seq_len + 1, seq_len + 1);
  for (int col = 3 + 2 * n; col < seq_len; ++col)
    for (int row = 0; row < seq_len + 1; ++row) mask.at(row, col) = kMaskedScore;
  VarId dec_out = transformer_stack(tape, bound, dec_, dec_in, mask);
  VarId msk = tape.gather_rows(dec_out, {2});
  return tape.matmul_nt(msk, entity_rows);
}

std::vector<double> FormerGnnModel::score_candidates(const HyperFact& query) const {
  Tape tape;
  BoundParams bound = ad::bind(tape, params_);
  VarId logits = forward(tape, bound, query, -1);
  const Tensor& lv = tape.value(logits);
  return {lv.data.begin(), lv.data.end()};
}

VarId FormerGnnModel::build_loss(Tape& tape, const BoundParams& bound,
                                 const std::vector<HyperFact>& queries,
                                 const std::vector<EntityId>& targets,
                                 const std::vector<std::vector<EntityId>>&,
                                 double label_smoothing, double) const {
  VarId encoded = encode_graph(tape, bound);
  VarId entity_rows = tape.gather_rows(bound[ent_], iota_rows(n_entities_));
  std::vector<VarId> rows;
  rows.reserve(queries.size());
  for (const auto& q : queries)
    rows.push_back(forward(tape, bound, q, encoded, entity_rows));
  VarId logits = tape.concat_rows(rows);
  return cross_entropy(tape, logits, targets, label_smoothing);
}

std::unique_ptr<Model> make_model(ModelKind kind, int n_entities, int n_relations,
                                  const ModelConfig& config, std::mt19937_64& rng) {
  switch (kind) {
    case ModelKind::transh:
      return std::make_unique<TransHModel>(n_entities, n_relations, config, rng);
    case ModelKind::complex_:
      return std::make_unique<ComplExModel>(n_entities, n_relations, config, rng);
    case ModelKind::gnn:
      return std::make_unique<GnnModel>(n_entities, n_relations, config, rng);
    default:
      return std::make_unique<FormerGnnModel>(n_entities, n_relations, config, rng);
  }
}

}  // namespace hkg::models
