// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Criteria that target the published
// dataset files fall back to synthetic corpora when those files are absent
// (searched under ./data/<name>/ or $HKG_DATA_DIR/<name>/) and say so.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hkg/checkpoint.hpp"
#include "hkg/decompose.hpp"
#include "hkg/evaluation.hpp"
#include "hkg/ingest.hpp"
#include "hkg/models.hpp"
#include "hkg/topology.hpp"
#include "hkg/training.hpp"
#include "oracle_curvature.hpp"

using namespace hkg;

namespace {

int failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s — %s\n", idx, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::optional<std::string> dataset_dir(const std::string& name) {
  std::vector<std::string> roots{"data"};
  if (const char* env = std::getenv("HKG_DATA_DIR")) roots.insert(roots.begin(), env);
  for (const auto& root : roots) {
    std::string dir = root + "/" + name;
    if (std::filesystem::exists(dir + "/train.tsv")) return dir;
  }
  return std::nullopt;
}

HyperGraph random_hkg(int n_entities, int n_relations, int n_train, int n_valid,
                      int n_test, int max_arity, std::mt19937_64& rng) {
  HyperGraph g;
  for (int i = 0; i < n_entities; ++i) g.entities.intern("e" + std::to_string(i));
  for (int i = 0; i < n_relations; ++i) g.relations.intern("r" + std::to_string(i));
  g.entities.freeze_original();
  g.relations.freeze_original();
  std::uniform_int_distribution<int> ent(0, n_entities - 1);
  std::uniform_int_distribution<int> rel(0, n_relations - 1);
  std::uniform_int_distribution<int> arity(0, max_arity);
  std::set<std::uint64_t> seen;
  auto emit = [&](std::vector<HyperFact>& split, int count) {
    while (static_cast<int>(split.size()) < count) {
      HyperFact f;
      f.subject = ent(rng);
      f.object = ent(rng);
      if (f.subject == f.object) continue;
      f.relation = rel(rng);
      int n = arity(rng);
      for (int q = 0; q < n; ++q) f.qualifiers.push_back({rel(rng), ent(rng)});
      if (seen.insert(canonical_hash(f)).second) split.push_back(f);
    }
  };
  emit(g.train, n_train);
  emit(g.valid, n_valid);
  emit(g.test, n_test);
  return g;
}

// ---- criterion 1: dataset statistics ---------------------------------------

void criterion_1() {
  auto start = std::chrono::steady_clock::now();
  if (auto dir = dataset_dir("jf17k_clean")) {
    HyperGraph g = load_dataset(*dir + "/train.tsv", *dir + "/valid.tsv",
                                *dir + "/test.tsv", FileFormat::tsv);
    DatasetStats s = compute_stats(g);
    bool ok = s.n_entities == 25092 && s.n_relations == 320 &&
              s.n_train == 49120 && s.n_valid == 12280 && s.n_test == 17635 &&
              s.n_triple_facts == 54551 && s.n_hyper_facts == 24484 &&
              seconds_since(start) < 30.0;
    std::ostringstream d;
    d << "published-table cells on " << *dir << " ("
      << s.n_entities << " entities, " << s.n_relations << " relations, "
      << s.n_train << "/" << s.n_valid << "/" << s.n_test << ", "
      << s.n_triple_facts << " triples, " << s.n_hyper_facts << " hyper-facts, "
      << seconds_since(start) << " s)";
    report(1, ok, d.str());
    return;
  }
  // fallback: partition identity on generated corpora
  std::mt19937_64 rng(101);
  bool ok = true;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    std::uniform_int_distribution<int> size(10, 400);
    HyperGraph g = random_hkg(40, 8, size(rng), size(rng) / 4 + 1,
                              size(rng) / 4 + 1, 4, rng);
    DatasetStats s = compute_stats(g);
    ok = s.n_triple_facts + s.n_hyper_facts == s.total() &&
         s.total() == static_cast<std::int64_t>(g.total_facts());
  }
  report(1, ok,
         "partition identity #Tri + #HR = #Tra + #Val + #Tst on 20 generated "
         "corpora (synthetic fallback, dataset files not present)");
}

// ---- criterion 2: decomposition counting laws ------------------------------

void criterion_2() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> ent(0, 99), rel(0, 9), arity(0, 6);
  bool ok = true;
  for (int i = 0; i < 1000 && ok; ++i) {
    HyperGraph g;
    for (int e = 0; e < 100; ++e) g.entities.intern("e" + std::to_string(e));
    for (int r = 0; r < 10; ++r) g.relations.intern("r" + std::to_string(r));
    HyperFact f;
    f.subject = ent(rng);
    f.relation = rel(rng);
    f.object = ent(rng);
    int n = arity(rng);
    for (int q = 0; q < n; ++q) f.qualifiers.push_back({rel(rng), ent(rng)});

    auto prune = decompose_prune(f);
    auto direct = decompose_direct(f);
    auto hyper = decompose_hyper(f, g.relations);
    ok = prune.size() == 1 && direct.size() == static_cast<std::size_t>(1 + n) &&
         hyper.size() == static_cast<std::size_t>(1 + 2 * n);
    auto subset = [](const std::vector<Triple>& a, const std::vector<Triple>& b) {
      std::set<Triple> bs(b.begin(), b.end());
      for (const auto& t : a)
        if (!bs.count(t)) return false;
      return true;
    };
    ok = ok && subset(prune, direct) && subset(prune, hyper) && subset(direct, hyper);
  }
  report(2, ok,
         "|T_prune|=1, |T_direct|=1+n, |T_hyper|=1+2n and prune ⊆ direct ⊆ hyper "
         "on 1,000 random facts, exact");
}

// ---- criterion 3: curvature vs brute-force oracle --------------------------

void criterion_3() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(103);
  double max_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> size(2, 20);
    int n = size(rng);
    std::bernoulli_distribution edge(0.3);
    std::vector<Triple> triples;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (edge(rng)) triples.push_back({u, 0, v});
    topo::SimpleGraph g = topo::SimpleGraph::from_triples(triples);
    for (const auto& [u, v] : g.edges()) {
      topo::EdgeCurvature fast = topo::balanced_forman(g, u, v);
      topo::EdgeCurvature slow = testing::brute_force_curvature(g, u, v);
      max_err = std::max(max_err, std::abs(fast.ric - slow.ric));
    }
  }
  auto ring = [](int n) {
    std::vector<Triple> t;
    for (int i = 0; i < n; ++i) t.push_back({i, 0, (i + 1) % n});
    return topo::SimpleGraph::from_triples(t);
  };
  topo::SimpleGraph k3 = ring(3);
  topo::SimpleGraph c4 = ring(4);
  topo::SimpleGraph c5 = ring(5);
  topo::SimpleGraph isolated = topo::SimpleGraph::from_triples({{0, 0, 1}});
  double elapsed = seconds_since(start);
  bool ok = max_err < 1e-12 &&
            topo::balanced_forman(k3, 0, 1).ric == 1.5 &&
            topo::balanced_forman(c4, 0, 1).ric == 1.0 &&
            topo::balanced_forman(c5, 0, 1).ric == 0.0 &&
            topo::balanced_forman(isolated, 0, 1).ric == 0.0 && elapsed < 10.0;
  std::ostringstream d;
  d << "oracle match on 200 random graphs (max |Δric| = " << max_err
    << "), K3=1.5, C4=1.0, C5=0, isolated=0, " << elapsed << " s";
  report(3, ok, d.str());
}

// ---- criterion 4: curvature at scale + thread invariance -------------------

void criterion_4() {
  HyperGraph g;
  std::string source;
  if (auto dir = dataset_dir("jf17k_clean")) {
    g = load_dataset(*dir + "/train.tsv", *dir + "/valid.tsv", *dir + "/test.tsv",
                     FileFormat::tsv);
    source = "Cleaned JF17k train graph";
  } else {
    std::mt19937_64 rng(104);
    g = random_hkg(400, 12, 3000, 100, 100, 3, rng);
    source = "synthetic fallback (3,000 facts, dataset files not present)";
  }
  std::array<double, 3> proportions{};  // prune, direct, hyper
  bool ok = true;
  std::ostringstream d;
  for (auto [i, method] : {std::pair{0, DecomposeMethod::prune},
                           std::pair{1, DecomposeMethod::direct},
                           std::pair{2, DecomposeMethod::hyper}}) {
    DecomposedGraph dg = decompose_graph(g, method);
    topo::SimpleGraph simple = topo::SimpleGraph::from_triples(dg.split(Split::train));
    topo::CurvatureReport one = topo::curvature_report(simple, 1);
    if (method == DecomposeMethod::hyper) {
      topo::CurvatureReport eight = topo::curvature_report(simple, 8);
      ok = ok && topo::report_to_csv(one) == topo::report_to_csv(eight);
      ok = ok && one.per_edge.size() == simple.edges().size();
      d << "hyper graph: " << simple.edges().size() << " edges, threads 1 vs 8 "
        << (ok ? "byte-identical" : "DIFFER") << "; ";
    }
    proportions[i] = one.oversquashing_proportion;
  }
  d << "non-positive proportions (reported, not asserted): prune "
    << proportions[0] << ", direct " << proportions[1] << ", hyper "
    << proportions[2] << " on " << source;
  report(4, ok, d.str());
}

// ---- criterion 5: gradient checks ------------------------------------------

void criterion_5() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(105);
  models::ModelConfig cfg;
  cfg.dim = 8;
  cfg.gnn_layers = 1;
  cfg.qi_layers = 1;
  cfg.dec_layers = 1;
  cfg.heads = 2;
  cfg.max_arity = 3;

  std::vector<Triple> edges{{0, 0, 1}, {1, 1, 2}, {2, 0, 3}, {3, 1, 4}};
  std::vector<HyperFact> queries{{0, 0, 1, {{1, 3}}}, {2, 1, 4, {}}};
  std::vector<EntityId> targets{1, 4};
  std::vector<std::vector<EntityId>> negatives{{2, 3}, {0, 1}};

  double worst = 0.0;
  std::string worst_at;
  for (auto kind : {models::ModelKind::transh, models::ModelKind::complex_,
                    models::ModelKind::gnn, models::ModelKind::formergnn}) {
    auto model = models::make_model(kind, 6, 2, cfg, rng);
    model->set_graph(edges);
    auto build = [&](ad::Tape& tape, const ad::BoundParams& bound) {
      return model->build_loss(tape, bound, queries, targets, negatives, 0.1, 1.0);
    };
    ad::Tape tape;
    ad::BoundParams bound = ad::bind(tape, model->params());
    tape.backward(build(tape, bound));
    auto loss_fn = [&](const ad::ParamSet& p) {
      ad::Tape t;
      ad::BoundParams b = ad::bind(t, p);
      return t.value(build(t, b)).data[0];
    };
    std::uniform_int_distribution<int> pick(
        0, static_cast<int>(model->params().size()) - 1);
    for (int c = 0; c < 10; ++c) {  // 10 random coordinates per model loss
      int p = pick(rng);
      double err = ad::finite_difference_check(loss_fn, model->params(), p,
                                               tape.grad(bound[p]), 1, rng, 1e-5);
      if (err > worst) {
        worst = err;
        worst_at = std::string(models::kind_name(kind)) + "/" +
                   model->params().names[p];
      }
    }
  }
  double elapsed = seconds_since(start);
  std::ostringstream d;
  d << "TransH margin, ComplEx CE, GNN CE, FormerGNN CE vs central differences, "
       "10 random coordinates each; max relative error "
    << worst << " (" << worst_at << "), " << elapsed << " s";
  report(5, worst < 1e-4 && elapsed < 60.0, d.str());
}

// ---- criterion 6: memorization fixtures ------------------------------------

// 50 facts on 20 entities: relation k links entity i to entity i+k, so the
// whole graph embeds exactly as points on a line with translation offsets.
// A uniformly random multigraph is not memorizable by a translation model
// (the shared per-relation offset forces score(s,r,s) close to score(s,r,o)
// whenever the offsets stay short), so the fixture is structured instead.
HyperGraph chain_fixture() {
  HyperGraph g;
  for (int i = 0; i < 20; ++i) g.entities.intern("e" + std::to_string(i));
  for (int k = 1; k <= 5; ++k) g.relations.intern("r" + std::to_string(k));
  g.entities.freeze_original();
  g.relations.freeze_original();
  std::mt19937_64 rng(206);
  std::uniform_int_distribution<int> n_quals(0, 2);
  const int counts[6] = {0, 14, 12, 10, 8, 6};
  for (int k = 1; k <= 5; ++k)
    for (int i = 0; i < counts[k]; ++i) {
      HyperFact f{static_cast<EntityId>(i), static_cast<RelationId>(k - 1),
                  static_cast<EntityId>(i + k), {}};
      int n = n_quals(rng);
      for (int q = 0; q < n; ++q) {
        int m = 1 + static_cast<int>(rng() % 5);
        if (i + m <= 19)
          f.qualifiers.push_back({static_cast<RelationId>(m - 1),
                                  static_cast<EntityId>(i + m)});
      }
      g.train.push_back(f);
    }
  return g;
}

void criterion_6() {
  HyperGraph g = chain_fixture();
  bool all_ok = true;
  std::ostringstream d;
  for (auto kind : {models::ModelKind::transh, models::ModelKind::complex_,
                    models::ModelKind::gnn, models::ModelKind::formergnn}) {
    auto start = std::chrono::steady_clock::now();
    train::TrainConfig cfg;
    cfg.batch_size = 25;
    cfg.eval_every = 0;
    cfg.learning_rate = 1e-2;
    cfg.model.dim = 32;
    cfg.model.gnn_layers = 1;
    cfg.model.qi_layers = 2;
    cfg.model.dec_layers = 2;
    cfg.model.heads = 4;
    cfg.model.max_arity = 3;
    if (kind == models::ModelKind::transh) {
      cfg.loss = "margin";
      cfg.negatives = 19;
      cfg.margin = 0.05;
    } else if (kind == models::ModelKind::formergnn) {
      cfg.learning_rate = 3e-3;
    }
    auto method = kind == models::ModelKind::formergnn
                      ? std::optional<DecomposeMethod>{}
                      : std::optional<DecomposeMethod>{DecomposeMethod::direct};
    train::Prepared data = train::prepare_data(g, kind, method);
    std::mt19937_64 rng(106);
    auto model = models::make_model(kind, data.n_entities, data.n_relations,
                                    cfg.model, rng);
    // train in 50-epoch rounds until the train-split filtered MRR target,
    // a 500-epoch cap, or a 60-second cap
    double mrr = 0.0;
    int epochs = 0;
    while (epochs < 500 && seconds_since(start) < 55.0) {
      cfg.epochs = 50;
      cfg.seed = 106 + epochs;
      train::train(*model, data, cfg);
      epochs += 50;
      mrr = eval::evaluate(*model, data.train_rank, data.filter).overall.mrr;
      if (mrr >= 0.95) break;
    }
    double elapsed = seconds_since(start);
    bool ok = mrr >= 0.95 && epochs <= 500 && elapsed < 60.0;
    all_ok = all_ok && ok;
    d << models::kind_name(kind) << " mrr " << mrr << " @" << epochs
      << " epochs/" << static_cast<int>(elapsed) << " s; ";
  }
  report(6, all_ok,
         "train-split filtered MRR >= 0.95 on the 50-fact fixture: " + d.str());
}

// ---- criterion 7: qualifier permutation invariance -------------------------

void criterion_7() {
  std::mt19937_64 rng(107);
  models::ModelConfig cfg;
  cfg.dim = 16;
  cfg.gnn_layers = 1;
  cfg.qi_layers = 2;
  cfg.dec_layers = 2;
  cfg.heads = 2;
  cfg.max_arity = 4;
  models::FormerGnnModel model(30, 6, cfg, rng);
  std::vector<Triple> edges;
  std::uniform_int_distribution<int> ent(0, 29), rel(0, 5);
  for (int i = 0; i < 60; ++i)
    edges.push_back({ent(rng), rel(rng), ent(rng)});
  model.set_graph(edges);

  std::uniform_int_distribution<int> arity(2, 4);
  bool ok = true;
  int checked = 0;
  for (int f = 0; f < 100 && ok; ++f) {
    HyperFact fact{ent(rng), rel(rng), ent(rng), {}};
    int n = arity(rng);
    for (int q = 0; q < n; ++q) fact.qualifiers.push_back({rel(rng), ent(rng)});
    std::vector<double> base = model.score_candidates(fact);
    for (int i = 0; i + 1 < n && ok; ++i) {  // all adjacent transpositions
      HyperFact swapped = fact;
      std::swap(swapped.qualifiers[i], swapped.qualifiers[i + 1]);
      ok = model.score_candidates(swapped) == base;
      ++checked;
    }
  }
  std::ostringstream d;
  d << "D_V bit-identical under " << checked
    << " adjacent qualifier transpositions across 100 random facts";
  report(7, ok, d.str());
}

// ---- criterion 8: metric unit tests ----------------------------------------

void criterion_8() {
  bool ok = true;
  // ranks [1,2,4]
  double mrr = (1.0 + 0.5 + 0.25) / 3.0;
  ok = ok && std::abs(mrr - 0.5833333333333334) < 1e-9;
  std::vector<double> top{4.0, 3.0, 2.0, 1.0};
  ok = ok && eval::filtered_rank(top, 0, {}) == 1.0;                      // strict max
  std::vector<double> tied{2.0, 2.0, 1.0};
  ok = ok && eval::filtered_rank(tied, 0, {}) == 1.5;                     // average tie
  std::vector<double> filt{5.0, 4.5, 4.0, 3.0};
  ok = ok && eval::filtered_rank(filt, 3, {0, 2}) == 2.0;                 // 3 above, 2 filtered

  // random-model MRR vs harmonic expectation within 3 sigma over 2,000 queries
  const int n = 100, trials = 2000;
  double h_n = 0.0, m2 = 0.0;
  for (int r = 1; r <= n; ++r) {
    h_n += 1.0 / r;
    m2 += 1.0 / (static_cast<double>(r) * r);
  }
  double mean = h_n / n;
  double sigma = std::sqrt((m2 / n - mean * mean) / trials);
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> scores(n);
    for (double& s : scores) s = dist(rng);
    acc += 1.0 / eval::filtered_rank(scores, t % n, {});
  }
  acc /= trials;
  double dev = std::abs(acc - mean);
  ok = ok && dev < 3.0 * sigma;
  std::ostringstream d;
  d << "ranks [1,2,4] -> MRR 0.583333; tie and filter rules exact; random-model "
       "MRR " << acc << " vs H_n/n " << mean << " (|Δ| = " << dev << " < 3σ = "
    << 3.0 * sigma << ")";
  report(8, ok, d.str());
}

// ---- criterion 9: end-to-end train -> eval pipeline ------------------------

void criterion_9() {
  auto start = std::chrono::steady_clock::now();
  HyperGraph g;
  std::string source;
  if (auto dir = dataset_dir("fbauto")) {
    g = load_dataset(*dir + "/train.tsv", *dir + "/valid.tsv", *dir + "/test.tsv",
                     FileFormat::tsv);
    source = "FBAUTO";
  } else {
    std::mt19937_64 rng(109);
    g = random_hkg(150, 8, 600, 80, 80, 3, rng);
    source = "synthetic fallback (600/80/80 facts, dataset files not present)";
  }
  train::TrainConfig cfg;
  cfg.seed = 109;
  cfg.epochs = 40;
  cfg.batch_size = 256;
  cfg.eval_every = 10;
  cfg.model.dim = 32;
  cfg.model.gnn_layers = 1;
  cfg.model.qi_layers = 1;
  cfg.model.dec_layers = 1;
  cfg.model.heads = 2;
  cfg.model.max_arity = 16;

  train::Prepared data = train::prepare_data(g, models::ModelKind::formergnn,
                                             std::nullopt);
  std::mt19937_64 rng(cfg.seed);
  auto model = models::make_model(models::ModelKind::formergnn, data.n_entities,
                                  data.n_relations, cfg.model, rng);
  train::TrainResult result = train::train(*model, data, cfg);

  // checkpoint round trip, exactly as the cli pipeline does it
  ckpt::Checkpoint c;
  c.kind = models::ModelKind::formergnn;
  c.config = cfg.model;
  c.n_entities = data.n_entities;
  c.n_relations = data.n_relations;
  c.entity_hash = data.entity_hash;
  c.relation_hash = data.relation_hash;
  c.seed = cfg.seed;
  c.params = model->params();
  std::string path =
      (std::filesystem::temp_directory_path() / "hkg_acceptance_ckpt.bin").string();
  ckpt::save_checkpoint(c, path);
  auto restored = ckpt::restore_model(ckpt::load_checkpoint(path));
  restored->set_graph(data.train_edges);
  eval::MetricsReport metrics = eval::evaluate(*restored, data.test_rank, data.filter);
  std::remove(path.c_str());

  double elapsed = seconds_since(start);
  bool well_formed = metrics.overall.n_queries ==
                         static_cast<std::int64_t>(data.test_rank.size()) &&
                     metrics.overall.mrr > 0.0 && metrics.overall.mrr <= 1.0 &&
                     metrics.overall.hits1 <= metrics.overall.hits3 &&
                     metrics.overall.hits3 <= metrics.overall.hits10 &&
                     !metrics.to_json().empty();
  std::ostringstream d;
  d << "formergnn train->checkpoint->eval on " << source << " in " << elapsed
    << " s; achieved (reported, not asserted): test MRR " << metrics.overall.mrr
    << ", hits@1 " << metrics.overall.hits1 << ", hits@10 "
    << metrics.overall.hits10 << " over " << metrics.overall.n_queries
    << " queries; published full-scale table values are not reproduction targets";
  report(9, well_formed && elapsed < 1800.0, d.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (failures == 0) std::printf("all acceptance criteria passed\n");
  else std::printf("%d acceptance criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
