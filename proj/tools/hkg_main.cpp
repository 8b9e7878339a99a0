#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hkg/checkpoint.hpp"
#include "hkg/decompose.hpp"
#include "hkg/evaluation.hpp"
#include "hkg/ingest.hpp"
#include "hkg/models.hpp"
#include "hkg/topology.hpp"
#include "hkg/training.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 2 usage, 3 invalid config, 4 data error
constexpr int kExitConfig = 3;
constexpr int kExitData = 4;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read input file: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

class ManifestWriter {
 public:
  ManifestWriter(int argc, char** argv) : start_(std::chrono::steady_clock::now()) {
    for (int i = 0; i < argc; ++i) manifest_["command_line"].push_back(argv[i]);
    manifest_["version"] = kVersion;
    manifest_["started_at"] = timestamp_utc();
  }
  void add_input(const std::string& path) {
    manifest_["inputs"][path] = file_digest(path);
  }
  void set_config(nlohmann::json config) { manifest_["config"] = std::move(config); }
  void set_seed(std::uint64_t seed) { manifest_["seed"] = seed; }
  void write(const std::string& path) {
    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start_).count();
    manifest_["elapsed_seconds"] = seconds;
    write_text_file(path, manifest_.dump(2) + "\n");
  }

 private:
  nlohmann::json manifest_;
  std::chrono::steady_clock::time_point start_;
};

hkg::FileFormat parse_format(const std::string& name) {
  if (name == "tsv") return hkg::FileFormat::tsv;
  if (name == "json") return hkg::FileFormat::json;
  throw std::invalid_argument("unknown format: " + name);
}

hkg::HyperGraph load_graph(const std::string& train, const std::string& valid,
                           const std::string& test, const std::string& format,
                           ManifestWriter& manifest) {
  hkg::FileFormat fmt = parse_format(format);
  manifest.add_input(train);
  manifest.add_input(valid);
  manifest.add_input(test);
  return hkg::load_dataset(train, valid, test, fmt);
}

// ---- subcommand payloads ----------------------------------------------------

struct StatsArgs {
  std::string train, valid, test, format = "tsv", expect, out;
};

int run_stats(const StatsArgs& a, ManifestWriter& manifest) {
  hkg::HyperGraph g = load_graph(a.train, a.valid, a.test, a.format, manifest);
  hkg::DatasetStats stats = hkg::compute_stats(g);
  std::cout << hkg::stats_to_table(stats);
  if (!a.out.empty()) {
    write_text_file(a.out, hkg::stats_to_json(stats) + "\n");
    manifest.write(a.out + ".manifest.json");
  } else {
    std::cout << hkg::stats_to_json(stats) << "\n";
  }
  if (!a.expect.empty()) {
    manifest.add_input(a.expect);
    std::string diff = hkg::diff_against_expected(stats, a.expect);
    if (!diff.empty()) {
      std::cerr << "error: data: expectation mismatch\n" << diff;
      return kExitData;
    }
    std::cout << "expectations matched: " << a.expect << "\n";
  }
  return 0;
}

struct DecomposeArgs {
  std::string method, in_dir, out_dir, format = "tsv";
};

int run_decompose(const DecomposeArgs& a, ManifestWriter& manifest) {
  hkg::DecomposeMethod method = hkg::method_from_name(a.method);
  std::string ext = a.format == "json" ? ".json" : ".tsv";
  hkg::HyperGraph g = load_graph(a.in_dir + "/train" + ext, a.in_dir + "/valid" + ext,
                                 a.in_dir + "/test" + ext, a.format, manifest);
  hkg::DecomposedGraph dg = hkg::decompose_graph(g, method);
  hkg::export_decomposed(dg, a.out_dir);
  for (hkg::Split s : {hkg::Split::train, hkg::Split::valid, hkg::Split::test})
    std::cout << hkg::split_name(s) << ": " << dg.split(s).size() << " triples, "
              << dg.duplicates_removed(s) << " duplicates removed\n";
  manifest.write(a.out_dir + "/manifest.json");
  return 0;
}

struct CurvatureArgs {
  std::string in, out, distribution;
  int threads = 1;
};

int run_curvature(const CurvatureArgs& a, ManifestWriter& manifest) {
  if (a.threads < 1) throw std::invalid_argument("--threads must be >= 1");
  manifest.add_input(a.in);
  hkg::HyperGraph g;
  hkg::load_split(a.in, hkg::FileFormat::tsv, hkg::Split::train, g);
  std::vector<hkg::Triple> triples;
  for (const auto& f : g.train) {
    if (f.arity() != 0)
      throw DataError("curvature input must be plain triples: " + a.in);
    triples.push_back(f.main_triple());
  }
  hkg::topo::SimpleGraph graph = hkg::topo::SimpleGraph::from_triples(triples);
  hkg::topo::CurvatureReport report = hkg::topo::curvature_report(graph, a.threads);
  write_text_file(a.out, hkg::topo::report_to_csv(report));
  if (!a.distribution.empty())
    write_text_file(a.distribution, hkg::topo::distribution_to_csv(report));
  std::cout << "edges: " << report.per_edge.size()
            << " oversquashing_proportion: " << report.oversquashing_proportion
            << "\n";
  manifest.write(a.out + ".manifest.json");
  return 0;
}

struct TrainArgs {
  std::string model, decompose, config, out;
  std::string train, valid, test, format = "tsv";
};

int run_train(const TrainArgs& a, ManifestWriter& manifest) {
  hkg::models::ModelKind kind = hkg::models::kind_from_name(a.model);
  std::optional<hkg::DecomposeMethod> method;
  if (!a.decompose.empty()) method = hkg::method_from_name(a.decompose);

  hkg::train::TrainConfig cfg;
  if (!a.config.empty()) {
    cfg = hkg::train::config_from_json(read_text_file(a.config));
    manifest.add_input(a.config);
  }
  manifest.set_config(nlohmann::json::parse(hkg::train::config_to_json(cfg)));
  manifest.set_seed(cfg.seed);

  hkg::HyperGraph g = load_graph(a.train, a.valid, a.test, a.format, manifest);
  hkg::train::Prepared data = hkg::train::prepare_data(g, kind, method);

  std::mt19937_64 rng(cfg.seed);
  auto model = hkg::models::make_model(kind, data.n_entities, data.n_relations,
                                       cfg.model, rng);
  hkg::train::TrainResult result = hkg::train::train(*model, data, cfg);

  hkg::ckpt::Checkpoint c;
  c.kind = kind;
  c.method = method;
  c.config = cfg.model;
  c.n_entities = data.n_entities;
  c.n_relations = data.n_relations;
  c.entity_hash = data.entity_hash;
  c.relation_hash = data.relation_hash;
  c.seed = cfg.seed;
  c.params = model->params();
  hkg::ckpt::save_checkpoint(c, a.out);
  write_text_file(a.out + ".trace.csv", hkg::train::trace_to_csv(result.trace));
  manifest.write(a.out + ".manifest.json");

  std::cout << "trained " << a.model << " for " << result.trace.size() << " epochs";
  if (!result.trace.empty()) std::cout << ", final loss " << result.trace.back().loss;
  if (result.best_valid_mrr >= 0.0)
    std::cout << ", best valid mrr " << result.best_valid_mrr << " at epoch "
              << result.best_epoch;
  std::cout << "\ncheckpoint: " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string ckpt, out;
  std::string train, valid, test, format = "tsv";
  std::string split = "test";
};

int run_eval(const EvalArgs& a, ManifestWriter& manifest) {
  manifest.add_input(a.ckpt);
  hkg::ckpt::Checkpoint c = hkg::ckpt::load_checkpoint(a.ckpt);
  hkg::HyperGraph g = load_graph(a.train, a.valid, a.test, a.format, manifest);
  hkg::train::Prepared data = hkg::train::prepare_data(g, c.kind, c.method);
  if (data.entity_hash != c.entity_hash || data.relation_hash != c.relation_hash) {
    std::ostringstream msg;
    msg << "vocabulary mismatch between checkpoint and data: entities "
        << std::hex << c.entity_hash << " vs " << data.entity_hash
        << ", relations " << c.relation_hash << " vs " << data.relation_hash;
    throw DataError(msg.str());
  }
  manifest.set_seed(c.seed);

  auto model = hkg::ckpt::restore_model(c);
  model->set_graph(data.train_edges);
  const std::vector<hkg::eval::RankQuery>* queries;
  if (a.split == "test") queries = &data.test_rank;
  else if (a.split == "valid") queries = &data.valid_rank;
  else if (a.split == "train") queries = &data.train_rank;
  else throw std::invalid_argument("unknown split: " + a.split);

  hkg::eval::MetricsReport report = hkg::eval::evaluate(*model, *queries, data.filter);
  write_text_file(a.out, report.to_json() + "\n");
  manifest.write(a.out + ".manifest.json");
  std::cout << "split " << a.split << ": mrr " << report.overall.mrr << " hits@1 "
            << report.overall.hits1 << " hits@10 " << report.overall.hits10
            << " over " << report.overall.n_queries << " queries\n"
            << "report: " << a.out << "\n";
  return 0;
}

void add_dataset_options(CLI::App* cmd, std::string& train, std::string& valid,
                         std::string& test, std::string& format) {
  cmd->add_option("--train", train, "training split file")->required();
  cmd->add_option("--valid", valid, "validation split file")->required();
  cmd->add_option("--test", test, "test split file")->required();
  cmd->add_option("--format", format, "input format: tsv|json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyper-relational knowledge graph toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
  add_dataset_options(stats_cmd, stats.train, stats.valid, stats.test, stats.format);
  stats_cmd->add_option("--expect", stats.expect, "expected counts (json)");
  stats_cmd->add_option("--out", stats.out, "stats document output path");

  DecomposeArgs dec;
  auto* dec_cmd = app.add_subcommand("decompose", "decompose facts into triples");
  dec_cmd->add_option("--method", dec.method, "prune|direct|hyper|reify")->required();
  dec_cmd->add_option("--in", dec.in_dir, "dataset directory")->required();
  dec_cmd->add_option("--out", dec.out_dir, "output directory")->required();
  dec_cmd->add_option("--format", dec.format, "input format: tsv|json");

  CurvatureArgs curv;
  auto* curv_cmd = app.add_subcommand("curvature", "balanced Forman curvature report");
  curv_cmd->add_option("--in", curv.in, "triple file (tsv)")->required();
  curv_cmd->add_option("--out", curv.out, "report csv path")->required();
  curv_cmd->add_option("--threads", curv.threads, "worker threads");
  curv_cmd->add_option("--distribution", curv.distribution,
                       "also emit sorted (rank, ric) csv");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--model", tr.model, "transh|complex|gnn|formergnn")->required();
  train_cmd->add_option("--decompose", tr.decompose,
                        "decomposition for KGE kinds: prune|direct|hyper|reify");
  train_cmd->add_option("--config", tr.config, "training config (json)");
  train_cmd->add_option("--out", tr.out, "checkpoint output path")->required();
  add_dataset_options(train_cmd, tr.train, tr.valid, tr.test, tr.format);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "filtered link-prediction metrics");
  eval_cmd->add_option("--ckpt", ev.ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--out", ev.out, "metrics report path")->required();
  eval_cmd->add_option("--split", ev.split, "train|valid|test (default test)");
  add_dataset_options(eval_cmd, ev.train, ev.valid, ev.test, ev.format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ManifestWriter manifest(argc, argv);
  try {
    if (*stats_cmd) return run_stats(stats, manifest);
    if (*dec_cmd) return run_decompose(dec, manifest);
    if (*curv_cmd) return run_curvature(curv, manifest);
    if (*train_cmd) return run_train(tr, manifest);
    return run_eval(ev, manifest);
  } catch (const hkg::ParseError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  }
}
