#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "hkg/checkpoint.hpp"

using namespace hkg;
using namespace hkg::ckpt;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.kind = models::ModelKind::gnn;
  c.method = DecomposeMethod::hyper;
  c.config.dim = 4;
  c.config.gnn_layers = 1;
  c.config.heads = 2;
  c.n_entities = 5;
  c.n_relations = 2;
  c.entity_hash = 0xdeadbeefcafef00dull;
  c.relation_hash = 0x0123456789abcdefull;
  c.seed = 99;
  std::mt19937_64 rng(3);
  auto model = models::make_model(c.kind, c.n_entities, c.n_relations, c.config, rng);
  c.params = model->params();
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact") {
  Checkpoint c = sample_checkpoint();
  // include values that expose any lossy serialization
  c.params.values[0].data[0] = 0.1;
  c.params.values[0].data[1] = -0.0;
  c.params.values[0].data[2] = 1e-308;
  std::string path = temp_path("hkg_ckpt_roundtrip.bin");
  save_checkpoint(c, path);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.kind == c.kind);
  CHECK(back.method == c.method);
  CHECK(back.config.dim == c.config.dim);
  CHECK(back.config.max_arity == c.config.max_arity);
  CHECK(back.n_entities == c.n_entities);
  CHECK(back.entity_hash == c.entity_hash);
  CHECK(back.relation_hash == c.relation_hash);
  CHECK(back.seed == c.seed);
  REQUIRE(back.params.size() == c.params.size());
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    CHECK(back.params.names[i] == c.params.names[i]);
    CHECK(back.params.values[i].data == c.params.values[i].data);
    CHECK(std::signbit(back.params.values[0].data[1]));
  }
  std::remove(path.c_str());
}

TEST_CASE("checkpoint without a decomposition method") {
  Checkpoint c = sample_checkpoint();
  c.kind = models::ModelKind::formergnn;
  c.method.reset();
  std::mt19937_64 rng(4);
  c.params = models::make_model(c.kind, c.n_entities, c.n_relations, c.config, rng)
                 ->params();
  std::string path = temp_path("hkg_ckpt_nomethod.bin");
  save_checkpoint(c, path);
  CHECK_FALSE(load_checkpoint(path).method.has_value());
  std::remove(path.c_str());
}

TEST_CASE("restore_model rebuilds a scoring-identical model") {
  Checkpoint c = sample_checkpoint();
  std::mt19937_64 rng(3);
  auto original = models::make_model(c.kind, c.n_entities, c.n_relations, c.config, rng);
  original->set_graph({{0, 0, 1}, {1, 1, 2}});
  std::string path = temp_path("hkg_ckpt_restore.bin");
  save_checkpoint(c, path);
  auto restored = restore_model(load_checkpoint(path));
  restored->set_graph({{0, 0, 1}, {1, 1, 2}});
  HyperFact q{0, 1, 2, {}};
  CHECK(original->score_candidates(q) == restored->score_candidates(q));
  std::remove(path.c_str());
}

TEST_CASE("restore_model rejects mismatched tensors") {
  Checkpoint c = sample_checkpoint();
  c.params.values[0] = ad::Tensor(2, 2);  // wrong shape for "ent"
  CHECK_THROWS_WITH_AS(restore_model(c), doctest::Contains("ent"),
                       std::runtime_error);
}

TEST_CASE("corrupt files are rejected") {
  std::string path = temp_path("hkg_ckpt_bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "definitely not a checkpoint";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("not a checkpoint"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(temp_path("hkg_ckpt_missing.bin")),
                  std::runtime_error);
  std::remove(path.c_str());
}
