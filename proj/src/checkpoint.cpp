#include "hkg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace hkg::ckpt {

namespace {

constexpr char kMagic[8] = {'H', 'K', 'G', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  nlohmann::json header{
      {"kind", models::kind_name(c.kind)},
      {"method", c.method ? nlohmann::json(method_name(*c.method)) : nlohmann::json()},
      {"dim", c.config.dim},
      {"gnn_layers", c.config.gnn_layers},
      {"qi_layers", c.config.qi_layers},
      {"dec_layers", c.config.dec_layers},
      {"heads", c.config.heads},
      {"max_arity", c.config.max_arity},
      {"n_entities", c.n_entities},
      {"n_relations", c.n_relations},
      {"entity_hash", c.entity_hash},
      {"relation_hash", c.relation_hash},
      {"seed", c.seed},
  };
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < c.params.size(); ++i)
    tensors.push_back({{"name", c.params.names[i]},
                       {"rows", c.params.values[i].rows},
                       {"cols", c.params.values[i].cols}});
  header["tensors"] = tensors;
  std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u64(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& t : c.params.values) {
    // doubles stored little-endian; byte-swap on big-endian hosts
    for (double v : t.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      write_u64(out, bits);
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(header_text);

  Checkpoint c;
  c.kind = models::kind_from_name(header.at("kind").get<std::string>());
  if (!header.at("method").is_null())
    c.method = method_from_name(header.at("method").get<std::string>());
  c.config.dim = header.at("dim").get<int>();
  c.config.gnn_layers = header.at("gnn_layers").get<int>();
  c.config.qi_layers = header.at("qi_layers").get<int>();
  c.config.dec_layers = header.at("dec_layers").get<int>();
  c.config.heads = header.at("heads").get<int>();
  c.config.max_arity = header.at("max_arity").get<int>();
  c.n_entities = header.at("n_entities").get<int>();
  c.n_relations = header.at("n_relations").get<int>();
  c.entity_hash = header.at("entity_hash").get<std::uint64_t>();
  c.relation_hash = header.at("relation_hash").get<std::uint64_t>();
  c.seed = header.at("seed").get<std::uint64_t>();

  for (const auto& t : header.at("tensors")) {
    ad::Tensor value(t.at("rows").get<int>(), t.at("cols").get<int>());
    for (double& v : value.data) {
      std::uint64_t bits = read_u64(in);
      std::memcpy(&v, &bits, 8);
    }
    c.params.add(t.at("name").get<std::string>(), std::move(value));
  }
  if (!in) throw std::runtime_error("truncated checkpoint payload: " + path);
  return c;
}

std::unique_ptr<models::Model> restore_model(const Checkpoint& c) {
  std::mt19937_64 rng(c.seed);
  auto model = models::make_model(c.kind, c.n_entities, c.n_relations, c.config, rng);
  ad::ParamSet& live = model->params();
  if (live.size() != c.params.size())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (live.names[i] != c.params.names[i] ||
        live.values[i].rows != c.params.values[i].rows ||
        live.values[i].cols != c.params.values[i].cols)
      throw std::runtime_error("checkpoint tensor mismatch at " + c.params.names[i]);
    live.values[i] = c.params.values[i];
  }
  return model;
}

}  // namespace hkg::ckpt
