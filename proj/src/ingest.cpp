#include "hkg/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace hkg {

namespace {

std::string at_line(std::size_t line_no) {
  return line_no ? " (line " + std::to_string(line_no) + ")" : "";
}

}  // namespace

HyperFact parse_statement_line(const std::string& line, HyperGraph& graph,
                               std::size_t line_no) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) tab = line.size();
    tokens.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (tokens.size() < 3)
    throw ParseError("statement has fewer than 3 tokens" + at_line(line_no));
  if (tokens.size() % 2 == 0)
    throw ParseError("dangling qualifier relation: even token count " +
                     std::to_string(tokens.size()) + at_line(line_no));
  for (const auto& t : tokens)
    if (t.empty()) throw ParseError("empty token" + at_line(line_no));

  HyperFact fact;
  fact.subject = graph.entities.intern(tokens[0]);
  fact.relation = graph.relations.intern(tokens[1]);
  fact.object = graph.entities.intern(tokens[2]);
  for (std::size_t i = 3; i + 1 < tokens.size(); i += 2) {
    fact.qualifiers.push_back({graph.relations.intern(tokens[i]),
                               graph.entities.intern(tokens[i + 1])});
  }
  return fact;
}

HyperFact parse_json_statement(const std::string& record, HyperGraph& graph,
                               std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(record);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON record: ") + e.what() + at_line(line_no));
  }
  for (const char* field : {"subject", "relation", "object", "qualifiers"}) {
    if (!j.contains(field))
      throw ParseError(std::string("missing field '") + field + "'" + at_line(line_no));
  }
  HyperFact fact;
  fact.subject = graph.entities.intern(j["subject"].get<std::string>());
  fact.relation = graph.relations.intern(j["relation"].get<std::string>());
  fact.object = graph.entities.intern(j["object"].get<std::string>());
  for (const auto& q : j["qualifiers"]) {
    if (!q.is_array() || q.size() != 2)
      throw ParseError("qualifier entry is not a 2-element list" + at_line(line_no));
    fact.qualifiers.push_back({graph.relations.intern(q[0].get<std::string>()),
                               graph.entities.intern(q[1].get<std::string>())});
  }
  return fact;
}

void load_split(const std::string& path, FileFormat format, Split split,
                HyperGraph& graph) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  auto& facts = graph.split(split);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    facts.push_back(format == FileFormat::tsv
                        ? parse_statement_line(line, graph, line_no)
                        : parse_json_statement(line, graph, line_no));
  }
}

HyperGraph load_dataset(const std::string& train_path, const std::string& valid_path,
                        const std::string& test_path, FileFormat format) {
  HyperGraph graph;
  load_split(train_path, format, Split::train, graph);
  load_split(valid_path, format, Split::valid, graph);
  load_split(test_path, format, Split::test, graph);
  graph.entities.freeze_original();
  graph.relations.freeze_original();
  return graph;
}

DatasetStats compute_stats(const HyperGraph& graph) {
  DatasetStats s;
  s.n_entities = graph.entities.size();
  s.n_relations = graph.relations.size();
  s.n_train = static_cast<std::int64_t>(graph.train.size());
  s.n_valid = static_cast<std::int64_t>(graph.valid.size());
  s.n_test = static_cast<std::int64_t>(graph.test.size());
  int qmin = std::numeric_limits<int>::max();
  int qmax = 0;
  int qmin_hyper = std::numeric_limits<int>::max();
  for (Split sp : {Split::train, Split::valid, Split::test}) {
    for (const auto& f : graph.split(sp)) {
      int n = f.arity();
      qmin = std::min(qmin, n);
      qmax = std::max(qmax, n);
      if (n == 0) {
        ++s.n_triple_facts;
      } else {
        ++s.n_hyper_facts;
        qmin_hyper = std::min(qmin_hyper, n);
        auto q = f.canonical_qualifiers();
        if (std::adjacent_find(q.begin(), q.end()) != q.end())
          ++s.n_duplicate_qualifier_facts;
      }
    }
  }
  if (graph.total_facts() == 0) { qmin = 0; }
  if (s.n_hyper_facts == 0) qmin_hyper = 0;
  s.qual_min = qmin;
  s.qual_max = qmax;
  s.qual_min_hyper = qmin_hyper;
  return s;
}

std::string stats_to_json(const DatasetStats& s) {
  nlohmann::json j{
      {"n_entities", s.n_entities},
      {"n_relations", s.n_relations},
      {"qual_min", s.qual_min},
      {"qual_max", s.qual_max},
      {"qual_min_hyper", s.qual_min_hyper},
      {"n_train", s.n_train},
      {"n_valid", s.n_valid},
      {"n_test", s.n_test},
      {"n_triple_facts", s.n_triple_facts},
      {"n_hyper_facts", s.n_hyper_facts},
      {"n_duplicate_qualifier_facts", s.n_duplicate_qualifier_facts},
  };
  return j.dump(2);
}

std::string stats_to_table(const DatasetStats& s) {
  std::ostringstream out;
  out << "|V|      " << s.n_entities << "\n"
      << "|R|      " << s.n_relations << "\n"
      << "#Qual.   " << s.qual_min << "-" << s.qual_max
      << " (min over hyper-facts: " << s.qual_min_hyper << ")\n"
      << "#Tra.    " << s.n_train << "\n"
      << "#Val.    " << s.n_valid << "\n"
      << "#Tst.    " << s.n_test << "\n"
      << "#Tri.    " << s.n_triple_facts << "\n"
      << "#HR      " << s.n_hyper_facts << "\n";
  if (s.n_duplicate_qualifier_facts > 0)
    out << "facts with duplicate qualifier pairs: " << s.n_duplicate_qualifier_facts << "\n";
  return out.str();
}

std::string diff_against_expected(const DatasetStats& s,
                                  const std::string& expect_json_path) {
  std::ifstream in(expect_json_path);
  if (!in) throw ParseError("cannot open " + expect_json_path);
  nlohmann::json expected = nlohmann::json::parse(in);
  nlohmann::json actual = nlohmann::json::parse(stats_to_json(s));
  std::ostringstream diff;
  for (auto& [key, want] : expected.items()) {
    if (!actual.contains(key)) {
      diff << key << ": unknown field in expectation file\n";
    } else if (actual[key] != want) {
      diff << key << ": expected " << want << ", got " << actual[key] << "\n";
    }
  }
  return diff.str();
}

void export_split_json(const HyperGraph& graph, Split split, std::ostream& out) {
  for (const auto& f : graph.split(split)) {
    nlohmann::json quals = nlohmann::json::array();
    for (const auto& q : f.qualifiers) {
      quals.push_back({graph.relations.label_of(q.relation),
                       graph.entities.label_of(q.entity)});
    }
    nlohmann::json j{{"subject", graph.entities.label_of(f.subject)},
                     {"relation", graph.relations.label_of(f.relation)},
                     {"object", graph.entities.label_of(f.object)},
                     {"qualifiers", quals}};
    out << j.dump() << "\n";
  }
}

}  // namespace hkg
