#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "hkg/core.hpp"

namespace hkg {

enum class FileFormat { tsv, json };

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetStats {
  std::int64_t n_entities = 0;
  std::int64_t n_relations = 0;
  int qual_min = 0;            // over all facts (0 for every published set)
  int qual_max = 0;
  int qual_min_hyper = 0;      // min over facts with at least one qualifier
  std::int64_t n_train = 0, n_valid = 0, n_test = 0;
  std::int64_t n_triple_facts = 0;   // arity 0
  std::int64_t n_hyper_facts = 0;    // arity >= 1
  std::int64_t n_duplicate_qualifier_facts = 0;  // facts with a repeated (qr,qe)

  std::int64_t total() const { return n_train + n_valid + n_test; }
};

// Parses one tab-separated statement line: s, r, o, then (qr, qe) pairs.
// Unknown labels are interned on sight. `line_no` is used in error messages.
HyperFact parse_statement_line(const std::string& line, HyperGraph& graph,
                               std::size_t line_no = 0);

// Parses one JSON record {"subject","relation","object","qualifiers":[[qr,qe],...]}.
HyperFact parse_json_statement(const std::string& record, HyperGraph& graph,
                               std::size_t line_no = 0);

// Reads one split file into `graph.split(split)`. Vocabulary ids are assigned
// in file order, so loading train, then valid, then test is deterministic.
void load_split(const std::string& path, FileFormat format, Split split,
                HyperGraph& graph);

HyperGraph load_dataset(const std::string& train_path, const std::string& valid_path,
                        const std::string& test_path, FileFormat format);

DatasetStats compute_stats(const HyperGraph& graph);

// Serializes stats as a JSON document / renders the human-readable table.
std::string stats_to_json(const DatasetStats& stats);
std::string stats_to_table(const DatasetStats& stats);

// Compares against expected counts loaded from a JSON file; returns an empty
// string when everything matches, otherwise a line-per-field diff report.
std::string diff_against_expected(const DatasetStats& stats,
                                  const std::string& expect_json_path);

// Canonical export: one JSON record per line.
void export_split_json(const HyperGraph& graph, Split split, std::ostream& out);

}  // namespace hkg
