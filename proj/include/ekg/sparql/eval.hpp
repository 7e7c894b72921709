#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ekg/rdf/graph.hpp"
#include "ekg/sparql/query.hpp"

namespace ekg::sparql {

// Variable name -> bound term.
using Solution = std::map<std::string, rdf::Term>;

// Ranks for domain categories the data encodes as IRIs or strings (letter
// grades, score levels). Two terms ranked on the same scale compare by rank;
// everything else falls back to the per-datatype order.
class OrdinalTable {
 public:
  struct Rank {
    std::string scale;
    int rank;
  };

  // Assigns ranks 0, 1, 2, ... to `ascending` on `scale`. Re-adding a term
  // replaces its rank.
  void add_scale(const std::string& scale, const std::vector<rdf::Term>& ascending);
  std::optional<Rank> rank(const rdf::Term& t) const;
  bool empty() const noexcept { return ranks_.empty(); }

  // Grades F < D < C < B < A (as strings and as IRIs under `ns`) and
  // Low-Level < Middle-Level < High-Level (same two forms).
  static OrdinalTable defaults(const std::string& ns = rdf::kDefaultNamespace);

 private:
  std::map<rdf::Term, Rank> ranks_;
};

// Evaluates `lhs op rhs`. Integers compare numerically, booleans false < true,
// strings lexicographically, same-scale ordinals by rank. = and != also
// accept any two IRIs and IRI-vs-literal pairs (never equal).
// Throws Error(Type) for other mixed pairs.
bool compare_terms(const rdf::Term& lhs, CompareOp op, const rdf::Term& rhs,
                   const OrdinalTable& ordinals);

// All solutions of the pattern, sorted by their values in variable-name
// order. An empty pattern yields one empty solution. `graph` should be
// frozen so the snapshot is stable.
std::vector<Solution> eval_bgp(const rdf::Graph& graph, const BasicGraphPattern& bgp);

bool eval_filter_expr(const Solution& solution, const FilterExpr& expr,
                      const OrdinalTable& ordinals);

// Keeps the solutions on which `expr` holds. Throws Error(UnboundVariable)
// if a referenced variable is missing, Error(Type) on incomparable operands.
std::vector<Solution> eval_filter(std::vector<Solution> solutions, const FilterExpr& expr,
                                  const OrdinalTable& ordinals);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<rdf::Term>> rows;
};

// Solutions of WHERE after every FILTER.
std::vector<Solution> eval_where(const rdf::Graph& graph, const Query& query,
                                 const OrdinalTable& ordinals);

// WHERE -> FILTER -> ORDER BY -> projection -> DISTINCT -> LIMIT.
ResultTable eval_select(const rdf::Graph& graph, const Query& query,
                        const OrdinalTable& ordinals);

// Instantiates the template per solution; instantiations that would not be
// valid triples (literal subject, non-IRI predicate) are skipped. The result
// carries the graph's and the query's prefixes and is frozen.
rdf::Graph eval_construct(const rdf::Graph& graph, const Query& query,
                          const OrdinalTable& ordinals);

bool eval_ask(const rdf::Graph& graph, const Query& query, const OrdinalTable& ordinals);

// Fixed-width text table followed by a row count line.
std::string format_table(const ResultTable& table, const rdf::Graph::PrefixMap& prefixes);

// SPARQL 1.1 query results JSON: {"head":{"vars":[..]},"results":{"bindings":[..]}},
// each binding {"type":"uri"|"literal","value":..,"datatype"?:..}.
std::string to_json(const ResultTable& table);
std::string ask_to_json(bool answer);

}  // namespace ekg::sparql
