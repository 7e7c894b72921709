#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ekg/edu/curation.hpp"
#include "ekg/edu/graph_builder.hpp"
#include "ekg/edu/taxonomy.hpp"
#include "ekg/rdf/graph.hpp"
#include "ekg/sparql/query.hpp"

namespace ekg::edu {

// <Dataset>.<feature>.<test>(args)
struct RuleAtom {
  enum class Test { Is, Eq, Lt, Le, Gt, Ge, Between };

  std::string dataset;
  Feature feature = Feature::Topic;
  Test test = Test::Is;
  std::string category;  // Is
  std::int64_t low = 0;  // Eq..Ge, and the lower bound of Between
  std::int64_t high = 0; // upper bound of Between

  friend bool operator==(const RuleAtom&, const RuleAtom&) = default;
};

struct RuleExpr {
  enum class Kind { Atom, And, Or, Not };

  Kind kind = Kind::Atom;
  RuleAtom atom;                  // Atom
  std::vector<RuleExpr> children; // And/Or: two, Not: one

  static RuleExpr leaf(RuleAtom a);
  static RuleExpr conjunction(RuleExpr a, RuleExpr b);
  static RuleExpr disjunction(RuleExpr a, RuleExpr b);
  static RuleExpr negation(RuleExpr a);

  friend bool operator==(const RuleExpr&, const RuleExpr&) = default;
};

struct Rule {
  std::string name;
  RuleExpr condition;
  std::string tag_dataset;
  std::string concept_path;  // canonical taxonomy path
  bool value = true;

  friend bool operator==(const Rule&, const Rule&) = default;
};

// RULE <name>: IF <expr> THEN TAG[<dataset>, <concept.path>(True|False)]
//
// Keywords are case-insensitive. NOT binds tighter than AND, AND tighter than
// OR; `a NOT b` reads as `a AND NOT b`. Features are looked up with
// find_feature(); `is` takes a category value (checked against the feature's
// closed vocabulary), the other tests take integers and apply to counters.
// The concept path may use taxonomy aliases and is stored canonically.
//
// Throws ParseError, ParseError(UnknownFeature), ParseError(UnknownConcept).
Rule parse_rule(std::string_view text, const Taxonomy& taxonomy);
// Zero or more rules; names must be unique.
std::vector<Rule> parse_rules(std::string_view text, const Taxonomy& taxonomy);
std::vector<Rule> load_rules(const std::filesystem::path& path, const Taxonomy& taxonomy);

// Canonical text; parse_rule(print_rule(r), t) == r.
std::string print_rule(const Rule& rule);
std::string print_expr(const RuleExpr& expr);

bool eval_atom(const RuleAtom& atom, const CuratedRecord& record);
bool eval_expr(const RuleExpr& expr, const CuratedRecord& record);
inline bool eval_rule(const Rule& rule, const CuratedRecord& record) {
  return eval_expr(rule.condition, record);
}

// SELECT ?student over the mapped graph. Every feature the rule mentions is
// bound by a pattern on ?student; positive category tests at the top level of
// the condition become constant objects, the rest becomes one FILTER. Tests
// that hold (or fail) for every non-negative counter are folded away, so an
// always-true rule compiles to a query without FILTER.
//
// Throws Error(UncompilableExpr) when a mentioned feature has no mapping.
sparql::Query compile_rule(const Rule& rule, const MappingSchema& schema);

inline constexpr const char* kHasPattern = "hasPattern";
inline constexpr const char* kLacksPattern = "lacksPattern";

struct Tag {
  std::int64_t student = 0;
  std::string concept_path;
  bool value = true;

  auto operator<=>(const Tag&) const = default;
};

struct MiningResult {
  std::vector<Tag> tags;  // sorted, one per (student, concept)
  rdf::Graph graph;       // input graph plus one triple per tag, frozen
};

// Students satisfying `rule`, via the compiled query over `graph`.
std::vector<std::int64_t> select_students(const rdf::Graph& graph, const Rule& rule,
                                          const MappingSchema& schema);
// Students satisfying `rule`, straight from the records.
std::vector<std::int64_t> filter_students(const std::vector<CuratedRecord>& records,
                                          const Rule& rule);

// Runs every rule through the graph and checks the answer against the
// records; a disagreement throws Error(Internal). A True tag adds
// (student, ns:hasPattern, ns:<concept>), a False tag uses ns:lacksPattern.
// Rules giving one student opposite values for one concept throw
// Error(Config). Applying the same rules twice yields the same graph.
MiningResult apply_rules(const rdf::Graph& graph, const std::vector<CuratedRecord>& records,
                         const std::vector<Rule>& rules, const MappingSchema& schema);

struct ReportRow {
  std::string concept_path;
  bool value = true;
  std::size_t count = 0;
  std::vector<std::int64_t> students;  // ascending

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

// One row per (concept, value) that received tags, in concept order.
// Throws Error(UnknownConcept) for a tag outside the taxonomy.
std::vector<ReportRow> report(const std::vector<Tag>& tags, const Taxonomy& taxonomy);
std::string format_report(const std::vector<ReportRow>& rows);
std::string report_rows_to_json(const std::vector<ReportRow>& rows);

}  // namespace ekg::edu
