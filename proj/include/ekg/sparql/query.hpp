#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ekg/rdf/graph.hpp"
#include "ekg/rdf/term.hpp"

namespace ekg::sparql {

struct Variable {
  std::string name;  // without the leading '?'
  auto operator<=>(const Variable&) const = default;
};

// A pattern or filter position: either a variable or a constant term.
using PatternTerm = std::variant<Variable, rdf::Term>;

inline bool is_variable(const PatternTerm& t) { return std::holds_alternative<Variable>(t); }

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;  // IRI or variable
  PatternTerm object;
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct BasicGraphPattern {
  std::vector<TriplePattern> patterns;

  // Variable names in order of first appearance.
  std::vector<std::string> variables() const;
  friend bool operator==(const BasicGraphPattern&, const BasicGraphPattern&) = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CompareOp op);

struct FilterExpr {
  enum class Kind { Constant, Compare, And, Or, Not };

  Kind kind = Kind::Constant;
  bool constant = true;                 // Constant
  CompareOp op = CompareOp::Eq;         // Compare
  PatternTerm lhs, rhs;                 // Compare
  std::vector<FilterExpr> children;     // And/Or: two, Not: one

  static FilterExpr value(bool v);
  static FilterExpr compare(PatternTerm lhs, CompareOp op, PatternTerm rhs);
  static FilterExpr conjunction(FilterExpr a, FilterExpr b);
  static FilterExpr disjunction(FilterExpr a, FilterExpr b);
  static FilterExpr negation(FilterExpr a);

  void collect_variables(std::set<std::string>& out) const;
  friend bool operator==(const FilterExpr&, const FilterExpr&) = default;
};

struct SelectForm {
  std::vector<Variable> projection;
  bool distinct = false;
  friend bool operator==(const SelectForm&, const SelectForm&) = default;
};

struct ConstructForm {
  BasicGraphPattern templ;
  friend bool operator==(const ConstructForm&, const ConstructForm&) = default;
};

struct AskForm {
  friend bool operator==(const AskForm&, const AskForm&) = default;
};

struct OrderBy {
  Variable variable;
  bool descending = false;
  friend bool operator==(const OrderBy&, const OrderBy&) = default;
};

struct Query {
  rdf::Graph::PrefixMap prefixes;
  std::variant<SelectForm, ConstructForm, AskForm> form;
  BasicGraphPattern where;
  std::vector<FilterExpr> filters;
  std::optional<OrderBy> order;
  std::optional<std::uint64_t> limit;

  friend bool operator==(const Query&, const Query&) = default;
};

// Parses the supported query subset (see docs/query-language.md). Keywords
// are case-insensitive; prefixed names resolve against the query's PREFIX
// declarations.
//
// Throws ParseError (position and expected tokens), ParseError(UnboundVariable)
// when a projected, filtered, ordered or template variable is not bound by
// the WHERE pattern, and ParseError(UnsupportedForm) for DESCRIBE.
Query parse_query(std::string_view text);

// Canonical query text; parse_query(print_query(q)) == q.
std::string print_query(const Query& q);
std::string print_filter(const FilterExpr& e, const rdf::Graph::PrefixMap& prefixes);

}  // namespace ekg::sparql
