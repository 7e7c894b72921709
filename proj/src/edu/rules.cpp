#include "ekg/edu/rules.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ekg/error.hpp"
#include "ekg/sparql/eval.hpp"
#include "ekg/text/scanner.hpp"

namespace ekg::edu {

RuleExpr RuleExpr::leaf(RuleAtom a) {
  RuleExpr e;
  e.atom = std::move(a);
  return e;
}

RuleExpr RuleExpr::conjunction(RuleExpr a, RuleExpr b) {
  RuleExpr e;
  e.kind = Kind::And;
  e.children = {std::move(a), std::move(b)};
  return e;
}

RuleExpr RuleExpr::disjunction(RuleExpr a, RuleExpr b) {
  RuleExpr e;
  e.kind = Kind::Or;
  e.children = {std::move(a), std::move(b)};
  return e;
}

RuleExpr RuleExpr::negation(RuleExpr a) {
  RuleExpr e;
  e.kind = Kind::Not;
  e.children = {std::move(a)};
  return e;
}

namespace {

using Test = RuleAtom::Test;

struct TestName {
  Test test;
  const char* name;
};

constexpr TestName kTests[] = {{Test::Is, "is"}, {Test::Eq, "eq"}, {Test::Lt, "lt"}, {Test::Le, "le"},
                               {Test::Gt, "gt"}, {Test::Ge, "ge"}, {Test::Between, "between"}};

const char* test_name(Test t) {
  for (const auto& n : kTests) {
    if (n.test == t) return n.name;
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parser

class RuleParser {
 public:
  RuleParser(std::string_view text, const Taxonomy& taxonomy) : s_(text), taxonomy_(taxonomy) {}

  bool at_end() {
    s_.skip_space();
    return s_.eof();
  }

  void expect_end() {
    if (!at_end()) expected("end of input");
  }

  Rule rule() {
    Rule r;
    s_.skip_space();
    if (!s_.accept_keyword("RULE")) expected("'RULE'");
    r.name = ident("rule name");
    punct(":");
    s_.skip_space();
    if (!s_.accept_keyword("IF")) expected("'IF'");
    r.condition = disjunction();
    s_.skip_space();
    if (!s_.accept_keyword("THEN")) expected("'AND', 'OR', 'NOT' or 'THEN'");
    s_.skip_space();
    if (!s_.accept_keyword("TAG")) expected("'TAG'");
    punct("[");
    r.tag_dataset = ident("dataset name");
    punct(",");
    s_.skip_space();
    const SourcePos at = s_.pos();
    std::string path = ident("concept path");
    while (s_.peek() == '.') {
      s_.advance();
      path += "." + ident("concept path segment");
    }
    const Concept* c = taxonomy_.find(path);
    if (c == nullptr) throw ParseError(at, "unknown concept '" + path + "'", ErrorCode::UnknownConcept);
    r.concept_path = c->path;
    punct("(");
    s_.skip_space();
    if (s_.accept_keyword("True")) {
      r.value = true;
    } else if (s_.accept_keyword("False")) {
      r.value = false;
    } else {
      expected("'True' or 'False'");
    }
    punct(")");
    punct("]");
    return r;
  }

 private:
  RuleExpr disjunction() {
    RuleExpr e = conjunction();
    while (true) {
      s_.skip_space();
      if (!s_.accept_keyword("OR")) return e;
      e = RuleExpr::disjunction(std::move(e), conjunction());
    }
  }

  RuleExpr conjunction() {
    RuleExpr e = unary();
    while (true) {
      s_.skip_space();
      if (s_.accept_keyword("AND")) {
        e = RuleExpr::conjunction(std::move(e), unary());
      } else if (s_.accept_keyword("NOT")) {
        e = RuleExpr::conjunction(std::move(e), RuleExpr::negation(unary()));
      } else {
        return e;
      }
    }
  }

  RuleExpr unary() {
    s_.skip_space();
    if (s_.accept_keyword("NOT")) return RuleExpr::negation(unary());
    if (s_.accept("(")) {
      RuleExpr e = disjunction();
      punct(")");
      return e;
    }
    return RuleExpr::leaf(atom());
  }

  RuleAtom atom() {
    RuleAtom a;
    a.dataset = ident("'NOT', '(' or <dataset>.<feature>.<test>(...)");
    punct(".");
    s_.skip_space();
    const SourcePos feature_at = s_.pos();
    const std::string feature = ident("feature name");
    auto f = find_feature(feature);
    if (!f) throw ParseError(feature_at, "unknown feature '" + feature + "'", ErrorCode::UnknownFeature);
    a.feature = *f;
    const FeatureInfo& info = feature_info(*f);
    punct(".");
    s_.skip_space();
    const SourcePos test_at = s_.pos();
    const std::string test = ident("test name");
    bool found = false;
    for (const auto& n : kTests) {
      if (test == n.name) {
        a.test = n.test;
        found = true;
      }
    }
    if (!found) {
      s_.fail_at(test_at, "expected one of is, eq, lt, le, gt, ge, between, found '" + test + "'");
    }
    const bool wants_category = a.test == Test::Is;
    if (wants_category != (info.kind == FeatureKind::Category)) {
      s_.fail_at(test_at, "'" + test + "' does not apply to " +
                              (info.kind == FeatureKind::Category ? "category" : "integer") +
                              " feature '" + std::string(info.name) + "'");
    }
    punct("(");
    s_.skip_space();
    if (wants_category) {
      const SourcePos value_at = s_.pos();
      a.category = category_value();
      if (!info.vocabulary.empty() &&
          std::find(info.vocabulary.begin(), info.vocabulary.end(), a.category) ==
              info.vocabulary.end()) {
        std::string allowed;
        for (auto v : info.vocabulary) allowed += (allowed.empty() ? "" : ", ") + std::string(v);
        s_.fail_at(value_at, "'" + a.category + "' is not a value of " + std::string(info.name) +
                                 " (expected one of " + allowed + ")");
      }
    } else {
      a.low = integer();
      if (a.test == Test::Between) {
        punct(",");
        s_.skip_space();
        a.high = integer();
      }
    }
    punct(")");
    return a;
  }

  std::string category_value() {
    if (s_.peek() == '"') return text::read_string_literal(s_);
    std::string v;
    while (text::is_name_char(s_.peek())) v += s_.advance();
    if (v.empty()) expected("category value");
    return v;
  }

  std::int64_t integer() {
    const char c = s_.peek();
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+')) expected("integer");
    return text::read_integer(s_);
  }

  std::string ident(const char* what) {
    s_.skip_space();
    if (!text::is_name_start(s_.peek())) expected(what);
    std::string out;
    while (text::is_name_char(s_.peek())) out += s_.advance();
    return out;
  }

  void punct(std::string_view p) {
    s_.skip_space();
    if (!s_.accept(p)) expected("'" + std::string(p) + "'");
  }

  [[noreturn]] void expected(const std::string& what) {
    std::string found;
    if (s_.eof()) {
      found = "end of input";
    } else {
      auto rest = s_.rest();
      std::size_t n = 0;
      while (n < rest.size() && n < 12 && !std::isspace(static_cast<unsigned char>(rest[n]))) ++n;
      found = "'" + std::string(rest.substr(0, std::max<std::size_t>(n, 1))) + "'";
    }
    s_.fail("expected " + what + ", found " + found);
  }

  text::Scanner s_;
  const Taxonomy& taxonomy_;
};

// ---------------------------------------------------------------------------
// Printer

int precedence(const RuleExpr& e) {
  switch (e.kind) {
    case RuleExpr::Kind::Or: return 1;
    case RuleExpr::Kind::And: return 2;
    case RuleExpr::Kind::Not: return 3;
    case RuleExpr::Kind::Atom: return 4;
  }
  return 0;
}

bool bare_category(const std::string& v) {
  return !v.empty() && std::all_of(v.begin(), v.end(), text::is_name_char);
}

std::string quote(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string print_atom(const RuleAtom& a) {
  std::string out = a.dataset + "." + std::string(feature_info(a.feature).name) + "." + test_name(a.test) + "(";
  switch (a.test) {
    case Test::Is: out += bare_category(a.category) ? a.category : quote(a.category); break;
    case Test::Between: out += std::to_string(a.low) + ", " + std::to_string(a.high); break;
    default: out += std::to_string(a.low);
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// Compilation

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

// Truth of an integer test when it does not depend on the counter value,
// which curation guarantees to be non-negative.
std::optional<bool> constant_truth(const RuleAtom& a) {
  switch (a.test) {
    case Test::Is: return std::nullopt;
    case Test::Eq: return a.low < 0 ? std::optional(false) : std::nullopt;
    case Test::Lt: return a.low <= 0 ? std::optional(false) : std::nullopt;
    case Test::Le: return a.low < 0 ? std::optional(false) : std::nullopt;
    case Test::Gt: return a.low < 0 ? std::optional(true) : std::nullopt;
    case Test::Ge: return a.low <= 0 ? std::optional(true) : std::nullopt;
    case Test::Between:
      if (a.high < 0 || a.low > a.high) return false;
      if (a.low <= 0 && a.high == kMax) return true;
      return std::nullopt;
  }
  return std::nullopt;
}

struct Folded {
  std::optional<bool> constant;
  sparql::FilterExpr expr;
};

std::string var_name(Feature f) { return std::string(feature_info(f).name); }

Folded fold(const RuleExpr& e, const MappingSchema& schema) {
  using sparql::CompareOp;
  using sparql::FilterExpr;
  switch (e.kind) {
    case RuleExpr::Kind::Atom: {
      const RuleAtom& a = e.atom;
      if (auto c = constant_truth(a)) return {c, {}};
      const sparql::Variable v{var_name(a.feature)};
      auto cmp = [&](CompareOp op, std::int64_t n) {
        return FilterExpr::compare(v, op, rdf::Term::integer(n));
      };
      switch (a.test) {
        case Test::Is:
          return {std::nullopt, FilterExpr::compare(v, CompareOp::Eq, category_iri(schema.ns, a.category))};
        case Test::Eq: return {std::nullopt, cmp(CompareOp::Eq, a.low)};
        case Test::Lt: return {std::nullopt, cmp(CompareOp::Lt, a.low)};
        case Test::Le: return {std::nullopt, cmp(CompareOp::Le, a.low)};
        case Test::Gt: return {std::nullopt, cmp(CompareOp::Gt, a.low)};
        case Test::Ge: return {std::nullopt, cmp(CompareOp::Ge, a.low)};
        case Test::Between:
          return {std::nullopt,
                  FilterExpr::conjunction(cmp(CompareOp::Ge, a.low), cmp(CompareOp::Le, a.high))};
      }
      break;
    }
    case RuleExpr::Kind::Not: {
      Folded inner = fold(e.children[0], schema);
      if (inner.constant) return {!*inner.constant, {}};
      return {std::nullopt, FilterExpr::negation(std::move(inner.expr))};
    }
    case RuleExpr::Kind::And:
    case RuleExpr::Kind::Or: {
      const bool is_and = e.kind == RuleExpr::Kind::And;
      Folded l = fold(e.children[0], schema);
      Folded r = fold(e.children[1], schema);
      // The absorbing element decides; the neutral one drops out.
      for (const Folded* side : {&l, &r}) {
        if (side->constant && *side->constant != is_and) return {!is_and, {}};
      }
      if (l.constant) return r;
      if (r.constant) return l;
      return {std::nullopt, is_and ? FilterExpr::conjunction(std::move(l.expr), std::move(r.expr))
                                   : FilterExpr::disjunction(std::move(l.expr), std::move(r.expr))};
    }
  }
  throw Error(ErrorCode::Internal, "unhandled rule expression");
}

void collect_features(const RuleExpr& e, std::vector<Feature>& out) {
  if (e.kind == RuleExpr::Kind::Atom) {
    if (std::find(out.begin(), out.end(), e.atom.feature) == out.end()) out.push_back(e.atom.feature);
    return;
  }
  for (const auto& c : e.children) collect_features(c, out);
}

void top_conjuncts(const RuleExpr& e, std::vector<const RuleExpr*>& out) {
  if (e.kind == RuleExpr::Kind::And) {
    top_conjuncts(e.children[0], out);
    top_conjuncts(e.children[1], out);
  } else {
    out.push_back(&e);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Rule parse_rule(std::string_view text, const Taxonomy& taxonomy) {
  RuleParser p(text, taxonomy);
  Rule r = p.rule();
  p.expect_end();
  return r;
}

std::vector<Rule> parse_rules(std::string_view text, const Taxonomy& taxonomy) {
  RuleParser p(text, taxonomy);
  std::vector<Rule> rules;
  std::set<std::string> names;
  while (!p.at_end()) {
    Rule r = p.rule();
    if (!names.insert(r.name).second) {
      throw Error(ErrorCode::Parse, "rule '" + r.name + "' is defined twice");
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<Rule> load_rules(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str(), taxonomy);
}

std::string print_expr(const RuleExpr& e) {
  switch (e.kind) {
    case RuleExpr::Kind::Atom: return print_atom(e.atom);
    case RuleExpr::Kind::Not: {
      const RuleExpr& c = e.children[0];
      return "NOT " + (precedence(c) < precedence(e) ? "(" + print_expr(c) + ")" : print_expr(c));
    }
    case RuleExpr::Kind::And:
    case RuleExpr::Kind::Or: {
      const RuleExpr& l = e.children[0];
      const RuleExpr& r = e.children[1];
      // Left-associative: the right operand needs parentheses at equal precedence.
      std::string ls = precedence(l) < precedence(e) ? "(" + print_expr(l) + ")" : print_expr(l);
      std::string rs = precedence(r) <= precedence(e) ? "(" + print_expr(r) + ")" : print_expr(r);
      return ls + (e.kind == RuleExpr::Kind::And ? " AND " : " OR ") + rs;
    }
  }
  return {};
}

std::string print_rule(const Rule& r) {
  return "RULE " + r.name + ":\n  IF " + print_expr(r.condition) + "\n  THEN TAG[" + r.tag_dataset +
         ", " + r.concept_path + "(" + (r.value ? "True" : "False") + ")]\n";
}

bool eval_atom(const RuleAtom& a, const CuratedRecord& record) {
  const FeatureValue v = feature_value(record, a.feature);
  if (a.test == Test::Is) {
    const auto* s = std::get_if<std::string>(&v);
    return s != nullptr && *s == a.category;
  }
  const auto* n = std::get_if<std::int64_t>(&v);
  if (n == nullptr) return false;
  switch (a.test) {
    case Test::Eq: return *n == a.low;
    case Test::Lt: return *n < a.low;
    case Test::Le: return *n <= a.low;
    case Test::Gt: return *n > a.low;
    case Test::Ge: return *n >= a.low;
    case Test::Between: return a.low <= *n && *n <= a.high;
    case Test::Is: break;
  }
  return false;
}

bool eval_expr(const RuleExpr& e, const CuratedRecord& record) {
  switch (e.kind) {
    case RuleExpr::Kind::Atom: return eval_atom(e.atom, record);
    case RuleExpr::Kind::And: return eval_expr(e.children[0], record) && eval_expr(e.children[1], record);
    case RuleExpr::Kind::Or: return eval_expr(e.children[0], record) || eval_expr(e.children[1], record);
    case RuleExpr::Kind::Not: return !eval_expr(e.children[0], record);
  }
  return false;
}

sparql::Query compile_rule(const Rule& rule, const MappingSchema& schema) {
  std::vector<Feature> features;
  collect_features(rule.condition, features);
  for (Feature f : features) {
    if (schema.find(f) == nullptr) {
      throw Error(ErrorCode::UncompilableExpr, "rule '" + rule.name + "' uses feature '" + var_name(f) +
                                                   "', which the mapping schema does not map");
    }
  }

  // Positive category tests at the top level pin the object directly.
  std::vector<const RuleExpr*> conjuncts;
  top_conjuncts(rule.condition, conjuncts);
  std::vector<const RuleAtom*> pinned;
  std::optional<RuleExpr> rest;
  for (const RuleExpr* c : conjuncts) {
    if (c->kind == RuleExpr::Kind::Atom && c->atom.test == Test::Is) {
      pinned.push_back(&c->atom);
    } else {
      rest = rest ? RuleExpr::conjunction(std::move(*rest), *c) : *c;
    }
  }
  std::vector<Feature> filtered;
  if (rest) collect_features(*rest, filtered);

  sparql::Query q;
  q.prefixes = rdf::default_prefixes(schema.ns);
  const sparql::Variable student{"student"};
  q.form = sparql::SelectForm{{student}, false};
  for (Feature f : features) {
    const rdf::Term predicate = rdf::Term::iri(schema.find(f)->predicate);
    bool has_pin = false;
    for (const RuleAtom* a : pinned) {
      if (a->feature != f) continue;
      q.where.patterns.push_back({student, predicate, category_iri(schema.ns, a->category)});
      has_pin = true;
    }
    // Features that were folded away still bind, so the rule ranges over students.
    if (!has_pin || std::find(filtered.begin(), filtered.end(), f) != filtered.end()) {
      q.where.patterns.push_back({student, predicate, sparql::Variable{var_name(f)}});
    }
  }
  if (rest) {
    Folded folded = fold(*rest, schema);
    if (!folded.constant) {
      q.filters.push_back(std::move(folded.expr));
    } else if (!*folded.constant) {
      q.filters.push_back(sparql::FilterExpr::value(false));
    }
  }
  return q;
}

std::vector<std::int64_t> select_students(const rdf::Graph& graph, const Rule& rule,
                                          const MappingSchema& schema) {
  const sparql::Query q = compile_rule(rule, schema);
  const auto table = sparql::eval_select(graph, q, sparql::OrdinalTable{});
  std::vector<std::int64_t> out;
  for (const auto& row : table.rows) {
    auto id = student_index(schema.ns, row.at(0));
    if (!id) throw Error(ErrorCode::Internal, "non-student subject " + row.at(0).to_string());
    out.push_back(*id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::int64_t> filter_students(const std::vector<CuratedRecord>& records, const Rule& rule) {
  std::vector<std::int64_t> out;
  for (const auto& r : records) {
    if (eval_rule(rule, r)) out.push_back(r.student_index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MiningResult apply_rules(const rdf::Graph& graph, const std::vector<CuratedRecord>& records,
                         const std::vector<Rule>& rules, const MappingSchema& schema) {
  std::map<std::pair<std::int64_t, std::string>, std::pair<bool, const Rule*>> tagged;
  for (const Rule& rule : rules) {
    const auto via_graph = select_students(graph, rule, schema);
    const auto via_records = filter_students(records, rule);
    if (via_graph != via_records) {
      throw Error(ErrorCode::Internal, "rule '" + rule.name + "': graph query selects " +
                                           std::to_string(via_graph.size()) + " students, records give " +
                                           std::to_string(via_records.size()));
    }
    for (auto id : via_graph) {
      auto [it, inserted] = tagged.try_emplace({id, rule.concept_path}, rule.value, &rule);
      if (!inserted && it->second.first != rule.value) {
        throw Error(ErrorCode::Config, "rules '" + it->second.second->name + "' and '" + rule.name +
                                           "' tag Student" + std::to_string(id) + " with opposite values for " +
                                           rule.concept_path);
      }
    }
  }

  MiningResult result;
  result.graph = graph.thawed_copy();
  const rdf::Term has = rdf::Term::iri(schema.ns + kHasPattern);
  const rdf::Term lacks = rdf::Term::iri(schema.ns + kLacksPattern);
  for (const auto& [key, entry] : tagged) {
    result.tags.push_back({key.first, key.second, entry.first});
    result.graph.insert({student_iri(schema.ns, key.first), entry.first ? has : lacks,
                         rdf::Term::iri(schema.ns + key.second)});
  }
  result.graph.freeze();
  return result;
}

std::vector<ReportRow> report(const std::vector<Tag>& tags, const Taxonomy& taxonomy) {
  std::map<std::pair<std::size_t, bool>, ReportRow> rows;  // (concept index, !value)
  for (const Tag& t : tags) {
    const Concept& c = taxonomy.resolve(t.concept_path);
    const auto index = static_cast<std::size_t>(&c - taxonomy.concepts().data());
    ReportRow& row = rows[{index, !t.value}];
    row.concept_path = c.path;
    row.value = t.value;
    row.students.push_back(t.student);
  }
  std::vector<ReportRow> out;
  for (auto& [key, row] : rows) {
    std::sort(row.students.begin(), row.students.end());
    row.students.erase(std::unique(row.students.begin(), row.students.end()), row.students.end());
    row.count = row.students.size();
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::vector<std::array<std::string, 4>> cells = {{"concept", "value", "count", "students"}};
  for (const auto& r : rows) {
    std::string ids;
    for (auto id : r.students) ids += (ids.empty() ? "" : " ") + std::to_string(id);
    cells.push_back({r.concept_path, r.value ? "True" : "False", std::to_string(r.count), ids});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < 4; ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t i = 0; i < 4; ++i) {
      line += row[i];
      if (i + 1 < 4) line += std::string(width[i] - row[i].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  out << rows.size() << (rows.size() == 1 ? " pattern" : " patterns") << '\n';
  return out.str();
}

std::string report_rows_to_json(const std::vector<ReportRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json e;
    e["concept"] = r.concept_path;
    e["value"] = r.value;
    e["count"] = r.count;
    e["students"] = r.students;
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace ekg::edu
