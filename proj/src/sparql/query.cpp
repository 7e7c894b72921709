#include "ekg/sparql/query.hpp"

#include <cctype>
#include <sstream>

#include "ekg/error.hpp"
#include "ekg/rdf/turtle.hpp"
#include "ekg/text/scanner.hpp"

namespace ekg::sparql {

std::vector<std::string> BasicGraphPattern::variables() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& tp : patterns) {
    for (const PatternTerm* pt : {&tp.subject, &tp.predicate, &tp.object}) {
      if (const auto* v = std::get_if<Variable>(pt); v && seen.insert(v->name).second) {
        out.push_back(v->name);
      }
    }
  }
  return out;
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

FilterExpr FilterExpr::value(bool v) {
  FilterExpr e;
  e.kind = Kind::Constant;
  e.constant = v;
  return e;
}

FilterExpr FilterExpr::compare(PatternTerm lhs, CompareOp op, PatternTerm rhs) {
  FilterExpr e;
  e.kind = Kind::Compare;
  e.op = op;
  e.lhs = std::move(lhs);
  e.rhs = std::move(rhs);
  return e;
}

FilterExpr FilterExpr::conjunction(FilterExpr a, FilterExpr b) {
  FilterExpr e;
  e.kind = Kind::And;
  e.children = {std::move(a), std::move(b)};
  return e;
}

FilterExpr FilterExpr::disjunction(FilterExpr a, FilterExpr b) {
  FilterExpr e;
  e.kind = Kind::Or;
  e.children = {std::move(a), std::move(b)};
  return e;
}

FilterExpr FilterExpr::negation(FilterExpr a) {
  FilterExpr e;
  e.kind = Kind::Not;
  e.children = {std::move(a)};
  return e;
}

void FilterExpr::collect_variables(std::set<std::string>& out) const {
  if (kind == Kind::Compare) {
    if (const auto* v = std::get_if<Variable>(&lhs)) out.insert(v->name);
    if (const auto* v = std::get_if<Variable>(&rhs)) out.insert(v->name);
  }
  for (const auto& c : children) c.collect_variables(out);
}

namespace {

using text::Scanner;

class QueryParser {
 public:
  explicit QueryParser(std::string_view input) : s_(input) {}

  Query run() {
    prologue();
    SourcePos form_at = pos();
    if (keyword("SELECT")) {
      select_clause();
    } else if (keyword("CONSTRUCT")) {
      ConstructForm form;
      expect("{", "'{' opening the CONSTRUCT template");
      group_body(form.templ, /*allow_filters=*/false);
      q_.form = std::move(form);
      if (!keyword("WHERE")) expected("WHERE");
    } else if (keyword("ASK")) {
      q_.form = AskForm{};
      keyword("WHERE");
    } else if (keyword("DESCRIBE")) {
      throw ParseError(form_at, "DESCRIBE queries are not supported",
                       ErrorCode::UnsupportedForm);
    } else {
      expected("one of SELECT, CONSTRUCT, ASK");
    }
    expect("{", "'{' opening the WHERE group");
    group_body(q_.where, /*allow_filters=*/true);
    modifiers();
    s_.skip_space();
    if (!s_.eof()) expected("end of query");
    validate(form_at);
    return std::move(q_);
  }

 private:
  SourcePos pos() {
    s_.skip_space();
    return s_.pos();
  }

  bool keyword(std::string_view kw) {
    s_.skip_space();
    return s_.accept_keyword(kw);
  }

  bool punct(std::string_view p) {
    s_.skip_space();
    return s_.accept(p);
  }

  void expect(std::string_view p, std::string_view what) {
    if (!punct(p)) expected(what);
  }

  [[noreturn]] void expected(std::string_view what) {
    s_.skip_space();
    std::string found = s_.eof() ? "end of input" : "'" + std::string(1, s_.peek()) + "'";
    s_.fail("expected " + std::string(what) + ", found " + found);
  }

  void prologue() {
    while (keyword("PREFIX")) {
      s_.skip_space();
      std::string name;
      if (text::is_name_start(s_.peek())) {
        while (text::is_name_char(s_.peek())) name += s_.advance();
      }
      if (!s_.accept(":")) expected("':' after prefix name");
      s_.skip_space();
      if (s_.peek() != '<') expected("<IRI> after PREFIX name:");
      q_.prefixes[name] = text::read_iri_ref(s_);
    }
  }

  void select_clause() {
    SelectForm form;
    form.distinct = keyword("DISTINCT");
    if (punct("*")) {
      select_star_ = true;
    } else {
      while (at_variable()) form.projection.push_back(variable());
      if (form.projection.empty()) expected("a projection variable or '*'");
    }
    q_.form = std::move(form);
    keyword("WHERE");
  }

  bool at_variable() {
    s_.skip_space();
    return (s_.peek() == '?' || s_.peek() == '$') && text::is_name_char(s_.peek(1));
  }

  Variable variable() {
    s_.skip_space();
    if (s_.peek() != '?' && s_.peek() != '$') expected("a variable");
    s_.advance();
    std::string name;
    while (std::isalnum(static_cast<unsigned char>(s_.peek())) || s_.peek() == '_') {
      name += s_.advance();
    }
    if (name.empty()) expected("a variable name");
    return Variable{name};
  }

  bool at_boolean(std::string_view word) {
    auto r = s_.rest();
    if (r.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(r[i])) != word[i]) return false;
    }
    char next = r.size() > word.size() ? r[word.size()] : '\0';
    return !text::is_name_char(next) && next != ':';
  }

  rdf::Term constant() {
    s_.skip_space();
    SourcePos at = s_.pos();
    char c = s_.peek();
    if (c == '<') return rdf::Term::iri(text::read_iri_ref(s_));
    if (c == '"') return rdf::Term::string(text::read_string_literal(s_));
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(s_.peek(1))))) {
      return rdf::Term::integer(text::read_integer(s_));
    }
    if (at_boolean("true")) {
      s_.accept_keyword("true");
      return rdf::Term::boolean(true);
    }
    if (at_boolean("false")) {
      s_.accept_keyword("false");
      return rdf::Term::boolean(false);
    }
    if (c == ':' || text::is_name_start(c)) {
      auto [prefix, local] = text::read_prefixed_name(s_);
      auto it = q_.prefixes.find(prefix);
      if (it == q_.prefixes.end()) {
        throw ParseError(at, "undeclared prefix '" + prefix + ":'", ErrorCode::UnknownPrefix);
      }
      return rdf::Term::iri(it->second + local);
    }
    expected("a variable, IRI or literal");
  }

  PatternTerm pattern_term() {
    if (at_variable()) return variable();
    return constant();
  }

  PatternTerm verb() {
    SourcePos at = pos();
    PatternTerm t = pattern_term();
    if (const auto* term = std::get_if<rdf::Term>(&t); term && !term->is_iri()) {
      s_.fail_at(at, "predicate must be an IRI or a variable");
    }
    return t;
  }

  // Body of a `{ ... }` group, the opening brace already consumed.
  void group_body(BasicGraphPattern& bgp, bool allow_filters) {
    while (true) {
      if (punct("}")) return;
      if (allow_filters && keyword("FILTER")) {
        expect("(", "'(' after FILTER");
        q_.filters.push_back(or_expr());
        expect(")", "')' closing FILTER");
        punct(".");
        continue;
      }
      triples_block(bgp);
      if (!punct(".")) {
        s_.skip_space();
        if (s_.peek() != '}' && !(allow_filters && at_keyword("FILTER"))) {
          expected("'.', '}' or FILTER");
        }
      }
    }
  }

  bool at_keyword(std::string_view kw) {
    Scanner probe = s_;
    return probe.accept_keyword(kw);
  }

  void triples_block(BasicGraphPattern& bgp) {
    PatternTerm subject = pattern_term();
    PatternTerm predicate = verb();
    bgp.patterns.push_back({subject, predicate, pattern_term()});
    while (true) {
      if (punct(",")) {
        bgp.patterns.push_back({subject, predicate, pattern_term()});
      } else if (punct(";")) {
        s_.skip_space();
        if (s_.peek() == '.' || s_.peek() == '}') return;
        predicate = verb();
        bgp.patterns.push_back({subject, predicate, pattern_term()});
      } else {
        return;
      }
    }
  }

  FilterExpr or_expr() {
    FilterExpr lhs = and_expr();
    while (punct("||")) lhs = FilterExpr::disjunction(std::move(lhs), and_expr());
    return lhs;
  }

  FilterExpr and_expr() {
    FilterExpr lhs = unary_expr();
    while (punct("&&")) lhs = FilterExpr::conjunction(std::move(lhs), unary_expr());
    return lhs;
  }

  FilterExpr unary_expr() {
    s_.skip_space();
    if (s_.peek() == '!' && s_.peek(1) != '=') {
      s_.advance();
      return FilterExpr::negation(unary_expr());
    }
    if (punct("(")) {
      FilterExpr inner = or_expr();
      expect(")", "')'");
      return inner;
    }
    PatternTerm lhs = pattern_term();
    if (auto op = compare_op()) return FilterExpr::compare(std::move(lhs), *op, pattern_term());
    if (const auto* t = std::get_if<rdf::Term>(&lhs); t && t->kind() == rdf::Term::Kind::Boolean) {
      return FilterExpr::value(t->as_boolean());
    }
    expected("a comparison operator (=, !=, <, <=, >, >=)");
  }

  std::optional<CompareOp> compare_op() {
    s_.skip_space();
    if (s_.accept("!=")) return CompareOp::Ne;
    if (s_.accept("<=")) return CompareOp::Le;
    if (s_.accept(">=")) return CompareOp::Ge;
    if (s_.accept("=")) return CompareOp::Eq;
    if (s_.accept("<")) return CompareOp::Lt;
    if (s_.accept(">")) return CompareOp::Gt;
    return std::nullopt;
  }

  void modifiers() {
    if (keyword("ORDER")) {
      if (!keyword("BY")) expected("BY after ORDER");
      OrderBy order;
      if (keyword("ASC") || (order.descending = keyword("DESC"))) {
        expect("(", "'('");
        order.variable = variable();
        expect(")", "')'");
      } else {
        order.variable = variable();
      }
      q_.order = std::move(order);
    }
    if (keyword("LIMIT")) {
      s_.skip_space();
      if (!std::isdigit(static_cast<unsigned char>(s_.peek()))) expected("a non-negative integer");
      q_.limit = static_cast<std::uint64_t>(text::read_integer(s_));
    }
  }

  void validate(SourcePos form_at) {
    const auto vars = q_.where.variables();
    const std::set<std::string> bound(vars.begin(), vars.end());
    auto require = [&](const std::string& name, const char* where) {
      if (!bound.contains(name)) {
        throw ParseError(form_at,
                         "variable ?" + name + " in " + where + " is not bound by the WHERE pattern",
                         ErrorCode::UnboundVariable);
      }
    };
    if (auto* select = std::get_if<SelectForm>(&q_.form)) {
      if (select_star_) {
        for (const auto& v : vars) select->projection.push_back(Variable{v});
      }
      for (const auto& v : select->projection) require(v.name, "the projection");
    }
    if (const auto* construct = std::get_if<ConstructForm>(&q_.form)) {
      for (const auto& v : construct->templ.variables()) require(v, "the CONSTRUCT template");
    }
    std::set<std::string> filter_vars;
    for (const auto& f : q_.filters) f.collect_variables(filter_vars);
    for (const auto& v : filter_vars) require(v, "a FILTER");
    if (q_.order) require(q_.order->variable.name, "ORDER BY");
  }

  Scanner s_;
  Query q_;
  bool select_star_ = false;
};

std::string print_term(const PatternTerm& t, const rdf::Graph::PrefixMap& prefixes) {
  if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
  return rdf::render_term(std::get<rdf::Term>(t), prefixes);
}

std::string print_filter_impl(const FilterExpr& e, const rdf::Graph::PrefixMap& prefixes,
                              bool top) {
  switch (e.kind) {
    case FilterExpr::Kind::Constant: return e.constant ? "true" : "false";
    case FilterExpr::Kind::Compare:
      return print_term(e.lhs, prefixes) + " " + std::string(to_string(e.op)) + " " +
             print_term(e.rhs, prefixes);
    case FilterExpr::Kind::Not:
      return "!(" + print_filter_impl(e.children[0], prefixes, true) + ")";
    case FilterExpr::Kind::And:
    case FilterExpr::Kind::Or: {
      std::string inner = print_filter_impl(e.children[0], prefixes, false) +
                          (e.kind == FilterExpr::Kind::And ? " && " : " || ") +
                          print_filter_impl(e.children[1], prefixes, false);
      return top ? inner : "(" + inner + ")";
    }
  }
  return {};
}

void print_patterns(std::ostringstream& out, const BasicGraphPattern& bgp,
                    const rdf::Graph::PrefixMap& prefixes) {
  for (const auto& tp : bgp.patterns) {
    out << "  " << print_term(tp.subject, prefixes) << ' ' << print_term(tp.predicate, prefixes)
        << ' ' << print_term(tp.object, prefixes) << " .\n";
  }
}

}  // namespace

Query parse_query(std::string_view text) { return QueryParser(text).run(); }

std::string print_filter(const FilterExpr& e, const rdf::Graph::PrefixMap& prefixes) {
  return print_filter_impl(e, prefixes, true);
}

std::string print_query(const Query& q) {
  std::ostringstream out;
  for (const auto& [name, base] : q.prefixes) out << "PREFIX " << name << ": <" << base << ">\n";
  if (const auto* select = std::get_if<SelectForm>(&q.form)) {
    out << "SELECT ";
    if (select->distinct) out << "DISTINCT ";
    for (const auto& v : select->projection) out << '?' << v.name << ' ';
    if (select->projection.empty()) out << "* ";
    out << "WHERE {\n";
  } else if (const auto* construct = std::get_if<ConstructForm>(&q.form)) {
    out << "CONSTRUCT {\n";
    print_patterns(out, construct->templ, q.prefixes);
    out << "} WHERE {\n";
  } else {
    out << "ASK WHERE {\n";
  }
  print_patterns(out, q.where, q.prefixes);
  for (const auto& f : q.filters) out << "  FILTER (" << print_filter(f, q.prefixes) << ")\n";
  out << "}";
  if (q.order) {
    out << "\nORDER BY " << (q.order->descending ? "DESC" : "ASC") << "(?" << q.order->variable.name
        << ")";
  }
  if (q.limit) out << "\nLIMIT " << *q.limit;
  out << '\n';
  return out.str();
}

}  // namespace ekg::sparql
