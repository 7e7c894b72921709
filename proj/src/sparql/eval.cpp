#include "ekg/sparql/eval.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>
#include <sstream>

#include "ekg/error.hpp"
#include "ekg/rdf/turtle.hpp"

namespace ekg::sparql {

using rdf::Term;

void OrdinalTable::add_scale(const std::string& scale, const std::vector<Term>& ascending) {
  for (std::size_t i = 0; i < ascending.size(); ++i) {
    ranks_.insert_or_assign(ascending[i], Rank{scale, static_cast<int>(i)});
  }
}

std::optional<OrdinalTable::Rank> OrdinalTable::rank(const Term& t) const {
  auto it = ranks_.find(t);
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

OrdinalTable OrdinalTable::defaults(const std::string& ns) {
  OrdinalTable table;
  const std::vector<std::string> grades = {"F", "D", "C", "B", "A"};
  const std::vector<std::string> levels = {"Low-Level", "Middle-Level", "High-Level"};
  for (const auto* names : {&grades, &levels}) {
    const std::string scale = names == &grades ? "grade" : "level";
    std::vector<Term> strings, iris;
    for (const auto& n : *names) {
      strings.push_back(Term::string(n));
      iris.push_back(Term::iri(ns + n));
    }
    table.add_scale(scale, strings);
    table.add_scale(scale, iris);
  }
  return table;
}

namespace {

template <typename T>
bool apply(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

bool is_equality(CompareOp op) { return op == CompareOp::Eq || op == CompareOp::Ne; }

[[noreturn]] void incomparable(const Term& a, CompareOp op, const Term& b) {
  throw Error(ErrorCode::Type, "cannot compare " + a.to_string() + " (" +
                                   std::string(rdf::kind_name(a.kind())) + ") " +
                                   std::string(to_string(op)) + " " + b.to_string() + " (" +
                                   std::string(rdf::kind_name(b.kind())) + ")");
}

}  // namespace

bool compare_terms(const Term& lhs, CompareOp op, const Term& rhs, const OrdinalTable& ordinals) {
  const auto ra = ordinals.rank(lhs);
  const auto rb = ordinals.rank(rhs);
  if (ra && rb && ra->scale == rb->scale) return apply(op, ra->rank, rb->rank);

  if (lhs.kind() == rhs.kind()) {
    switch (lhs.kind()) {
      case Term::Kind::Iri:
        if (!is_equality(op)) incomparable(lhs, op, rhs);
        return apply(op, lhs.text(), rhs.text());
      case Term::Kind::String: return apply(op, lhs.text(), rhs.text());
      case Term::Kind::Integer: return apply(op, lhs.as_integer(), rhs.as_integer());
      case Term::Kind::Boolean: return apply(op, lhs.as_boolean(), rhs.as_boolean());
    }
  }
  if (is_equality(op) && (lhs.is_iri() || rhs.is_iri())) return op == CompareOp::Ne;
  incomparable(lhs, op, rhs);
}

namespace {

// Left-deep index nested-loop join over a fixed pattern order.
class BgpJoin {
 public:
  BgpJoin(const rdf::Graph& graph, const BasicGraphPattern& bgp) : graph_(graph) {
    plan(bgp);
  }

  std::vector<Solution> run() {
    Solution empty;
    extend(0, empty);
    std::sort(out_.begin(), out_.end());
    return std::move(out_);
  }

 private:
  static const std::string* var_name(const PatternTerm& t) {
    const auto* v = std::get_if<Variable>(&t);
    return v ? &v->name : nullptr;
  }

  static std::optional<Term> constant(const PatternTerm& t) {
    if (const auto* term = std::get_if<Term>(&t)) return *term;
    return std::nullopt;
  }

  // The first pattern is the one with the fewest matches on its constants;
  // afterwards patterns sharing an already-bound variable are preferred,
  // ties broken by that same match count.
  void plan(const BasicGraphPattern& bgp) {
    std::vector<const TriplePattern*> remaining;
    for (const auto& tp : bgp.patterns) remaining.push_back(&tp);
    std::set<std::string> bound;
    while (!remaining.empty()) {
      auto score = [&](const TriplePattern* tp) {
        int connected = 0;
        for (const PatternTerm* pt : {&tp->subject, &tp->predicate, &tp->object}) {
          if (const auto* n = var_name(*pt); n && bound.contains(*n)) ++connected;
        }
        std::size_t estimate =
            graph_.count(constant(tp->subject), constant(tp->predicate), constant(tp->object));
        return std::pair(-connected, estimate);
      };
      auto best = std::min_element(remaining.begin(), remaining.end(),
                                   [&](auto* a, auto* b) { return score(a) < score(b); });
      order_.push_back(*best);
      for (const PatternTerm* pt : {&(*best)->subject, &(*best)->predicate, &(*best)->object}) {
        if (const auto* n = var_name(*pt)) bound.insert(*n);
      }
      remaining.erase(best);
    }
  }

  static std::optional<Term> resolve(const PatternTerm& t, const Solution& s) {
    if (const auto* n = var_name(t)) {
      auto it = s.find(*n);
      if (it == s.end()) return std::nullopt;
      return it->second;
    }
    return std::get<Term>(t);
  }

  // Binds `pt` to `value`; fails on a conflicting earlier binding (repeated
  // variables inside one pattern).
  static bool bind(const PatternTerm& pt, const Term& value, Solution& s) {
    const auto* n = var_name(pt);
    if (n == nullptr) return true;
    auto [it, inserted] = s.emplace(*n, value);
    return inserted || it->second == value;
  }

  void extend(std::size_t depth, const Solution& current) {
    if (depth == order_.size()) {
      out_.push_back(current);
      return;
    }
    const TriplePattern& tp = *order_[depth];
    const auto s = resolve(tp.subject, current);
    const auto p = resolve(tp.predicate, current);
    const auto o = resolve(tp.object, current);
    if ((s && !s->is_iri()) || (p && !p->is_iri())) return;
    for (const rdf::Triple& t : graph_.match(s, p, o)) {
      Solution next = current;
      if (bind(tp.subject, t.subject, next) && bind(tp.predicate, t.predicate, next) &&
          bind(tp.object, t.object, next)) {
        extend(depth + 1, next);
      }
    }
  }

  const rdf::Graph& graph_;
  std::vector<const TriplePattern*> order_;
  std::vector<Solution> out_;
};

const Term& lookup(const Solution& s, const PatternTerm& t) {
  if (const auto* v = std::get_if<Variable>(&t)) {
    auto it = s.find(v->name);
    if (it == s.end()) {
      throw Error(ErrorCode::UnboundVariable, "variable ?" + v->name + " is unbound");
    }
    return it->second;
  }
  return std::get<Term>(t);
}

}  // namespace

std::vector<Solution> eval_bgp(const rdf::Graph& graph, const BasicGraphPattern& bgp) {
  return BgpJoin(graph, bgp).run();
}

bool eval_filter_expr(const Solution& solution, const FilterExpr& expr,
                      const OrdinalTable& ordinals) {
  switch (expr.kind) {
    case FilterExpr::Kind::Constant: return expr.constant;
    case FilterExpr::Kind::Compare:
      return compare_terms(lookup(solution, expr.lhs), expr.op, lookup(solution, expr.rhs),
                           ordinals);
    case FilterExpr::Kind::And:
      return eval_filter_expr(solution, expr.children[0], ordinals) &&
             eval_filter_expr(solution, expr.children[1], ordinals);
    case FilterExpr::Kind::Or:
      return eval_filter_expr(solution, expr.children[0], ordinals) ||
             eval_filter_expr(solution, expr.children[1], ordinals);
    case FilterExpr::Kind::Not: return !eval_filter_expr(solution, expr.children[0], ordinals);
  }
  return false;
}

std::vector<Solution> eval_filter(std::vector<Solution> solutions, const FilterExpr& expr,
                                  const OrdinalTable& ordinals) {
  std::erase_if(solutions,
                [&](const Solution& s) { return !eval_filter_expr(s, expr, ordinals); });
  return solutions;
}

std::vector<Solution> eval_where(const rdf::Graph& graph, const Query& query,
                                 const OrdinalTable& ordinals) {
  std::vector<Solution> solutions = eval_bgp(graph, query.where);
  for (const auto& f : query.filters) solutions = eval_filter(std::move(solutions), f, ordinals);
  return solutions;
}

ResultTable eval_select(const rdf::Graph& graph, const Query& query,
                        const OrdinalTable& ordinals) {
  const auto* select = std::get_if<SelectForm>(&query.form);
  if (select == nullptr) throw Error(ErrorCode::UnsupportedForm, "eval_select needs a SELECT query");

  std::vector<Solution> solutions = eval_where(graph, query, ordinals);
  if (query.order) {
    const std::string& key = query.order->variable.name;
    const bool desc = query.order->descending;
    std::stable_sort(solutions.begin(), solutions.end(), [&](const Solution& a, const Solution& b) {
      const Term& x = a.at(key);
      const Term& y = b.at(key);
      return desc ? y < x : x < y;
    });
  }

  ResultTable table;
  for (const auto& v : select->projection) table.columns.push_back(v.name);
  std::set<std::vector<Term>> seen;
  for (const Solution& s : solutions) {
    if (query.limit && table.rows.size() >= *query.limit) break;
    std::vector<Term> row;
    row.reserve(table.columns.size());
    for (const auto& c : table.columns) row.push_back(s.at(c));
    if (select->distinct && !seen.insert(row).second) continue;
    table.rows.push_back(std::move(row));
  }
  return table;
}

rdf::Graph eval_construct(const rdf::Graph& graph, const Query& query,
                          const OrdinalTable& ordinals) {
  const auto* construct = std::get_if<ConstructForm>(&query.form);
  if (construct == nullptr) {
    throw Error(ErrorCode::UnsupportedForm, "eval_construct needs a CONSTRUCT query");
  }
  rdf::Graph out(graph.prefixes());
  for (const auto& [name, base] : query.prefixes) {
    if (!out.prefixes().contains(name)) out.set_prefix(name, base);
  }
  for (const Solution& s : eval_where(graph, query, ordinals)) {
    for (const auto& tp : construct->templ.patterns) {
      auto get = [&](const PatternTerm& t) -> std::optional<Term> {
        if (const auto* v = std::get_if<Variable>(&t)) {
          auto it = s.find(v->name);
          if (it == s.end()) return std::nullopt;
          return it->second;
        }
        return std::get<Term>(t);
      };
      auto subj = get(tp.subject), pred = get(tp.predicate), obj = get(tp.object);
      if (!subj || !pred || !obj || !subj->is_iri() || !pred->is_iri()) continue;
      out.insert(rdf::Triple(*subj, *pred, *obj));
    }
  }
  out.freeze();
  return out;
}

bool eval_ask(const rdf::Graph& graph, const Query& query, const OrdinalTable& ordinals) {
  if (!std::holds_alternative<AskForm>(query.form)) {
    throw Error(ErrorCode::UnsupportedForm, "eval_ask needs an ASK query");
  }
  return !eval_where(graph, query, ordinals).empty();
}

std::string format_table(const ResultTable& table, const rdf::Graph::PrefixMap& prefixes) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width;
  for (const auto& c : table.columns) width.push_back(c.size() + 1);
  for (const auto& row : table.rows) {
    auto& line = cells.emplace_back();
    for (std::size_t i = 0; i < row.size(); ++i) {
      line.push_back(rdf::render_term(row[i], prefixes));
      width[i] = std::max(width[i], line.back().size());
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out << (i ? " | " : "") << line[i];
      if (i + 1 < line.size()) out << std::string(width[i] - line[i].size(), ' ');
    }
    out << '\n';
  };
  std::vector<std::string> header;
  for (const auto& c : table.columns) header.push_back("?" + c);
  emit(header);
  std::size_t rule = 0;
  for (std::size_t w : width) rule += w + 3;
  out << std::string(rule > 3 ? rule - 3 : 0, '-') << '\n';
  for (const auto& line : cells) emit(line);
  out << table.rows.size() << (table.rows.size() == 1 ? " row\n" : " rows\n");
  return out.str();
}

namespace {

nlohmann::json term_json(const Term& t) {
  nlohmann::json j;
  switch (t.kind()) {
    case Term::Kind::Iri:
      j["type"] = "uri";
      j["value"] = t.text();
      break;
    case Term::Kind::String:
      j["type"] = "literal";
      j["value"] = t.text();
      break;
    case Term::Kind::Integer:
      j["type"] = "literal";
      j["value"] = std::to_string(t.as_integer());
      j["datatype"] = "http://www.w3.org/2001/XMLSchema#integer";
      break;
    case Term::Kind::Boolean:
      j["type"] = "literal";
      j["value"] = t.as_boolean() ? "true" : "false";
      j["datatype"] = "http://www.w3.org/2001/XMLSchema#boolean";
      break;
  }
  return j;
}

}  // namespace

std::string to_json(const ResultTable& table) {
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json b = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) b[table.columns[i]] = term_json(row[i]);
    bindings.push_back(std::move(b));
  }
  nlohmann::json doc;
  doc["head"]["vars"] = table.columns;
  doc["results"]["bindings"] = std::move(bindings);
  return doc.dump(2) + "\n";
}

std::string ask_to_json(bool answer) {
  nlohmann::json doc;
  doc["head"] = nlohmann::json::object();
  doc["boolean"] = answer;
  return doc.dump(2) + "\n";
}

}  // namespace ekg::sparql
