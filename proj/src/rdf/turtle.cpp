#include "ekg/rdf/turtle.hpp"

#include <cctype>
#include <sstream>

#include "ekg/error.hpp"
#include "ekg/text/scanner.hpp"

namespace ekg::rdf {
namespace {

using text::Scanner;

bool at_boolean(const Scanner& s, std::string_view word) {
  auto r = s.rest();
  if (r.substr(0, word.size()) != word) return false;
  char next = r.size() > word.size() ? r[word.size()] : '\0';
  return !text::is_name_char(next) && next != ':';
}

class TurtleParser {
 public:
  explicit TurtleParser(std::string_view input) : s_(input) {}

  Graph run() {
    while (true) {
      s_.skip_space();
      if (s_.eof()) break;
      if (s_.peek() == '@') {
        directive();
      } else {
        statement();
      }
    }
    graph_.freeze();
    return std::move(graph_);
  }

 private:
  void directive() {
    SourcePos at = s_.pos();
    s_.advance();
    if (!s_.accept_keyword("prefix")) s_.fail_at(at, "unsupported directive (only @prefix)");
    s_.skip_space();
    std::string name;
    if (text::is_name_start(s_.peek())) {
      while (text::is_name_char(s_.peek())) name += s_.advance();
    }
    s_.expect(":", "':' after prefix name");
    s_.skip_space();
    if (s_.peek() != '<') s_.fail("expected <IRI> in @prefix");
    std::string base = text::read_iri_ref(s_);
    s_.skip_space();
    s_.expect(".", "'.' after @prefix");
    graph_.set_prefix(name, base);
  }

  Term term() {
    s_.skip_space();
    SourcePos at = s_.pos();
    char c = s_.peek();
    if (s_.eof()) s_.fail("unexpected end of input, expected a term");
    if (c == '<') return Term::iri(text::read_iri_ref(s_));
    if (c == '"') return Term::string(text::read_string_literal(s_));
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
      return Term::integer(text::read_integer(s_));
    }
    if (at_boolean(s_, "true")) {
      s_.accept("true");
      return Term::boolean(true);
    }
    if (at_boolean(s_, "false")) {
      s_.accept("false");
      return Term::boolean(false);
    }
    if (c == '_' && s_.peek(1) == ':') s_.fail("blank nodes are not supported");
    if (c == ':' || text::is_name_start(c)) {
      auto [prefix, local] = text::read_prefixed_name(s_);
      auto it = graph_.prefixes().find(prefix);
      if (it == graph_.prefixes().end()) {
        throw ParseError(at, "undeclared prefix '" + prefix + ":'", ErrorCode::UnknownPrefix);
      }
      return Term::iri(it->second + local);
    }
    s_.fail(std::string("unexpected character '") + c + "'");
  }

  Term iri_term(const char* role) {
    s_.skip_space();
    SourcePos at = s_.pos();
    Term t = term();
    if (!t.is_iri()) s_.fail_at(at, std::string(role) + " must be an IRI");
    return t;
  }

  bool at_separator() {
    s_.skip_space();
    char c = s_.peek();
    return c == ';' || c == ',' || c == '.' || s_.eof();
  }

  void statement() {
    Term subject = iri_term("subject");
    Term predicate = iri_term("predicate");
    objects(subject, predicate);
    while (true) {
      s_.skip_space();
      if (s_.accept(".")) return;
      if (!s_.accept(";")) s_.fail("expected ';' or '.'");
      s_.skip_space();
      if (s_.peek() == '.' || s_.peek() == ';') continue;
      SourcePos at = s_.pos();
      Term first = term();
      s_.skip_space();
      Term second = term();
      if (at_separator()) {
        if (!first.is_iri()) s_.fail_at(at, "predicate must be an IRI");
        insert(subject, first, second);
        more_objects(subject, first);
      } else {
        // `subj pred obj ;` followed by the same subject again.
        if (first != subject) s_.fail_at(at, "subject changed inside a ';' continuation");
        if (!second.is_iri()) s_.fail_at(at, "predicate must be an IRI");
        objects(subject, second);
      }
    }
  }

  void objects(const Term& subject, const Term& predicate) {
    insert(subject, predicate, term());
    more_objects(subject, predicate);
  }

  void more_objects(const Term& subject, const Term& predicate) {
    while (true) {
      s_.skip_space();
      if (!s_.accept(",")) return;
      insert(subject, predicate, term());
    }
  }

  void insert(const Term& s, const Term& p, Term o) { graph_.insert(Triple(s, p, std::move(o))); }

  Scanner s_;
  Graph graph_;
};

}  // namespace

Graph parse_turtle(std::string_view text) { return TurtleParser(text).run(); }

std::string render_term(const Term& term, const Graph::PrefixMap& prefixes) {
  if (!term.is_iri()) return term.to_string();
  const std::string& iri = term.text();
  const std::string* best_name = nullptr;
  std::size_t best_len = 0;
  for (const auto& [name, base] : prefixes) {
    if (base.size() > iri.size() || iri.compare(0, base.size(), base) != 0) continue;
    if (!text::is_valid_local_name(std::string_view(iri).substr(base.size()))) continue;
    if (best_name == nullptr || base.size() > best_len) {
      best_name = &name;
      best_len = base.size();
    }
  }
  if (best_name == nullptr) return "<" + iri + ">";
  return *best_name + ":" + iri.substr(best_len);
}

std::string serialize_turtle(const Graph& graph) {
  if (graph.prefixes().empty()) {
    throw Error(ErrorCode::UnregisteredPrefix, "graph has no registered prefix");
  }
  std::ostringstream out;
  for (const auto& [name, base] : graph.prefixes()) {
    out << "@prefix " << name << ": <" << base << "> .\n";
  }

  const std::vector<Triple> triples = graph.match(std::nullopt, std::nullopt, std::nullopt);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    if (i == 0 || triples[i - 1].subject != t.subject) out << '\n';
    const bool last = i + 1 == triples.size() || triples[i + 1].subject != t.subject;
    out << render_term(t.subject, graph.prefixes()) << ' '
        << render_term(t.predicate, graph.prefixes()) << ' '
        << render_term(t.object, graph.prefixes()) << (last ? " .\n" : " ;\n");
  }
  return out.str();
}

}  // namespace ekg::rdf
