#include "ekg/rdf/term.hpp"

#include <algorithm>
#include <cctype>

#include "ekg/error.hpp"

namespace ekg::rdf {

Term Term::iri(std::string text) {
  if (text.empty()) throw Error(ErrorCode::Parse, "IRI must not be empty");
  if (std::any_of(text.begin(), text.end(),
                  [](unsigned char c) { return std::isspace(c) != 0; })) {
    throw Error(ErrorCode::Parse, "IRI contains whitespace: '" + text + "'");
  }
  if (text.find_first_of("<>\"{}|^`\\") != std::string::npos) {
    throw Error(ErrorCode::Parse, "IRI contains a forbidden character: '" + text + "'");
  }
  return Term(Repr(std::in_place_index<0>, IriText{std::move(text)}));
}

const std::string& Term::text() const {
  if (const auto* iri = std::get_if<IriText>(&repr_)) return iri->value;
  return std::get<std::string>(repr_);
}

std::string Term::to_string() const {
  switch (kind()) {
    case Kind::Iri: return "<" + text() + ">";
    case Kind::Boolean: return as_boolean() ? "true" : "false";
    case Kind::Integer: return std::to_string(as_integer());
    case Kind::String: {
      std::string out = "\"";
      for (char c : text()) {
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
  }
  return {};
}

std::size_t Term::hash() const noexcept {
  std::size_t h = 0;
  switch (kind()) {
    case Kind::Iri:
    case Kind::String: h = std::hash<std::string>{}(text()); break;
    case Kind::Boolean: h = as_boolean() ? 1 : 0; break;
    case Kind::Integer: h = std::hash<std::int64_t>{}(as_integer()); break;
  }
  return h ^ (repr_.index() * 0x9e3779b97f4a7c15ULL);
}

Triple::Triple(Term s, Term p, Term o)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
  if (!subject.is_iri()) {
    throw Error(ErrorCode::Parse, "triple subject must be an IRI, got " + subject.to_string());
  }
  if (!predicate.is_iri()) {
    throw Error(ErrorCode::Parse,
                "triple predicate must be an IRI, got " + predicate.to_string());
  }
}

std::string_view kind_name(Term::Kind kind) {
  switch (kind) {
    case Term::Kind::Iri: return "iri";
    case Term::Kind::Boolean: return "boolean";
    case Term::Kind::Integer: return "integer";
    case Term::Kind::String: return "string";
  }
  return "?";
}

}  // namespace ekg::rdf
