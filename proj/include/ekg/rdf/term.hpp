#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>

namespace ekg::rdf {

struct IriText {
  std::string value;
  auto operator<=>(const IriText&) const = default;
};

// An RDF term: an IRI or a literal typed as boolean, integer or string.
//
// The alternative order inside the variant is the documented total order over
// terms: IRIs first, then literals by datatype (boolean < integer < string),
// then by value. std::variant's comparison operators give exactly that order.
class Term {
 public:
  enum class Kind : std::uint8_t { Iri = 0, Boolean = 1, Integer = 2, String = 3 };

  // Throws Error(Parse) when the text is empty or contains whitespace.
  static Term iri(std::string text);
  static Term integer(std::int64_t value) { return Term(Repr(std::in_place_index<2>, value)); }
  static Term boolean(bool value) { return Term(Repr(std::in_place_index<1>, value)); }
  static Term string(std::string value) {
    return Term(Repr(std::in_place_index<3>, std::move(value)));
  }

  Kind kind() const noexcept { return static_cast<Kind>(repr_.index()); }
  bool is_iri() const noexcept { return kind() == Kind::Iri; }
  bool is_literal() const noexcept { return !is_iri(); }

  // IRI text or string-literal value. Only valid for those two kinds.
  const std::string& text() const;
  std::int64_t as_integer() const { return std::get<2>(repr_); }
  bool as_boolean() const { return std::get<1>(repr_); }

  // Absolute N-Triples style rendering, used for diagnostics and hashing.
  std::string to_string() const;

  friend bool operator==(const Term&, const Term&) = default;
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    return a.repr_ <=> b.repr_;
  }

  std::size_t hash() const noexcept;

 private:
  using Repr = std::variant<IriText, bool, std::int64_t, std::string>;
  explicit Term(Repr repr) : repr_(std::move(repr)) {}

  Repr repr_;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  // Throws Error(Parse) unless subject and predicate are IRIs.
  Triple(Term s, Term p, Term o);

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

std::string_view kind_name(Term::Kind kind);

}  // namespace ekg::rdf

template <>
struct std::hash<ekg::rdf::Term> {
  std::size_t operator()(const ekg::rdf::Term& t) const noexcept { return t.hash(); }
};

template <>
struct std::hash<ekg::rdf::Triple> {
  std::size_t operator()(const ekg::rdf::Triple& t) const noexcept {
    std::size_t h = t.subject.hash();
    h = h * 1000003u ^ t.predicate.hash();
    return h * 1000003u ^ t.object.hash();
  }
};
