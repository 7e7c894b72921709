#pragma once

#include <string>
#include <string_view>

#include "ekg/rdf/graph.hpp"

namespace ekg::rdf {

// Parses the supported Turtle subset (see docs/turtle-subset.md): @prefix
// declarations, prefixed names and <absolute> IRIs, integer/string/boolean
// literals, `;` and `,` continuations and `.` terminators. A predicate-object
// continuation after `;` may repeat the current subject, which is the form
// the serializer emits. The returned graph is frozen.
//
// Throws ParseError (with line/column) on malformed input and
// ParseError(UnknownPrefix) for undeclared prefixes.
Graph parse_turtle(std::string_view text);

// Emits @prefix lines, then one block per subject. Every line repeats the
// subject and ends with ` ;`, the last line of a block ends with ` .`.
// Subjects, then predicates, then objects are sorted by the term order.
//
// Throws Error(UnregisteredPrefix) if the graph has no prefix registered.
std::string serialize_turtle(const Graph& graph);

// Shortest rendering of a term under `prefixes`: a prefixed name when some
// base is a prefix of the IRI and the remainder is a valid local name,
// otherwise <absolute>.
std::string render_term(const Term& term, const Graph::PrefixMap& prefixes);

}  // namespace ekg::rdf
