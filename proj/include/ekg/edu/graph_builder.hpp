#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ekg/edu/curation.hpp"
#include "ekg/rdf/graph.hpp"

namespace ekg::edu {

enum class ObjectKind { IntegerLiteral, CategoryIri };

struct MappingRule {
  Feature feature = Feature::Topic;
  std::string predicate;  // absolute IRI
  ObjectKind kind;

  friend bool operator==(const MappingRule&, const MappingRule&) = default;
};

struct MappingSchema {
  std::string ns = rdf::kDefaultNamespace;
  std::vector<MappingRule> rules;  // file order

  const MappingRule* find(Feature f) const;
  friend bool operator==(const MappingSchema&, const MappingSchema&) = default;
};

// Schema file, one statement per line, `#` comments:
//   namespace <http://www.example.org/>
//   <feature> <predicate> integer|category
// A predicate is a local name under the namespace or an <absolute IRI>.
// Features are looked up with find_feature(). Throws ParseError on syntax
// errors and unknown features, and on a feature mapped twice or a kind that
// contradicts the feature's type.
MappingSchema parse_schema(std::string_view text);
MappingSchema load_schema(const std::filesystem::path& path);

// Exactly the eight predicates of the Student1 listing.
MappingSchema listing_schema(const std::string& ns = rdf::kDefaultNamespace);
// The listing predicates plus Stage.
MappingSchema default_schema(const std::string& ns = rdf::kDefaultNamespace);

// Throws Error(IncompleteSchema) naming the first unmapped listing feature.
void check_complete(const MappingSchema& schema);

// ns + "Student" + index. Throws Error(InvalidIndex) for index < 1.
rdf::Term student_iri(const std::string& ns, std::int64_t index);
// Inverse of student_iri; nullopt for anything it could not have produced.
std::optional<std::int64_t> student_index(const std::string& ns, const rdf::Term& iri);

// Category value as an IRI under ns. Characters outside [A-Za-z0-9_-] are
// percent-encoded so distinct values stay distinct.
rdf::Term category_iri(const std::string& ns, std::string_view value);
std::optional<std::string> category_value(const std::string& ns, const rdf::Term& iri);

// Object term for one mapped feature of a record.
rdf::Term feature_object(const MappingSchema& schema, const MappingRule& rule,
                         const CuratedRecord& record);

// One subject per record, one triple per mapped feature. The graph carries
// the `ns1:` prefix for the schema namespace and is frozen on return.
rdf::Graph build_graph(const std::vector<CuratedRecord>& records, const MappingSchema& schema);

}  // namespace ekg::edu
