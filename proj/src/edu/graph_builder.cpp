#include "ekg/edu/graph_builder.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ekg/error.hpp"

namespace ekg::edu {

namespace {

struct ListingPredicate {
  Feature feature;
  const char* local;
  ObjectKind kind;
};

// Spellings as printed in the Student1 listing, capitalization included.
constexpr ListingPredicate kListing[] = {
    {Feature::AnnouncementsView, "AnnouncementsView", ObjectKind::IntegerLiteral},
    {Feature::Discussion, "Discussion", ObjectKind::IntegerLiteral},
    {Feature::Topic, "EnrolledIn", ObjectKind::CategoryIri},
    {Feature::ScoreLevel, "Score", ObjectKind::CategoryIri},
    {Feature::Semester, "Semester", ObjectKind::CategoryIri},
    {Feature::AbsenceDays, "StudentAbsenceDays", ObjectKind::CategoryIri},
    {Feature::VisitedResources, "VisITedResources", ObjectKind::IntegerLiteral},
    {Feature::RaisedHands, "raisedhands", ObjectKind::IntegerLiteral},
};

ObjectKind kind_for(Feature f) {
  return feature_info(f).kind == FeatureKind::Integer ? ObjectKind::IntegerLiteral
                                                      : ObjectKind::CategoryIri;
}

bool safe_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-';
}

}  // namespace

const MappingRule* MappingSchema::find(Feature f) const {
  for (const auto& r : rules) {
    if (r.feature == f) return &r;
  }
  return nullptr;
}

MappingSchema parse_schema(std::string_view text) {
  MappingSchema schema;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool saw_namespace = false;
  std::vector<std::pair<std::string, std::size_t>> locals;  // resolved after the namespace is known
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string t; words >> t;) w.push_back(t);
    if (w.empty()) continue;
    auto fail = [&](const std::string& msg) -> void { throw ParseError({line_no, 1}, msg); };

    if (w[0] == "namespace") {
      if (w.size() != 2 || w[1].size() < 3 || w[1].front() != '<' || w[1].back() != '>') {
        fail("expected 'namespace <iri>'");
      }
      if (saw_namespace || !schema.rules.empty()) fail("namespace must come first and only once");
      schema.ns = w[1].substr(1, w[1].size() - 2);
      rdf::Term::iri(schema.ns);  // validates
      saw_namespace = true;
      continue;
    }
    if (w.size() != 3) fail("expected '<feature> <predicate> integer|category'");
    auto feature = find_feature(w[0]);
    if (!feature) {
      throw ParseError({line_no, 1}, "unknown feature '" + w[0] + "'", ErrorCode::UnknownFeature);
    }
    if (schema.find(*feature)) fail("feature '" + w[0] + "' mapped twice");
    ObjectKind kind = ObjectKind::IntegerLiteral;
    if (w[2] == "integer") {
      kind = ObjectKind::IntegerLiteral;
    } else if (w[2] == "category") {
      kind = ObjectKind::CategoryIri;
    } else {
      fail("object kind must be 'integer' or 'category', found '" + w[2] + "'");
    }
    if (kind != kind_for(*feature)) fail("feature '" + w[0] + "' has the wrong object kind");
    std::string predicate = w[1];
    if (predicate.front() == '<') {
      if (predicate.size() < 3 || predicate.back() != '>') fail("malformed IRI " + predicate);
      predicate = predicate.substr(1, predicate.size() - 2);
    } else {
      locals.emplace_back(predicate, schema.rules.size());
    }
    schema.rules.push_back({*feature, predicate, kind});
  }
  for (const auto& [local, i] : locals) schema.rules[i].predicate = schema.ns + local;
  for (const auto& r : schema.rules) rdf::Term::iri(r.predicate);
  return schema;
}

MappingSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

MappingSchema listing_schema(const std::string& ns) {
  MappingSchema schema;
  schema.ns = ns;
  for (const auto& p : kListing) schema.rules.push_back({p.feature, ns + p.local, p.kind});
  return schema;
}

MappingSchema default_schema(const std::string& ns) {
  MappingSchema schema = listing_schema(ns);
  schema.rules.push_back({Feature::Stage, ns + "Stage", ObjectKind::CategoryIri});
  return schema;
}

void check_complete(const MappingSchema& schema) {
  for (const auto& p : kListing) {
    if (!schema.find(p.feature)) {
      throw Error(ErrorCode::IncompleteSchema,
                  "schema maps no predicate for feature '" +
                      std::string(feature_info(p.feature).name) + "'");
    }
  }
}

rdf::Term student_iri(const std::string& ns, std::int64_t index) {
  if (index < 1) {
    throw Error(ErrorCode::InvalidIndex, "student index must be >= 1, got " + std::to_string(index));
  }
  return rdf::Term::iri(ns + "Student" + std::to_string(index));
}

std::optional<std::int64_t> student_index(const std::string& ns, const rdf::Term& iri) {
  if (!iri.is_iri()) return std::nullopt;
  std::string_view text = iri.text();
  const std::string head = ns + "Student";
  if (!text.starts_with(head)) return std::nullopt;
  text.remove_prefix(head.size());
  // Reject forms student_iri never emits: empty, leading zero, sign.
  if (text.empty() || text.front() == '0' || text.front() == '+' || text.front() == '-') {
    return std::nullopt;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

rdf::Term category_iri(const std::string& ns, std::string_view value) {
  static const char* hex = "0123456789ABCDEF";
  std::string local;
  for (char c : value) {
    if (safe_char(c)) {
      local += c;
    } else {
      const auto b = static_cast<unsigned char>(c);
      local += '%';
      local += hex[b >> 4];
      local += hex[b & 15];
    }
  }
  return rdf::Term::iri(ns + local);
}

std::optional<std::string> category_value(const std::string& ns, const rdf::Term& iri) {
  if (!iri.is_iri() || !iri.text().starts_with(ns)) return std::nullopt;
  std::string_view local = iri.text();
  local.remove_prefix(ns.size());
  std::string out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (local[i] != '%') {
      if (!safe_char(local[i])) return std::nullopt;
      out += local[i];
      continue;
    }
    unsigned v = 0;
    if (i + 2 >= local.size()) return std::nullopt;
    auto [ptr, ec] = std::from_chars(local.data() + i + 1, local.data() + i + 3, v, 16);
    if (ec != std::errc{} || ptr != local.data() + i + 3) return std::nullopt;
    out += static_cast<char>(v);
    i += 2;
  }
  return out;
}

rdf::Term feature_object(const MappingSchema& schema, const MappingRule& rule,
                         const CuratedRecord& record) {
  const FeatureValue v = feature_value(record, rule.feature);
  if (rule.kind == ObjectKind::IntegerLiteral) return rdf::Term::integer(std::get<std::int64_t>(v));
  return category_iri(schema.ns, std::get<std::string>(v));
}

rdf::Graph build_graph(const std::vector<CuratedRecord>& records, const MappingSchema& schema) {
  check_complete(schema);
  rdf::Graph g(rdf::default_prefixes(schema.ns));
  std::vector<rdf::Term> predicates;
  for (const auto& rule : schema.rules) predicates.push_back(rdf::Term::iri(rule.predicate));
  for (const auto& record : records) {
    const rdf::Term subject = student_iri(schema.ns, record.student_index);
    for (std::size_t i = 0; i < schema.rules.size(); ++i) {
      g.insert({subject, predicates[i], feature_object(schema, schema.rules[i], record)});
    }
  }
  g.freeze();
  return g;
}

}  // namespace ekg::edu
