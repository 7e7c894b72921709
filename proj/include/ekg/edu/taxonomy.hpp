#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ekg::edu {

inline constexpr const char* kTaxonomyRoot = "Creativity";

struct Concept {
  std::string name;
  std::string path;                  // dotted, from the root
  std::vector<std::string> aliases;  // alternative spellings of `name`
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children; // in order of first mention

  friend bool operator==(const Concept&, const Concept&) = default;
};

// Concept tree with a single root. Immutable once loaded.
class Taxonomy {
 public:
  const Concept& root() const { return concepts_.front(); }
  const std::vector<Concept>& concepts() const noexcept { return concepts_; }
  std::size_t size() const noexcept { return concepts_.size(); }

  // Each segment may be a name or an alias. nullptr when nothing matches.
  const Concept* find(std::string_view path) const;
  // Same as find, but throws Error(UnknownConcept).
  const Concept& resolve(std::string_view path) const;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

 private:
  friend Taxonomy load_taxonomy(std::string_view text);

  std::vector<Concept> concepts_;  // depth-first order; index 0 is the root
  std::map<std::string, std::size_t, std::less<>> index_;  // canonical path -> concept
};

// One dotted path per line; `#` starts a comment; an optional trailing
// `alias=a,b` names alternative spellings of the last segment. Missing
// ancestors are created. Throws ParseError for malformed lines or a second
// root, Error(DuplicatePath) for a path stated twice.
Taxonomy load_taxonomy(std::string_view text);
Taxonomy load_taxonomy_file(const std::filesystem::path& path);

// Every concept in depth-first order, one per line with its aliases.
// load_taxonomy(print_taxonomy(t)) == t.
std::string print_taxonomy(const Taxonomy& t);

}  // namespace ekg::edu
