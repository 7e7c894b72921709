#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ekg/rdf/term.hpp"

namespace ekg::rdf {

inline constexpr const char* kDefaultNamespace = "http://www.example.org/";
inline constexpr const char* kDefaultPrefix = "ns1";

// Indexed set of triples with a two-phase lifecycle: insert while building,
// then freeze() to get an immutable snapshot that any number of readers may
// query concurrently.
class Graph {
 public:
  using PrefixMap = std::map<std::string, std::string>;

  Graph() = default;
  explicit Graph(PrefixMap prefixes) : prefixes_(std::move(prefixes)) {}

  // Returns false when the triple was already present.
  // Throws Error(FrozenGraph) after freeze().
  bool insert(const Triple& t);

  // Sorts the store and the three indexes; afterwards the graph is read-only.
  void freeze();
  bool frozen() const noexcept { return frozen_; }

  // Mutable copy with the same triples and prefixes.
  Graph thawed_copy() const;

  // All triples agreeing with every bound position, sorted by (s, p, o).
  std::vector<Triple> match(const std::optional<Term>& s, const std::optional<Term>& p,
                            const std::optional<Term>& o) const;

  // Number of triples `match` would return, without materializing them when
  // a single index answers the question.
  std::size_t count(const std::optional<Term>& s, const std::optional<Term>& p,
                    const std::optional<Term>& o) const;

  bool contains(const Triple& t) const { return set_.contains(t); }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  // Sorted once frozen; insertion order while building.
  const std::vector<Triple>& triples() const noexcept { return triples_; }

  const PrefixMap& prefixes() const noexcept { return prefixes_; }
  void set_prefix(const std::string& name, const std::string& base);

  // Equal triple sets and equal prefix maps.
  friend bool operator==(const Graph& a, const Graph& b);

 private:
  using Index = std::unordered_map<Term, std::vector<std::uint32_t>>;

  const std::vector<std::uint32_t>* lookup(const Index& index, const Term& key) const;
  void rebuild_indexes();

  std::vector<Triple> triples_;
  std::unordered_set<Triple> set_;
  Index by_subject_;
  Index by_predicate_;
  Index by_object_;
  PrefixMap prefixes_;
  bool frozen_ = false;
};

// Prefix map holding only the default `ns1:` namespace.
Graph::PrefixMap default_prefixes(const std::string& ns = kDefaultNamespace);

}  // namespace ekg::rdf
