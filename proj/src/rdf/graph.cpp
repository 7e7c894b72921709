#include "ekg/rdf/graph.hpp"

#include <algorithm>

#include "ekg/error.hpp"

namespace ekg::rdf {

bool Graph::insert(const Triple& t) {
  if (frozen_) throw Error(ErrorCode::FrozenGraph, "insert into a frozen graph");
  if (!set_.insert(t).second) return false;
  const auto id = static_cast<std::uint32_t>(triples_.size());
  triples_.push_back(t);
  by_subject_[t.subject].push_back(id);
  by_predicate_[t.predicate].push_back(id);
  by_object_[t.object].push_back(id);
  return true;
}

void Graph::freeze() {
  if (frozen_) return;
  std::sort(triples_.begin(), triples_.end());
  rebuild_indexes();
  frozen_ = true;
}

void Graph::rebuild_indexes() {
  by_subject_.clear();
  by_predicate_.clear();
  by_object_.clear();
  for (std::uint32_t id = 0; id < triples_.size(); ++id) {
    const Triple& t = triples_[id];
    by_subject_[t.subject].push_back(id);
    by_predicate_[t.predicate].push_back(id);
    by_object_[t.object].push_back(id);
  }
}

Graph Graph::thawed_copy() const {
  Graph copy = *this;
  copy.frozen_ = false;
  return copy;
}

void Graph::set_prefix(const std::string& name, const std::string& base) {
  if (frozen_) throw Error(ErrorCode::FrozenGraph, "prefix change on a frozen graph");
  prefixes_[name] = base;
}

const std::vector<std::uint32_t>* Graph::lookup(const Index& index, const Term& key) const {
  static const std::vector<std::uint32_t> kEmpty;
  auto it = index.find(key);
  return it == index.end() ? &kEmpty : &it->second;
}

std::vector<Triple> Graph::match(const std::optional<Term>& s, const std::optional<Term>& p,
                                 const std::optional<Term>& o) const {
  std::vector<Triple> out;
  if (!s && !p && !o) {
    out = triples_;
    if (!frozen_) std::sort(out.begin(), out.end());
    return out;
  }

  // Drive from the shortest posting list among the bound positions.
  const std::vector<std::uint32_t>* ids = nullptr;
  auto consider = [&](const std::optional<Term>& key, const Index& index) {
    if (!key) return;
    const auto* candidate = lookup(index, *key);
    if (ids == nullptr || candidate->size() < ids->size()) ids = candidate;
  };
  consider(s, by_subject_);
  consider(p, by_predicate_);
  consider(o, by_object_);

  for (std::uint32_t id : *ids) {
    const Triple& t = triples_[id];
    if (s && t.subject != *s) continue;
    if (p && t.predicate != *p) continue;
    if (o && t.object != *o) continue;
    out.push_back(t);
  }
  // Posting lists are in store order, which is sorted once frozen.
  if (!frozen_) std::sort(out.begin(), out.end());
  return out;
}

std::size_t Graph::count(const std::optional<Term>& s, const std::optional<Term>& p,
                         const std::optional<Term>& o) const {
  const int bound = int(s.has_value()) + int(p.has_value()) + int(o.has_value());
  if (bound == 0) return triples_.size();
  if (bound == 1) {
    if (s) return lookup(by_subject_, *s)->size();
    if (p) return lookup(by_predicate_, *p)->size();
    return lookup(by_object_, *o)->size();
  }
  if (bound == 3) {
    if (!s->is_iri() || !p->is_iri()) return 0;
    return contains(Triple(*s, *p, *o)) ? 1 : 0;
  }
  return match(s, p, o).size();
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.size() != b.size() || a.prefixes_ != b.prefixes_) return false;
  return std::all_of(a.triples_.begin(), a.triples_.end(),
                     [&](const Triple& t) { return b.contains(t); });
}

Graph::PrefixMap default_prefixes(const std::string& ns) {
  return {{kDefaultPrefix, ns}};
}

}  // namespace ekg::rdf
