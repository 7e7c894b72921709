#include "ekg/edu/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ekg/error.hpp"
#include "ekg/text/scanner.hpp"

namespace ekg::edu {

namespace {

bool valid_segment(std::string_view s) {
  if (s.empty() || !text::is_name_start(s.front())) return false;
  for (char c : s) {
    if (!text::is_name_char(c)) return false;
  }
  return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto end = s.find(sep, start);
    out.emplace_back(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (end == std::string_view::npos) return out;
    start = end + 1;
  }
}

bool matches(const Concept& c, std::string_view segment) {
  if (c.name == segment) return true;
  for (const auto& a : c.aliases) {
    if (a == segment) return true;
  }
  return false;
}

}  // namespace

const Concept* Taxonomy::find(std::string_view path) const {
  if (concepts_.empty()) return nullptr;
  if (auto it = index_.find(path); it != index_.end()) return &concepts_[it->second];
  const auto segments = split(path, '.');
  if (!matches(concepts_[0], segments[0])) return nullptr;
  const Concept* current = &concepts_[0];
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const Concept* next = nullptr;
    for (auto child : current->children) {
      if (matches(concepts_[child], segments[i])) {
        next = &concepts_[child];
        break;
      }
    }
    if (next == nullptr) return nullptr;
    current = next;
  }
  return current;
}

const Concept& Taxonomy::resolve(std::string_view path) const {
  if (const Concept* c = find(path)) return *c;
  throw Error(ErrorCode::UnknownConcept, "unknown concept '" + std::string(path) + "'");
}

Taxonomy load_taxonomy(std::string_view text) {
  Taxonomy t;
  std::set<std::string> stated;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string tok; words >> tok;) w.push_back(tok);
    if (w.empty()) continue;
    auto fail = [&](const std::string& msg) { throw ParseError({line_no, 1}, msg); };

    std::vector<std::string> aliases;
    if (w.size() == 2 && w[1].starts_with("alias=")) {
      aliases = split(std::string_view(w[1]).substr(6), ',');
      for (const auto& a : aliases) {
        if (!valid_segment(a)) fail("invalid alias '" + a + "'");
      }
    } else if (w.size() != 1) {
      fail("expected '<dotted.path> [alias=a,b]'");
    }
    const auto segments = split(w[0], '.');
    for (const auto& s : segments) {
      if (!valid_segment(s)) fail("invalid path segment '" + s + "' in '" + w[0] + "'");
    }
    if (segments[0] != kTaxonomyRoot) {
      fail("every path must start at the root '" + std::string(kTaxonomyRoot) + "', found '" +
           segments[0] + "'");
    }
    if (!stated.insert(w[0]).second) {
      throw Error(ErrorCode::DuplicatePath,
                  std::to_string(line_no) + ": path '" + w[0] + "' stated twice");
    }

    if (t.concepts_.empty()) {
      t.concepts_.push_back({segments[0], segments[0], {}, std::nullopt, {}});
      t.index_.emplace(segments[0], 0);
    }
    std::size_t current = 0;
    std::string path = segments[0];
    for (std::size_t i = 1; i < segments.size(); ++i) {
      path += "." + segments[i];
      auto it = t.index_.find(path);
      if (it != t.index_.end()) {
        current = it->second;
        continue;
      }
      for (auto sib : t.concepts_[current].children) {
        if (matches(t.concepts_[sib], segments[i])) {
          fail("name '" + segments[i] + "' clashes with an alias of '" + t.concepts_[sib].path + "'");
        }
      }
      const std::size_t id = t.concepts_.size();
      t.concepts_.push_back({segments[i], path, {}, current, {}});
      t.concepts_[current].children.push_back(id);
      t.index_.emplace(path, id);
      current = id;
    }

    Concept& target = t.concepts_[current];
    for (const auto& a : aliases) {
      if (a == target.name ||
          std::find(target.aliases.begin(), target.aliases.end(), a) != target.aliases.end()) {
        fail("alias '" + a + "' repeats a name of '" + target.path + "'");
      }
      // Siblings must stay distinguishable under any spelling.
      if (target.parent) {
        for (auto sib : t.concepts_[*target.parent].children) {
          if (sib != current && matches(t.concepts_[sib], a)) {
            fail("alias '" + a + "' clashes with sibling '" + t.concepts_[sib].path + "'");
          }
        }
      }
      target.aliases.push_back(a);
    }
  }
  if (t.concepts_.empty()) throw ParseError({line_no + 1, 1}, "taxonomy has no concepts");

  // Renumber depth-first so equal trees compare equal regardless of the
  // order in which lines implied their ancestors.
  std::vector<std::size_t> order;
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    order.push_back(i);
    for (auto c : t.concepts_[i].children) walk(c);
  };
  walk(0);
  std::vector<std::size_t> renumber(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) renumber[order[k]] = k;
  Taxonomy sorted;
  for (auto old : order) {
    Concept c = t.concepts_[old];
    if (c.parent) c.parent = renumber[*c.parent];
    for (auto& child : c.children) child = renumber[child];
    sorted.index_.emplace(c.path, sorted.concepts_.size());
    sorted.concepts_.push_back(std::move(c));
  }
  return sorted;
}

Taxonomy load_taxonomy_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_taxonomy(ss.str());
}

std::string print_taxonomy(const Taxonomy& t) {
  std::ostringstream out;
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    const Concept& c = t.concepts()[i];
    out << c.path;
    for (std::size_t k = 0; k < c.aliases.size(); ++k) out << (k ? "," : " alias=") << c.aliases[k];
    out << '\n';
    for (auto child : c.children) walk(child);
  };
  if (t.size() > 0) walk(0);
  return out.str();
}

}  // namespace ekg::edu
