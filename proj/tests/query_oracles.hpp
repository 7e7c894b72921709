#pragma once

// Test-only generators and the nested-loop BGP oracle. Nothing here touches
// the graph indexes or the join planner.

#include <algorithm>
#include <random>
#include <vector>

#include "ekg/rdf/graph.hpp"
#include "ekg/sparql/eval.hpp"
#include "ekg/sparql/query.hpp"
#include "test_support.hpp"

namespace ekg::testing {

using sparql::BasicGraphPattern;
using sparql::PatternTerm;
using sparql::Solution;
using sparql::TriplePattern;
using sparql::Variable;

// Scans every triple for every pattern in the written order and unifies
// position by position.
inline std::vector<Solution> nested_loop_bgp(const rdf::Graph& g, const BasicGraphPattern& bgp) {
  std::vector<Solution> partial = {Solution{}};
  for (const TriplePattern& tp : bgp.patterns) {
    std::vector<Solution> next;
    for (const Solution& s : partial) {
      for (const rdf::Triple& t : g.triples()) {
        Solution candidate = s;
        bool ok = true;
        auto unify = [&](const PatternTerm& pt, const rdf::Term& value) {
          if (const auto* v = std::get_if<Variable>(&pt)) {
            auto [it, inserted] = candidate.emplace(v->name, value);
            if (!inserted && it->second != value) ok = false;
          } else if (std::get<rdf::Term>(pt) != value) {
            ok = false;
          }
        };
        unify(tp.subject, t.subject);
        if (ok) unify(tp.predicate, t.predicate);
        if (ok) unify(tp.object, t.object);
        if (ok) next.push_back(std::move(candidate));
      }
    }
    partial = std::move(next);
  }
  std::sort(partial.begin(), partial.end());
  return partial;
}

// Patterns over variables ?v0..?v3 and constants drawn from `g`; later
// patterns usually reuse an earlier variable so result sizes stay small.
inline BasicGraphPattern random_bgp(std::mt19937_64& rng, const rdf::Graph& g, std::size_t n) {
  BasicGraphPattern bgp;
  std::vector<std::string> used;
  auto pick_triple = [&]() -> const rdf::Triple& { return g.triples()[rng() % g.size()]; };
  auto var = [&](bool prefer_used) {
    if (prefer_used && !used.empty() && rng() % 4 != 0) return Variable{used[rng() % used.size()]};
    std::string name = "v" + std::to_string(rng() % 4);
    if (std::find(used.begin(), used.end(), name) == used.end()) used.push_back(name);
    return Variable{name};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const rdf::Triple& t = pick_triple();
    TriplePattern tp;
    const bool connect = i > 0;
    tp.subject = rng() % 3 == 0 ? PatternTerm(t.subject) : PatternTerm(var(connect));
    tp.predicate = rng() % 4 == 0 ? PatternTerm(var(false)) : PatternTerm(t.predicate);
    switch (rng() % 4) {
      case 0: tp.object = t.object; break;
      case 1: tp.object = pick_triple().object; break;
      default: tp.object = var(connect && rng() % 2 == 0);
    }
    bgp.patterns.push_back(std::move(tp));
  }
  return bgp;
}

inline rdf::Term random_constant(std::mt19937_64& rng) {
  switch (rng() % 6) {
    case 0: return ns("c" + std::to_string(rng() % 5));
    case 1: return rdf::Term::iri("urn:x:" + std::to_string(rng() % 5));
    case 2: return rdf::Term::integer(static_cast<std::int64_t>(rng() % 41) - 20);
    case 3: return rdf::Term::boolean(rng() % 2 == 0);
    case 4: return rdf::Term::string(rng() % 3 ? "B" : "tricky \"q\" \\ \n");
    default: return ns(std::vector<std::string>{"Low-Level", "Middle-Level", "High-Level"}[rng() % 3]);
  }
}

inline sparql::FilterExpr random_filter(std::mt19937_64& rng, const std::vector<std::string>& vars,
                                        int depth) {
  using sparql::FilterExpr;
  const int choice = depth <= 0 ? static_cast<int>(rng() % 2) : static_cast<int>(rng() % 5);
  auto operand = [&]() -> PatternTerm {
    if (!vars.empty() && rng() % 3 != 0) return Variable{vars[rng() % vars.size()]};
    return random_constant(rng);
  };
  switch (choice) {
    case 0: {
      if (rng() % 8 == 0) return FilterExpr::value(rng() % 2 == 0);
      auto op = static_cast<sparql::CompareOp>(rng() % 6);
      return FilterExpr::compare(operand(), op, operand());
    }
    case 1: return FilterExpr::value(rng() % 2 == 0);
    case 2: return FilterExpr::negation(random_filter(rng, vars, depth - 1));
    case 3:
      return FilterExpr::conjunction(random_filter(rng, vars, depth - 1),
                                     random_filter(rng, vars, depth - 1));
    default:
      return FilterExpr::disjunction(random_filter(rng, vars, depth - 1),
                                     random_filter(rng, vars, depth - 1));
  }
}

// A query that passes parse-time validation. With `g` the patterns draw
// constants from the graph so evaluation is non-trivial.
inline sparql::Query random_query(std::mt19937_64& rng, const rdf::Graph* g = nullptr) {
  sparql::Query q;
  q.prefixes = rdf::default_prefixes();
  if (rng() % 2) q.prefixes["x"] = "urn:x:";
  if (g != nullptr && !g->empty()) {
    q.where = random_bgp(rng, *g, 1 + rng() % 3);
  } else {
    const std::size_t n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      auto pos = [&]() -> PatternTerm {
        if (rng() % 2) return Variable{"v" + std::to_string(rng() % 4)};
        return random_constant(rng);
      };
      PatternTerm pred = rng() % 3 ? PatternTerm(ns("p" + std::to_string(rng() % 3)))
                                   : PatternTerm(Variable{"p" + std::to_string(rng() % 2)});
      q.where.patterns.push_back({pos(), pred, pos()});
    }
  }
  const auto vars = q.where.variables();

  const std::size_t filters = rng() % 3;
  for (std::size_t i = 0; i < filters; ++i) q.filters.push_back(random_filter(rng, vars, 2));

  switch (rng() % 3) {
    case 0: {
      sparql::SelectForm form;
      form.distinct = rng() % 2;
      for (const auto& v : vars) {
        if (rng() % 2 || form.projection.empty()) form.projection.push_back(Variable{v});
      }
      q.form = form;
      if (!vars.empty() && rng() % 2) {
        q.order = sparql::OrderBy{Variable{vars[rng() % vars.size()]}, rng() % 2 == 0};
      }
      if (rng() % 2) q.limit = rng() % 10;
      break;
    }
    case 1: {
      sparql::ConstructForm form;
      form.templ.patterns.push_back(
          {vars.empty() ? PatternTerm(ns("s")) : PatternTerm(Variable{vars[0]}), ns("made"),
           random_constant(rng)});
      q.form = form;
      break;
    }
    default: q.form = sparql::AskForm{};
  }
  return q;
}

}  // namespace ekg::testing
