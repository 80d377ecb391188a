#pragma once

// Compiles an AttackModel into the attack-type graph: one edge per
// may-prepare-for pair, each labelled with a DNF of equality constraints,
// plus the per-type tables the streaming engine and the hypothesizer run on:
//
//   correlation entries  (per edge)  src fact permutation -> dst fact subset
//   index_sets           (per type)  dst subsets that must be indexed,
//                                    expanded with the partial subsets
//                                    hypotheses can query
//   implicit_sets        (per type)  facts that future correlations depend on
//   hypothesis_sets      (per type)  (t, i, p, m, o) tuples

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atg/attack_model.hpp"

namespace atg {

struct FactPair {
  int src = 0;  // fact of the preparing type
  int dst = 0;  // fact of the prepared type

  friend bool operator==(const FactPair&, const FactPair&) = default;
  friend auto operator<=>(const FactPair&, const FactPair&) = default;
};

// Conjunction of fact equalities. Pairs are kept sorted by destination fact,
// which is also the canonical key order of the destination index.
struct EqualityConstraint {
  std::vector<FactPair> pairs;

  FactMask src_mask() const {
    FactMask m = 0;
    for (const FactPair& p : pairs) m |= FactMask{1} << p.src;
    return m;
  }
  FactMask dst_mask() const {
    FactMask m = 0;
    for (const FactPair& p : pairs) m |= FactMask{1} << p.dst;
    return m;
  }

  // The empty constraint is true on every pair.
  template <class SrcValues, class DstValues>
  bool holds(const SrcValues& src, const DstValues& dst) const {
    for (const FactPair& p : pairs)
      if (src[static_cast<std::size_t>(p.src)] != dst[static_cast<std::size_t>(p.dst)]) return false;
    return true;
  }

  friend bool operator==(const EqualityConstraint&, const EqualityConstraint&) = default;
  friend auto operator<=>(const EqualityConstraint&, const EqualityConstraint&) = default;
};

inline EqualityConstraint make_constraint(std::vector<FactPair> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const FactPair& a, const FactPair& b) { return a.dst < b.dst; });
  return EqualityConstraint{std::move(pairs)};
}

// src_perm[k] is paired with dst_subset[k]; dst_subset is ascending.
struct CorrelationEntry {
  std::vector<int> src_perm;
  std::vector<int> dst_subset;
  FactMask dst_mask = 0;

  friend bool operator==(const CorrelationEntry&, const CorrelationEntry&) = default;
};

struct TypeEdge {
  TypeId src = 0;
  TypeId dst = 0;
  std::vector<EqualityConstraint> constraints;
  std::vector<CorrelationEntry> entries;  // one per constraint, same order

  friend bool operator==(const TypeEdge&, const TypeEdge&) = default;
};

struct HypothesisTuple {
  TypeId source = 0;             // t
  std::size_t edge = 0;          // edge source -> destination
  std::size_t constraint = 0;    // constraint on that edge
  FactMask index = 0;            // i: facts of t bound by the mapping
  std::vector<FactPair> mapping; // p: dst fact -> t fact, for every fact in m
  FactMask known = 0;            // m
  FactMask required = 0;         // o: every dst fact the constraint mentions

  friend bool operator==(const HypothesisTuple&, const HypothesisTuple&) = default;
};

struct PartialIndex {
  FactMask origin = 0;  // full dst subset of the correlation entry
  FactMask subset = 0;  // strict, non-empty subset of origin also indexed

  friend bool operator==(const PartialIndex&, const PartialIndex&) = default;
};

struct TypeGraph {
  AttackModel model;
  std::vector<TypeEdge> edges;
  std::vector<std::vector<std::size_t>> out_edges;
  std::vector<std::vector<std::size_t>> in_edges;
  // Ordered largest subset first, then by mask.
  std::vector<std::vector<FactMask>> index_sets;
  // Masks searched when a fully bound alert arrives: the distinct dst
  // subsets of incoming correlation entries, empty subset excluded.
  std::vector<std::vector<FactMask>> search_sets;
  std::vector<std::vector<PartialIndex>> partial_indexes;
  std::vector<FactMask> implicit_sets;
  std::vector<std::vector<HypothesisTuple>> hypothesis_sets;

  std::size_t type_count() const { return model.types.size(); }

  const TypeEdge* find_edge(TypeId a, TypeId b) const {
    for (std::size_t e : out_edges[a])
      if (edges[e].dst == b) return &edges[e];
    return nullptr;
  }

  friend bool operator==(const TypeGraph&, const TypeGraph&) = default;
};

class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool larger_subset_first(FactMask a, FactMask b) {
  if (mask_size(a) != mask_size(b)) return mask_size(a) > mask_size(b);
  return a < b;
}

inline void sort_masks(std::vector<FactMask>& v) {
  std::sort(v.begin(), v.end(), larger_subset_first);
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Returns the type names along one cycle, or empty if the graph is a DAG.
inline std::vector<TypeId> find_cycle(std::size_t n, const std::vector<TypeEdge>& edges) {
  std::vector<std::vector<TypeId>> adj(n);
  for (const TypeEdge& e : edges) adj[e.src].push_back(e.dst);
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<TypeId> stack;
  std::vector<TypeId> cycle;
  auto dfs = [&](auto&& self, TypeId v) -> bool {
    state[v] = 1;
    stack.push_back(v);
    for (TypeId w : adj[v]) {
      if (state[w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycle.assign(it, stack.end());
        cycle.push_back(w);
        return true;
      }
      if (state[w] == 0 && self(self, w)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (TypeId v = 0; v < n; ++v)
    if (state[v] == 0 && dfs(dfs, v)) return cycle;
  return {};
}

}  // namespace detail

inline std::string describe_cycle(const AttackModel& m, const std::vector<TypeId>& cycle) {
  std::string out = "cyclic may-prepare-for: ";
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    if (k) out += " -> ";
    out += m.types[cycle[k]].name;
  }
  return out;
}

// Builds the derived tables for a fixed edge set. `edges` need only carry
// src, dst and constraints; entries are recomputed. Throws CompileError if
// the edges contain a cycle.
inline TypeGraph build(AttackModel model, std::vector<TypeEdge> edges) {
  const std::size_t n = model.types.size();
  if (auto cycle = detail::find_cycle(n, edges); !cycle.empty())
    throw CompileError(describe_cycle(model, cycle));

  TypeGraph tg;
  tg.out_edges.resize(n);
  tg.in_edges.resize(n);
  tg.index_sets.resize(n);
  tg.search_sets.resize(n);
  tg.partial_indexes.resize(n);
  tg.implicit_sets.assign(n, 0);
  tg.hypothesis_sets.resize(n);

  std::sort(edges.begin(), edges.end(), [](const TypeEdge& a, const TypeEdge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  for (std::size_t ei = 0; ei < edges.size(); ++ei) {
    TypeEdge& e = edges[ei];
    if (e.constraints.empty())
      throw CompileError("edge " + model.types[e.src].name + " -> " + model.types[e.dst].name +
                         " has no constraints");
    e.entries.clear();
    for (const EqualityConstraint& c : e.constraints) {
      CorrelationEntry entry;
      for (const FactPair& p : c.pairs) {
        entry.src_perm.push_back(p.src);
        entry.dst_subset.push_back(p.dst);
      }
      entry.dst_mask = c.dst_mask();
      e.entries.push_back(std::move(entry));
      tg.index_sets[e.dst].push_back(c.dst_mask());
      if (c.dst_mask() != 0) tg.search_sets[e.dst].push_back(c.dst_mask());
      tg.implicit_sets[e.src] |= c.src_mask();
    }
    tg.out_edges[e.src].push_back(ei);
    tg.in_edges[e.dst].push_back(ei);
  }

  // Hypothesis tuples, one per (incoming edge, constraint, non-empty subset
  // of the constraint's destination facts).
  for (TypeId dst = 0; dst < n; ++dst) {
    for (std::size_t ei : tg.in_edges[dst]) {
      const TypeEdge& e = edges[ei];
      for (std::size_t ci = 0; ci < e.constraints.size(); ++ci) {
        const EqualityConstraint& c = e.constraints[ci];
        const FactMask o = c.dst_mask();
        // Non-empty submasks of o in ascending numeric order.
        for (FactMask s = (FactMask{0} - o) & o; s != 0; s = (s - o) & o) {
          HypothesisTuple h;
          h.source = e.src;
          h.edge = ei;
          h.constraint = ci;
          h.known = s;
          h.required = o;
          for (const FactPair& p : c.pairs) {
            if (s & (FactMask{1} << p.dst)) {
              h.mapping.push_back(p);
              h.index |= FactMask{1} << p.src;
            }
          }
          tg.hypothesis_sets[dst].push_back(std::move(h));
        }
      }
    }
  }

  for (TypeId t = 0; t < n; ++t) {
    detail::sort_masks(tg.search_sets[t]);
  }

  // Expand index sets with the partial subsets hypotheses of type t query.
  for (TypeId dst = 0; dst < n; ++dst) {
    for (const HypothesisTuple& h : tg.hypothesis_sets[dst]) {
      const TypeId t = h.source;
      for (FactMask origin : tg.search_sets[t]) {
        const FactMask x = origin & h.index;
        if (x == 0 || x == origin) continue;
        PartialIndex pi{origin, x};
        auto& parts = tg.partial_indexes[t];
        if (std::find(parts.begin(), parts.end(), pi) == parts.end()) parts.push_back(pi);
        tg.index_sets[t].push_back(x);
      }
    }
  }
  for (TypeId t = 0; t < n; ++t) {
    detail::sort_masks(tg.index_sets[t]);
    std::sort(tg.partial_indexes[t].begin(), tg.partial_indexes[t].end(),
              [](const PartialIndex& a, const PartialIndex& b) {
                return std::pair(a.origin, a.subset) < std::pair(b.origin, b.subset);
              });
  }

  tg.model = std::move(model);
  tg.edges = std::move(edges);
  return tg;
}

// Constraints for the ordered pair (A, B): one per pair of instances of the
// same predicate in Conseq(A) and Prereq(B), deduplicated.
inline std::vector<EqualityConstraint> constraints_between(const HyperAlertType& a,
                                                           const HyperAlertType& b) {
  std::vector<EqualityConstraint> out;
  for (const PredicateInstance& c : a.conseq) {
    for (const PredicateInstance& p : b.prereq) {
      if (c.predicate != p.predicate) continue;
      std::vector<FactPair> pairs;
      for (std::size_t k = 0; k < c.args.size(); ++k) pairs.push_back({c.args[k], p.args[k]});
      EqualityConstraint ec = make_constraint(std::move(pairs));
      if (std::find(out.begin(), out.end(), ec) == out.end()) out.push_back(std::move(ec));
    }
  }
  return out;
}

// Expects a validated, implication-expanded model.
inline TypeGraph compile(const AttackModel& model) {
  std::vector<TypeEdge> edges;
  for (TypeId a = 0; a < model.types.size(); ++a) {
    for (TypeId b = 0; b < model.types.size(); ++b) {
      auto cs = constraints_between(model.types[a], model.types[b]);
      if (cs.empty()) continue;
      edges.push_back(TypeEdge{a, b, std::move(cs), {}});
    }
  }
  return build(model, std::move(edges));
}

inline std::size_t index_count(const TypeGraph& tg, TypeId t) { return tg.index_sets[t].size(); }

// ---------------------------------------------------------------------------
// Constraint counting.

using ClassCounts = std::map<std::string, unsigned>;

class CountOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Upper bound on distinct equality constraints on one ordered edge between
// two types with the given per-class fact counts:
//   prod_i sum_{j=0..c_i} P(c_i, j) * C(c_i, j)
inline std::uint64_t count_constraints(const ClassCounts& counts) {
  using wide = unsigned __int128;
  constexpr wide limit = std::numeric_limits<std::uint64_t>::max();
  auto checked_mul = [](wide a, wide b) {
    wide r = 0;
    if (__builtin_mul_overflow(a, b, &r) || r > limit)
      throw CountOverflow("constraint count exceeds 64 bits");
    return r;
  };
  wide product = 1;
  for (const auto& [cls, c] : counts) {
    wide sum = 0;
    wide perm = 1;   // P(c, j)
    wide choose = 1; // C(c, j)
    for (unsigned j = 0; j <= c; ++j) {
      if (j > 0) {
        perm = checked_mul(perm, c - j + 1);
        choose = checked_mul(choose, c - j + 1) / j;
      }
      sum += checked_mul(perm, choose);
      if (sum > limit) throw CountOverflow("constraint count exceeds 64 bits");
    }
    product = checked_mul(product, sum);
  }
  return static_cast<std::uint64_t>(product);
}

struct EnumeratedConstraints {
  AttackModel model;  // classes + two synthetic types "Src" and "Dst"
  std::vector<EqualityConstraint> constraints;
};

inline constexpr unsigned kEnumerateMaxPerClass = 5;

// Every syntactically valid constraint between two synthetic types whose
// facts have the given per-class counts. Test aid; guarded against blowup.
inline EnumeratedConstraints enumerate_constraints(const ClassCounts& counts) {
  EnumeratedConstraints out;
  HyperAlertType src{"Src", {}, {}, {}};
  HyperAlertType dst{"Dst", {}, {}, {}};
  std::vector<std::vector<int>> groups;  // fact positions per class
  for (const auto& [cls, c] : counts) {
    if (c > kEnumerateMaxPerClass)
      throw std::length_error("enumerate_constraints: more than " +
                              std::to_string(kEnumerateMaxPerClass) + " facts in class " + cls);
    const std::size_t ci = out.model.classes.size();
    out.model.classes.push_back({cls, Canonicalizer::integer});
    std::vector<int> g;
    for (unsigned k = 0; k < c; ++k) {
      g.push_back(static_cast<int>(src.facts.size()));
      src.facts.push_back({cls + "_" + std::to_string(k + 1), ci});
      dst.facts.push_back({cls + "_" + std::to_string(k + 1), ci});
    }
    groups.push_back(std::move(g));
  }
  if (src.facts.size() > kMaxFactsPerType)
    throw std::length_error("enumerate_constraints: too many facts");

  // Partial injections within each class, then the cartesian product.
  std::vector<std::vector<std::vector<FactPair>>> per_class;
  for (const std::vector<int>& g : groups) {
    std::vector<std::vector<FactPair>> all;
    std::vector<FactPair> cur;
    std::vector<bool> used(g.size(), false);
    auto rec = [&](auto&& self, std::size_t left) -> void {
      if (left == g.size()) {
        all.push_back(cur);
        return;
      }
      self(self, left + 1);
      for (std::size_t r = 0; r < g.size(); ++r) {
        if (used[r]) continue;
        used[r] = true;
        cur.push_back({g[left], g[r]});
        self(self, left + 1);
        cur.pop_back();
        used[r] = false;
      }
    };
    rec(rec, 0);
    per_class.push_back(std::move(all));
  }
  std::vector<FactPair> cur;
  auto product = [&](auto&& self, std::size_t k) -> void {
    if (k == per_class.size()) {
      out.constraints.push_back(make_constraint(cur));
      return;
    }
    for (const auto& part : per_class[k]) {
      cur.insert(cur.end(), part.begin(), part.end());
      self(self, k + 1);
      cur.resize(cur.size() - part.size());
    }
  };
  product(product, 0);

  out.model.types.push_back(std::move(src));
  out.model.types.push_back(std::move(dst));
  return out;
}

// Graph over the two synthetic types with every possible constraint on the
// single edge Src -> Dst.
inline TypeGraph worst_case_graph(const ClassCounts& counts) {
  EnumeratedConstraints ec = enumerate_constraints(counts);
  std::vector<TypeEdge> edges{TypeEdge{0, 1, std::move(ec.constraints), {}}};
  return build(std::move(ec.model), std::move(edges));
}

// ---------------------------------------------------------------------------
// Reports.

inline std::string render_mask(const HyperAlertType& t, FactMask m) {
  std::string out = "{";
  bool first = true;
  for (int p : mask_positions(m)) {
    if (!first) out += ",";
    out += t.facts[static_cast<std::size_t>(p)].name;
    first = false;
  }
  return out + "}";
}

inline std::string render_constraint(const HyperAlertType& a, const HyperAlertType& b,
                                     const EqualityConstraint& c) {
  if (c.pairs.empty()) return "true";
  std::string out;
  for (std::size_t k = 0; k < c.pairs.size(); ++k) {
    if (k) out += " & ";
    out += a.name + "." + a.facts[static_cast<std::size_t>(c.pairs[k].src)].name + "=" + b.name +
           "." + b.facts[static_cast<std::size_t>(c.pairs[k].dst)].name;
  }
  return out;
}

inline std::string compile_report(const TypeGraph& tg) {
  const AttackModel& m = tg.model;
  std::ostringstream os;
  os << "types " << m.types.size() << "\n";
  os << "edges " << tg.edges.size() << "\n";
  for (const TypeEdge& e : tg.edges) {
    const HyperAlertType& a = m.types[e.src];
    const HyperAlertType& b = m.types[e.dst];
    os << "edge " << a.name << " -> " << b.name << " constraints=" << e.constraints.size() << "\n";
    for (const EqualityConstraint& c : e.constraints)
      os << "  " << render_constraint(a, b, c) << "\n";
  }
  for (TypeId t = 0; t < m.types.size(); ++t) {
    const HyperAlertType& ty = m.types[t];
    os << "type " << ty.name << " in=" << tg.in_edges[t].size() << " out=" << tg.out_edges[t].size()
       << " indexes=" << tg.index_sets[t].size() << " implicit=" << render_mask(ty, tg.implicit_sets[t])
       << " hypotheses=" << tg.hypothesis_sets[t].size() << "\n";
    if (!tg.index_sets[t].empty()) {
      os << "  index";
      for (FactMask x : tg.index_sets[t]) os << ' ' << render_mask(ty, x);
      os << "\n";
    }
  }
  return os.str();
}

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline std::string type_graph_dot(const TypeGraph& tg) {
  std::ostringstream os;
  os << "digraph type_graph {\n";
  for (const HyperAlertType& t : tg.model.types) os << "  \"" << dot_escape(t.name) << "\";\n";
  for (const TypeEdge& e : tg.edges) {
    os << "  \"" << dot_escape(tg.model.types[e.src].name) << "\" -> \""
       << dot_escape(tg.model.types[e.dst].name) << "\" [label=\"" << e.constraints.size()
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace atg
