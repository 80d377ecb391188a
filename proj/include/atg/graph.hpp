#pragma once

// Output correlation graph. Vertices are real or hypothesized hyper-alerts;
// an edge (a, b) means a prepares for b. Edges may only point forward in
// sequence order, so the graph is acyclic by construction.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "atg/attack_model.hpp"
#include "atg/type_graph.hpp"
#include "atg/value.hpp"

namespace atg {

enum class Origin : std::uint8_t { real, hypothesized };

struct Vertex {
  std::string id;
  TypeId type = 0;
  Timestamp ts = 0;
  std::uint64_t seq = 0;
  Origin origin = Origin::real;
  FactMask known = 0;        // attrs[k] is meaningful iff bit k is set
  std::vector<Value> attrs;  // one slot per declared fact
  std::vector<std::string> aggregated;
  std::uint32_t in_degree = 0;
  std::uint32_t out_degree = 0;
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Edge = std::pair<VertexId, VertexId>;

class CorrelationGraph {
 public:
  VertexId add_vertex(Vertex v) {
    v.in_degree = 0;
    v.out_degree = 0;
    vertices_.push_back(std::move(v));
    return static_cast<VertexId>(vertices_.size() - 1);
  }

  // Returns true if the edge is new. Duplicates are ignored.
  bool add_edge(VertexId src, VertexId dst) {
    if (src >= vertices_.size() || dst >= vertices_.size())
      throw GraphError("add_edge: unknown vertex");
    if (vertices_[src].seq >= vertices_[dst].seq)
      throw GraphError("add_edge: " + vertices_[src].id + " does not precede " + vertices_[dst].id);
    if (!edge_set_.insert(pack(src, dst)).second) return false;
    edges_.emplace_back(src, dst);
    ++vertices_[src].out_degree;
    ++vertices_[dst].in_degree;
    return true;
  }

  bool has_edge(VertexId src, VertexId dst) const { return edge_set_.count(pack(src, dst)) != 0; }

  void append_aggregated(VertexId v, std::string raw_id) {
    vertices_.at(v).aggregated.push_back(std::move(raw_id));
  }

  const Vertex& vertex(VertexId v) const { return vertices_.at(v); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

 private:
  static std::uint64_t pack(VertexId a, VertexId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::unordered_set<std::uint64_t> edge_set_;
};

// A subset of a graph's vertices, sorted by sequence, together with all of
// the graph's edges.
struct GraphView {
  const CorrelationGraph* graph = nullptr;
  std::vector<VertexId> vertices;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t edge_count() const { return graph->edge_count(); }
};

namespace detail {
inline void sort_by_seq(const CorrelationGraph& g, std::vector<VertexId>& vs) {
  std::stable_sort(vs.begin(), vs.end(),
                   [&](VertexId a, VertexId b) { return g.vertex(a).seq < g.vertex(b).seq; });
}
}  // namespace detail

inline GraphView full_view(const CorrelationGraph& g) {
  GraphView v{&g, {}};
  v.vertices.reserve(g.vertex_count());
  for (VertexId i = 0; i < g.vertex_count(); ++i) v.vertices.push_back(i);
  detail::sort_by_seq(g, v.vertices);
  return v;
}

// Drops vertices with no incident edge.
inline GraphView prune_trivial(const CorrelationGraph& g) {
  GraphView v{&g, {}};
  for (VertexId i = 0; i < g.vertex_count(); ++i) {
    const Vertex& x = g.vertex(i);
    if (x.in_degree + x.out_degree > 0) v.vertices.push_back(i);
  }
  detail::sort_by_seq(g, v.vertices);
  return v;
}

inline std::string bound_facts_text(const AttackModel& m, const ValueCodec& codec, const Vertex& v,
                                    char sep = ',') {
  std::string out;
  const HyperAlertType& t = m.types[v.type];
  for (std::size_t k = 0; k < t.facts.size(); ++k) {
    if (!(v.known & (FactMask{1} << k))) continue;
    if (!out.empty()) out.push_back(sep);
    out += t.facts[k].name + "=" +
           codec.to_text(m.classes[t.facts[k].fact_class].canonicalizer, v.attrs[k]);
  }
  return out;
}

inline void write_dot(std::ostream& os, const GraphView& view, const AttackModel& m,
                      const ValueCodec& codec) {
  const CorrelationGraph& g = *view.graph;
  os << "digraph correlation {\n";
  for (VertexId id : view.vertices) {
    const Vertex& v = g.vertex(id);
    std::string label = m.types[v.type].name + "\n" + v.id;
    const std::string facts = bound_facts_text(m, codec, v, '\n');
    if (!facts.empty()) label += "\n" + facts;
    std::string escaped;
    for (char c : dot_escape(label)) {
      if (c == '\n')
        escaped += "\\n";
      else
        escaped.push_back(c);
    }
    os << "  \"" << dot_escape(v.id) << "\" [label=\"" << escaped << "\"";
    if (v.origin == Origin::hypothesized) os << ", style=dashed";
    os << "];\n";
  }
  std::vector<Edge> edges = g.edges();
  std::sort(edges.begin(), edges.end());
  for (const Edge& e : edges)
    os << "  \"" << dot_escape(g.vertex(e.first).id) << "\" -> \"" << dot_escape(g.vertex(e.second).id)
       << "\";\n";
  os << "}\n";
}

inline nlohmann::json attr_json(Canonicalizer c, const ValueCodec& codec, Value v) {
  if (c == Canonicalizer::integer) return static_cast<std::int64_t>(v);
  return codec.to_text(c, v);
}

// One record per line: nodes sorted by sequence, then edges sorted by
// (source sequence, destination sequence). Keys within a record are sorted.
inline void write_canonical(std::ostream& os, const GraphView& view, const AttackModel& m,
                            const ValueCodec& codec) {
  const CorrelationGraph& g = *view.graph;
  for (VertexId id : view.vertices) {
    const Vertex& v = g.vertex(id);
    const HyperAlertType& t = m.types[v.type];
    nlohmann::json attrs = nlohmann::json::object();
    for (std::size_t k = 0; k < t.facts.size(); ++k) {
      if (!(v.known & (FactMask{1} << k))) continue;
      attrs[t.facts[k].name] = attr_json(m.classes[t.facts[k].fact_class].canonicalizer, codec, v.attrs[k]);
    }
    nlohmann::json rec = {{"kind", "node"},
                          {"id", v.id},
                          {"type", t.name},
                          {"ts", v.ts},
                          {"seq", v.seq},
                          {"origin", v.origin == Origin::real ? "real" : "hypothesized"},
                          {"attrs", std::move(attrs)},
                          {"aggregated", v.aggregated}};
    os << rec.dump() << '\n';
  }
  std::vector<Edge> edges = g.edges();
  std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
    return std::pair(g.vertex(a.first).seq, g.vertex(a.second).seq) <
           std::pair(g.vertex(b.first).seq, g.vertex(b.second).seq);
  });
  for (const Edge& e : edges) {
    nlohmann::json rec = {{"kind", "edge"}, {"src", g.vertex(e.first).id}, {"dst", g.vertex(e.second).id}};
    os << rec.dump() << '\n';
  }
}

inline std::string export_dot(const GraphView& view, const AttackModel& m, const ValueCodec& codec) {
  std::ostringstream os;
  write_dot(os, view, m, codec);
  return os.str();
}

inline std::string export_canonical(const GraphView& view, const AttackModel& m,
                                    const ValueCodec& codec) {
  std::ostringstream os;
  write_canonical(os, view, m, codec);
  return os.str();
}

}  // namespace atg
