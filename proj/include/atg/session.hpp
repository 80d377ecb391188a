#pragma once

// Streaming correlation state. Include "atg/engine.hpp" to get the
// definitions of Session::process_alert and the hypothesizer.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atg/graph.hpp"
#include "atg/keyed_index.hpp"
#include "atg/type_graph.hpp"
#include "atg/value.hpp"

namespace atg {

struct EngineConfig {
  bool implicit_correlation = true;
  bool hypothesize = false;
  bool consolidate_hypotheses = false;

  void check() const {
    if (consolidate_hypotheses && !hypothesize)
      throw std::invalid_argument("consolidate_hypotheses requires hypothesize");
  }

  // Named variants of the two algorithms: 1a, 1b, 2a, 2b.
  static EngineConfig variant(std::string_view name) {
    if (name == "1a") return {false, false, false};
    if (name == "1b") return {true, false, false};
    if (name == "2a") return {true, true, false};
    if (name == "2b") return {true, true, true};
    throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
  }
};

// A fully bound, canonicalized input alert. An empty id is replaced by
// "a<arrival index>".
struct InputAlert {
  std::string id;
  TypeId type = 0;
  Timestamp ts = 0;
  std::vector<Value> attrs;
};

struct Event {
  enum class Kind { correlated, aggregated, hypothesized, error };
  Kind kind = Kind::error;
  VertexId src = 0;  // correlated: preparing vertex
  VertexId dst = 0;  // correlated: prepared vertex; aggregated/hypothesized: the vertex
  std::string text;  // aggregated: raw alert id; error: reason
};

class Hypothesizer;

class Session {
 public:
  Session(const TypeGraph& tg, EngineConfig config) : tg_(&tg), config_(config) {
    config_.check();
    const std::size_t n = tg.type_count();
    types_.resize(n);
    presence_.resize(tg.edges.size());
    for (TypeId t = 0; t < n; ++t) {
      TypeState& st = types_[t];
      for (FactMask m : tg.index_sets[t]) {
        if (m == 0) continue;
        st.indexes.push_back(IndexSlot{m, mask_positions(m), CorrIndex(static_cast<std::size_t>(mask_size(m)))});
      }
      for (FactMask m : tg.search_sets[t]) st.search.push_back(slot_of(st, m));
      for (std::size_t e : tg.in_edges[t])
        for (const CorrelationEntry& ce : tg.edges[e].entries)
          if (ce.dst_mask == 0) st.empty_in_edges.push_back(e);
      st.implicit_positions = mask_positions(tg.implicit_sets[t]);
      st.implicit = KeyedIndex<VertexId>(st.implicit_positions.size());
    }
    for (TypeId t = 0; t < n; ++t) {
      TypeState& st = types_[t];
      for (std::size_t e : tg.out_edges[t]) {
        const TypeEdge& edge = tg.edges[e];
        TypeState& dst = types_[edge.dst];
        for (const CorrelationEntry& ce : edge.entries) {
          Mark mk;
          mk.edge = e;
          mk.dst = edge.dst;
          mk.origin = ce.dst_mask;
          mk.src_perm = ce.src_perm;
          for (int f : ce.src_perm) mk.src_mask |= FactMask{1} << f;
          if (ce.dst_mask != 0) {
            mk.slot = slot_of(dst, ce.dst_mask);
            // Partial keys only serve hypothesis anchor lookups.
            for (const PartialIndex& pi : tg.partial_indexes[edge.dst]) {
              if (!config_.hypothesize) break;
              if (pi.origin != ce.dst_mask) continue;
              Mark::Partial part;
              part.slot = slot_of(dst, pi.subset);
              for (std::size_t k = 0; k < ce.dst_subset.size(); ++k)
                if (pi.subset & (FactMask{1} << ce.dst_subset[k])) part.src_positions.push_back(ce.src_perm[k]);
              mk.partial.push_back(std::move(part));
            }
          }
          st.marks.push_back(std::move(mk));
        }
      }
    }
  }

  // Processes one alert in stream order, appending the events it causes.
  // Rejected alerts leave the session unchanged and produce one error event.
  void process_alert(const InputAlert& alert, std::vector<Event>& events);

  std::vector<Event> process_alert(const InputAlert& alert) {
    std::vector<Event> events;
    process_alert(alert, events);
    return events;
  }

  const CorrelationGraph& graph() const { return graph_; }
  const TypeGraph& type_graph() const { return *tg_; }
  const EngineConfig& config() const { return config_; }

  std::uint64_t alerts_in() const { return arrivals_; }
  std::uint64_t aggregated_count() const { return aggregated_; }
  std::uint64_t hypothesis_count() const { return hypotheses_; }
  Timestamp last_ts() const { return last_ts_; }

  // Number of keyed correlation indexes (presence lists for empty
  // constraints are not counted).
  std::size_t index_map_count() const {
    std::size_t n = 0;
    for (const TypeState& st : types_) n += st.indexes.size();
    return n;
  }

  std::size_t index_entry_count() const {
    std::size_t n = 0;
    for (const TypeState& st : types_)
      for (const IndexSlot& s : st.indexes) n += s.index.entry_count();
    for (const auto& p : presence_) n += p.size();
    return n;
  }

 private:
  friend class Hypothesizer;

  static constexpr int kSeqShift = 24;
  static constexpr std::uint64_t kMaxHypothesesPerAlert = (std::uint64_t{1} << kSeqShift) - 1;

  struct Hit {
    VertexId vertex;
    FactMask origin;  // dst subset of the correlation entry that inserted it
  };
  using CorrIndex = KeyedIndex<Hit>;

  struct IndexSlot {
    FactMask mask;
    std::vector<int> positions;
    CorrIndex index;
  };

  // How an alert of this type marks one of its consequences.
  struct Mark {
    struct Partial {
      std::size_t slot = 0;
      std::vector<int> src_positions;
    };
    std::size_t edge = 0;
    TypeId dst = 0;
    FactMask origin = 0;
    FactMask src_mask = 0;
    std::vector<int> src_perm;
    std::size_t slot = 0;
    std::vector<Partial> partial;
  };

  struct TypeState {
    std::vector<IndexSlot> indexes;  // same order as index_sets, empty subset excluded
    std::vector<std::size_t> search;
    std::vector<std::size_t> empty_in_edges;
    std::vector<int> implicit_positions;
    KeyedIndex<VertexId> implicit{0};
    std::map<FactMask, KeyedIndex<VertexId>> hypo_db;
    std::vector<Mark> marks;
  };

  static std::size_t slot_of(const TypeState& st, FactMask m) {
    for (std::size_t i = 0; i < st.indexes.size(); ++i)
      if (st.indexes[i].mask == m) return i;
    throw std::logic_error("type graph index set is missing a correlation subset");
  }

  static void gather(std::span<const Value> attrs, const std::vector<int>& positions,
                     std::vector<Value>& out) {
    out.clear();
    for (int p : positions) out.push_back(attrs[static_cast<std::size_t>(p)]);
  }

  void mark_consequences(VertexId v) {
    const Vertex& x = graph_.vertex(v);
    std::vector<Value>& key = mark_key_;
    for (const Mark& mk : types_[x.type].marks) {
      if (mk.origin == 0) {
        presence_[mk.edge].push_back(v);
        continue;
      }
      if ((x.known & mk.src_mask) != mk.src_mask) continue;
      TypeState& dst = types_[mk.dst];
      gather(x.attrs, mk.src_perm, key);
      dst.indexes[mk.slot].index.insert(key, Hit{v, mk.origin});
      for (const Mark::Partial& part : mk.partial) {
        gather(x.attrs, part.src_positions, key);
        dst.indexes[part.slot].index.insert(key, Hit{v, mk.origin});
      }
    }
  }

  void emit_edge(VertexId src, VertexId dst, std::vector<Event>& events) {
    if (graph_.add_edge(src, dst)) events.push_back({Event::Kind::correlated, src, dst, {}});
  }

  const TypeGraph* tg_;
  EngineConfig config_;
  std::vector<TypeState> types_;
  std::vector<std::vector<VertexId>> presence_;  // per edge with an empty constraint
  CorrelationGraph graph_;
  Timestamp last_ts_ = 0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t aggregated_ = 0;
  std::uint64_t hypotheses_ = 0;
  std::vector<Value> key_;
  std::vector<Value> mark_key_;
  std::vector<VertexId> hits_;
};

}  // namespace atg
