#pragma once

// Explains alerts with no preparing alert by walking the type graph
// backwards and building partially bound hypothesized alerts. A hypothesis
// is committed only once the chain below it reaches an existing alert;
// failed branches leave nothing behind.

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "atg/session.hpp"

namespace atg {

// Same type, same bound facts with the same values, and both ordered before
// the alert they explain.
inline bool strategically_indistinguishable(const Vertex& a, const Vertex& b, const Vertex& target) {
  if (a.type != b.type || a.known != b.known) return false;
  for (int p : mask_positions(a.known))
    if (a.attrs[static_cast<std::size_t>(p)] != b.attrs[static_cast<std::size_t>(p)]) return false;
  return a.seq < target.seq && b.seq < target.seq;
}

class Hypothesizer {
 public:
  // `arrival` is the arrival index of the real alert being explained; all
  // hypotheses committed here are sequenced just before it.
  Hypothesizer(Session& s, std::vector<Event>& events, Timestamp ts, std::uint64_t arrival)
      : s_(s), events_(events), ts_(ts), arrival_(arrival) {}

  // Returns the committed vertices that now prepare for the described
  // alert. Empty means it could not be explained.
  std::vector<VertexId> explain(TypeId type, FactMask known, std::span<const Value> attrs) {
    const TypeGraph& tg = *s_.tg_;
    std::vector<VertexId> parents;
    auto add_parent = [&](VertexId v) {
      if (std::find(parents.begin(), parents.end(), v) == parents.end()) parents.push_back(v);
    };

    for (const HypothesisTuple& tup : tg.hypothesis_sets[type]) {
      // Only the tuple whose subset matches exactly the bound constrained
      // facts applies.
      if ((known & tup.required) != tup.known) continue;

      const TypeId t = tup.source;
      std::vector<Value> hattrs(tg.model.types[t].facts.size(), 0);
      for (const FactPair& p : tup.mapping)
        hattrs[static_cast<std::size_t>(p.src)] = attrs[static_cast<std::size_t>(p.dst)];
      const FactMask hknown = tup.index;
      std::vector<Value> key;
      Session::gather(hattrs, mask_positions(hknown), key);

      if (s_.config_.consolidate_hypotheses) {
        auto db = s_.types_[t].hypo_db.find(hknown);
        if (db != s_.types_[t].hypo_db.end()) {
          if (const VertexId* existing = db->second.first(key)) {
            add_parent(*existing);
            continue;
          }
        }
      }

      std::vector<VertexId> anchors = find_anchors(t, hknown, hattrs);
      if (!anchors.empty()) {
        const VertexId v = commit(t, hknown, std::move(hattrs), key);
        for (VertexId a : anchors) s_.emit_edge(a, v, events_);
        add_parent(v);
        continue;
      }

      if (tg.in_edges[t].empty() || hknown == 0) continue;
      auto memo = std::make_tuple(t, hknown, key);
      if (failed_.count(memo)) continue;
      std::vector<VertexId> below = explain(t, hknown, hattrs);
      if (below.empty()) {
        failed_.insert(std::move(memo));
        continue;
      }
      const VertexId v = commit(t, hknown, std::move(hattrs), key);
      for (VertexId b : below) s_.emit_edge(b, v, events_);
      add_parent(v);
    }
    return parents;
  }

 private:
  // Existing alerts that prepare for a hypothesized alert of type t with the
  // given bound facts. Indexes are tried largest subset first; the hits of
  // the first index that yields any are returned.
  std::vector<VertexId> find_anchors(TypeId t, FactMask known, std::span<const Value> attrs) {
    std::vector<VertexId> out;
    std::vector<Value> key;
    const Session::TypeState& st = s_.types_[t];
    for (const Session::IndexSlot& slot : st.indexes) {
      if (!mask_contains(known, slot.mask)) continue;
      Session::gather(attrs, slot.positions, key);
      slot.index.for_each(key, [&](const Session::Hit& h) {
        if ((h.origin & known) == slot.mask && std::find(out.begin(), out.end(), h.vertex) == out.end())
          out.push_back(h.vertex);
      });
      if (!out.empty()) return out;
    }
    for (std::size_t e : st.empty_in_edges) {
      for (VertexId v : s_.presence_[e])
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
      if (!out.empty()) return out;
    }
    return out;
  }

  VertexId commit(TypeId t, FactMask known, std::vector<Value> attrs, const std::vector<Value>& key) {
    if (++committed_ > Session::kMaxHypothesesPerAlert)
      throw std::length_error("too many hypotheses for one alert");
    Vertex v;
    v.id = "hyp-" + std::to_string(++s_.hypotheses_);
    v.type = t;
    v.ts = ts_;
    v.seq = (arrival_ << Session::kSeqShift) + committed_;
    v.origin = Origin::hypothesized;
    v.known = known;
    v.attrs = std::move(attrs);
    const VertexId id = s_.graph_.add_vertex(std::move(v));
    events_.push_back({Event::Kind::hypothesized, 0, id, {}});
    s_.mark_consequences(id);
    if (s_.config_.consolidate_hypotheses) {
      auto& db = s_.types_[t].hypo_db;
      auto it = db.find(known);
      if (it == db.end())
        it = db.emplace(known, KeyedIndex<VertexId>(static_cast<std::size_t>(mask_size(known)))).first;
      it->second.insert(key, id);
    }
    return id;
  }

  Session& s_;
  std::vector<Event>& events_;
  Timestamp ts_;
  std::uint64_t arrival_;
  std::uint64_t committed_ = 0;
  std::set<std::tuple<TypeId, FactMask, std::vector<Value>>> failed_;
};

}  // namespace atg
