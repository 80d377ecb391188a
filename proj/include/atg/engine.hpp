#pragma once

// Single-pass correlator. Per alert: implicit-correlation check, search for
// correlations, hypothesize if unexplained, mark consequences.

#include <string>
#include <vector>

#include "atg/hypothesizer.hpp"
#include "atg/session.hpp"

namespace atg {

inline Session new_session(const TypeGraph& tg, EngineConfig config) { return Session(tg, config); }

inline const CorrelationGraph& finalize(const Session& s) { return s.graph(); }

inline void Session::process_alert(const InputAlert& alert, std::vector<Event>& events) {
  const TypeGraph& tg = *tg_;
  auto reject = [&](std::string reason) {
    events.push_back({Event::Kind::error, 0, 0, std::move(reason)});
  };
  if (alert.type >= tg.type_count()) return reject("unknown type");
  const HyperAlertType& type = tg.model.types[alert.type];
  if (alert.attrs.size() != type.facts.size()) return reject("missing fact");
  if (alert.ts < last_ts_) return reject("timestamp regression");

  const std::uint64_t arrival = arrivals_++;
  last_ts_ = alert.ts;
  TypeState& st = types_[alert.type];
  std::string id = alert.id.empty() ? "a" + std::to_string(arrival) : alert.id;

  if (config_.implicit_correlation) {
    gather(alert.attrs, st.implicit_positions, key_);
    if (const VertexId* existing = st.implicit.first(key_)) {
      ++aggregated_;
      events.push_back({Event::Kind::aggregated, 0, *existing, id});
      graph_.append_aggregated(*existing, std::move(id));
      return;
    }
  }

  hits_.clear();
  for (std::size_t si : st.search) {
    const IndexSlot& slot = st.indexes[si];
    gather(alert.attrs, slot.positions, key_);
    slot.index.for_each(key_, [&](const Hit& h) {
      if (h.origin == slot.mask) hits_.push_back(h.vertex);
    });
  }
  for (std::size_t e : st.empty_in_edges) hits_.insert(hits_.end(), presence_[e].begin(), presence_[e].end());

  std::vector<VertexId> parents;
  if (hits_.empty() && !type.prereq.empty() && config_.hypothesize) {
    Hypothesizer hyp(*this, events, alert.ts, arrival);
    parents = hyp.explain(alert.type, type.all_facts(), alert.attrs);
  }

  Vertex v;
  v.id = std::move(id);
  v.type = alert.type;
  v.ts = alert.ts;
  v.seq = (arrival + 1) << kSeqShift;
  v.origin = Origin::real;
  v.known = type.all_facts();
  v.attrs = alert.attrs;
  const VertexId vid = graph_.add_vertex(std::move(v));

  for (VertexId h : hits_) emit_edge(h, vid, events);
  for (VertexId p : parents) emit_edge(p, vid, events);

  mark_consequences(vid);
  if (config_.implicit_correlation) {
    gather(alert.attrs, st.implicit_positions, key_);
    st.implicit.insert(key_, vid);
  }
}

}  // namespace atg
