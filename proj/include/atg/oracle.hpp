#pragma once

// Brute-force batch correlator: checks every ordered pair of alerts directly
// against the predicate instances of their types. It never looks at
// constraints, correlation entries or indexes, so it is an independent
// reference for the streaming engine.

#include <map>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atg/session.hpp"
#include "atg/type_graph.hpp"

namespace atg {

using IdEdge = std::pair<std::string, std::string>;

struct SatisfiedConstraint {
  std::size_t conseq_instance = 0;  // index into Conseq(src type)
  std::size_t prereq_instance = 0;  // index into Prereq(dst type)
  std::string description;
};

struct EdgeReport {
  std::set<IdEdge> edges;
  std::map<IdEdge, SatisfiedConstraint> satisfied;
};

inline constexpr std::size_t kOracleMaxAlerts = 20000;

inline std::string alert_id(const InputAlert& a, std::size_t arrival) {
  return a.id.empty() ? "a" + std::to_string(arrival) : a.id;
}

// `alerts` are in arrival order; position defines sequence.
inline EdgeReport batch_correlate(const TypeGraph& tg, std::span<const InputAlert> alerts,
                                  std::size_t max_alerts = kOracleMaxAlerts) {
  if (alerts.size() > max_alerts)
    throw std::length_error("oracle: " + std::to_string(alerts.size()) + " alerts exceeds limit of " +
                            std::to_string(max_alerts));
  const AttackModel& m = tg.model;
  EdgeReport out;
  for (std::size_t j = 0; j < alerts.size(); ++j) {
    const HyperAlertType& b = m.types[alerts[j].type];
    for (std::size_t i = 0; i < j; ++i) {
      const HyperAlertType& a = m.types[alerts[i].type];
      bool found = false;
      for (std::size_t ci = 0; ci < a.conseq.size() && !found; ++ci) {
        for (std::size_t pi = 0; pi < b.prereq.size() && !found; ++pi) {
          const PredicateInstance& c = a.conseq[ci];
          const PredicateInstance& p = b.prereq[pi];
          if (c.predicate != p.predicate) continue;
          bool eq = true;
          for (std::size_t k = 0; k < c.args.size() && eq; ++k)
            eq = alerts[i].attrs[static_cast<std::size_t>(c.args[k])] ==
                 alerts[j].attrs[static_cast<std::size_t>(p.args[k])];
          if (!eq) continue;
          found = true;
          IdEdge e{alert_id(alerts[i], i), alert_id(alerts[j], j)};
          out.edges.insert(e);
          out.satisfied[e] = {ci, pi,
                              a.name + "." + render_instance(m, a, c) + " ~ " + b.name + "." +
                                  render_instance(m, b, p)};
        }
      }
    }
  }
  return out;
}

struct DiffReport {
  std::vector<std::pair<IdEdge, std::string>> oracle_only;  // with the matching constraint
  std::vector<IdEdge> engine_only;

  bool empty() const { return oracle_only.empty() && engine_only.empty(); }

  std::string render() const {
    std::ostringstream os;
    os << "oracle-only " << oracle_only.size() << "\n";
    for (const auto& [e, why] : oracle_only) os << "  " << e.first << " -> " << e.second << "  [" << why << "]\n";
    os << "engine-only " << engine_only.size() << "\n";
    for (const IdEdge& e : engine_only) os << "  " << e.first << " -> " << e.second << "\n";
    return os.str();
  }
};

inline DiffReport diff(const EdgeReport& oracle, const std::set<IdEdge>& engine) {
  DiffReport d;
  for (const IdEdge& e : oracle.edges)
    if (!engine.count(e)) d.oracle_only.emplace_back(e, oracle.satisfied.at(e).description);
  for (const IdEdge& e : engine)
    if (!oracle.edges.count(e)) d.engine_only.push_back(e);
  return d;
}

inline std::set<IdEdge> id_edges(const CorrelationGraph& g) {
  std::set<IdEdge> out;
  for (const Edge& e : g.edges()) out.emplace(g.vertex(e.first).id, g.vertex(e.second).id);
  return out;
}

}  // namespace atg
