#pragma once

// Run statistics and the repeated-run benchmark behind `atg bench`.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "atg/engine.hpp"

namespace atg {

struct RunStats {
  std::uint64_t alerts_in = 0;
  std::uint64_t vertices = 0;  // after trivial-subgraph elimination
  std::uint64_t edges = 0;
  std::uint64_t hypotheses = 0;
  std::uint64_t aggregated = 0;
  std::uint64_t errors = 0;
  double wall_time = 0;  // seconds
  double cpu_time = 0;   // seconds

  double rate() const { return wall_time > 0 ? static_cast<double>(alerts_in) / wall_time : 0.0; }

  std::string stats_line() const {
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "STATS alerts_in=%llu vertices=%llu edges=%llu hypotheses=%llu aggregated=%llu "
                  "errors=%llu wall_time=%.6f cpu_time=%.6f rate=%.0f",
                  static_cast<unsigned long long>(alerts_in), static_cast<unsigned long long>(vertices),
                  static_cast<unsigned long long>(edges), static_cast<unsigned long long>(hypotheses),
                  static_cast<unsigned long long>(aggregated), static_cast<unsigned long long>(errors),
                  wall_time, cpu_time, rate());
    return buf;
  }
};

inline void fill_graph_stats(const Session& s, RunStats& st) {
  st.alerts_in = s.alerts_in();
  st.hypotheses = s.hypothesis_count();
  st.aggregated = s.aggregated_count();
  st.edges = s.graph().edge_count();
  st.vertices = 0;
  for (const Vertex& v : s.graph().vertices())
    if (v.in_degree + v.out_degree > 0) ++st.vertices;
}

class Stopwatch {
 public:
  Stopwatch() : wall_(std::chrono::steady_clock::now()), cpu_(std::clock()) {}
  double wall() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_).count();
  }
  double cpu() const { return static_cast<double>(std::clock() - cpu_) / CLOCKS_PER_SEC; }

 private:
  std::chrono::steady_clock::time_point wall_;
  std::clock_t cpu_;
};

// Feeds an in-memory stream through a session and times it.
inline RunStats run_stream(Session& s, std::span<const InputAlert> alerts,
                           std::vector<Event>* log = nullptr) {
  std::vector<Event> events;
  std::uint64_t errors = 0;
  Stopwatch clock;
  for (const InputAlert& a : alerts) {
    events.clear();
    s.process_alert(a, events);
    for (const Event& e : events)
      if (e.kind == Event::Kind::error) ++errors;
    if (log) log->insert(log->end(), events.begin(), events.end());
  }
  RunStats st;
  st.wall_time = clock.wall();
  st.cpu_time = clock.cpu();
  fill_graph_stats(s, st);
  st.errors = errors;
  return st;
}

struct BenchRow {
  std::string variant;
  double min = 0, max = 0, mean = 0;
  double rate = 0;
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;
};

inline BenchRow bench_variant(const TypeGraph& tg, const std::string& variant,
                              std::span<const InputAlert> alerts, int reps) {
  BenchRow row;
  row.variant = variant;
  double total = 0;
  for (int r = 0; r < reps; ++r) {
    Session s(tg, EngineConfig::variant(variant));
    const RunStats st = run_stream(s, alerts);
    row.min = r == 0 ? st.wall_time : std::min(row.min, st.wall_time);
    row.max = r == 0 ? st.wall_time : std::max(row.max, st.wall_time);
    total += st.wall_time;
    row.vertices = st.vertices;
    row.edges = st.edges;
  }
  row.mean = total / reps;
  row.rate = row.mean > 0 ? static_cast<double>(alerts.size()) / row.mean : 0.0;
  return row;
}

inline std::string format_bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %10s %10s %10s %14s %12s %12s\n", "variant", "min(s)", "max(s)",
                "mean(s)", "rate(a/s)", "vertices", "edges");
  os << buf;
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%-8s %10.4f %10.4f %10.4f %14.0f %12llu %12llu\n", r.variant.c_str(),
                  r.min, r.max, r.mean, r.rate, static_cast<unsigned long long>(r.vertices),
                  static_cast<unsigned long long>(r.edges));
    os << buf;
  }
  return os.str();
}

}  // namespace atg
