#pragma once

// Shared fixtures: file helpers, random acyclic models and random streams.

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "atg/atg.hpp"

namespace atg::test {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string model_path(const std::string& name) { return std::string(ATG_MODELS_DIR) + "/" + name; }
inline std::string data_path(const std::string& name) { return std::string(ATG_DATA_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(ATG_GOLDEN_DIR) + "/" + name; }

inline AttackModel load_text(const std::string& text) {
  ParseResult r = load_model(text);
  if (!r.model) {
    std::string msg = "model rejected:";
    for (const Diagnostic& d : r.diagnostics) msg += "\n  " + d.to_string();
    throw std::runtime_error(msg);
  }
  return std::move(*r.model);
}

inline AttackModel load_file(const std::string& name) { return load_text(read_text(model_path(name))); }

inline std::vector<InputAlert> load_stream(const std::string& path, const AttackModel& m, ValueCodec& codec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ReadError> errors;
  auto alerts = read_alerts(in, m, codec, &errors);
  if (!errors.empty()) throw std::runtime_error(path + ": " + errors.front().reason);
  return alerts;
}

// Random model text. Types are ordered; each predicate gets a split point so
// only types before it produce the predicate and only types at or after it
// consume it, which keeps may-prepare-for acyclic.
inline std::string random_model_text(std::mt19937_64& rng, int n_types) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  const char* classes[] = {"addr", "port"};
  std::ostringstream os;
  os << "class addr ipv4\nclass port int\n";

  struct Pred {
    std::string name;
    std::vector<int> classes;
    int split;
  };
  const int n_preds = pick(2, 5);
  std::vector<Pred> preds;
  for (int p = 0; p < n_preds; ++p) {
    Pred pr{"P" + std::to_string(p), {}, pick(1, n_types - 1)};
    const int arity = pick(1, 2);
    for (int k = 0; k < arity; ++k) pr.classes.push_back(pick(0, 1));
    os << "predicate " << pr.name << "(";
    for (int k = 0; k < arity; ++k) os << (k ? ", " : "") << classes[pr.classes[k]];
    os << ")\n";
    preds.push_back(pr);
  }

  for (int t = 0; t < n_types; ++t) {
    const int n_facts = pick(2, 5);
    std::vector<int> fclass;
    for (int f = 0; f < n_facts; ++f) fclass.push_back(pick(0, 1));
    // Every class appears at least once so any predicate can be instantiated.
    fclass[0] = 0;
    fclass[1] = 1;
    os << "type T" << t << " {\n  facts {";
    for (int f = 0; f < n_facts; ++f) os << (f ? ", " : " ") << "f" << f << ": " << classes[fclass[f]];
    os << " }\n";

    auto instance = [&](const Pred& pr) -> std::string {
      std::vector<int> used;
      std::string out = pr.name + "(";
      for (std::size_t k = 0; k < pr.classes.size(); ++k) {
        std::vector<int> options;
        for (int f = 0; f < n_facts; ++f)
          if (fclass[f] == pr.classes[k] && std::find(used.begin(), used.end(), f) == used.end())
            options.push_back(f);
        if (options.empty()) return {};
        const int f = options[rng() % options.size()];
        used.push_back(f);
        out += (k ? ", f" : "f") + std::to_string(f);
      }
      return out + ")";
    };
    auto block = [&](const char* label, bool producer) {
      std::set<std::string> insts;
      for (const Pred& pr : preds) {
        const bool allowed = producer ? t < pr.split : t >= pr.split;
        if (!allowed) continue;
        static constexpr int kCopies[] = {0, 1, 1, 2};
        for (int c = 0; c < kCopies[rng() % 4]; ++c) {
          std::string s = instance(pr);
          if (!s.empty()) insts.insert(s);
        }
      }
      os << "  " << label << " {";
      bool first = true;
      for (const std::string& s : insts) {
        os << (first ? " " : ", ") << s;
        first = false;
      }
      os << " }\n";
    };
    block("prereq", false);
    block("conseq", true);
    os << "}\n";
  }
  return os.str();
}

// Values are drawn from small pools so equal values, and therefore
// correlations and duplicates, are frequent.
inline std::vector<InputAlert> random_stream(std::mt19937_64& rng, const AttackModel& m, std::size_t n,
                                             int addr_pool = 4, int port_pool = 3) {
  std::vector<InputAlert> out;
  Timestamp ts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    InputAlert a;
    a.type = static_cast<TypeId>(rng() % m.types.size());
    a.id = "r" + std::to_string(i);
    if (rng() % 3 == 0) ts += rng() % 5;  // ties are common
    a.ts = ts;
    for (std::size_t f = 0; f < m.types[a.type].facts.size(); ++f) {
      const Canonicalizer c = m.canonicalizer(a.type, static_cast<int>(f));
      if (c == Canonicalizer::ipv4_address)
        a.attrs.push_back(0x0A000001u + rng() % static_cast<unsigned>(addr_pool));
      else
        a.attrs.push_back(1 + rng() % static_cast<unsigned>(port_pool));
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<Event> run_all(Session& s, const std::vector<InputAlert>& alerts) {
  std::vector<Event> events;
  for (const InputAlert& a : alerts) s.process_alert(a, events);
  return events;
}

}  // namespace atg::test
