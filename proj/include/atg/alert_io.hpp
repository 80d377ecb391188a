#pragma once

// Newline-delimited alert records:
//   {"id": "s1", "type": "PingSweep", "ts": 12, "attrs": {"DstIP": "10.0.0.5", "DstPort": 0, ...}}
// `id` is optional. Attribute values are strings or integers and are
// canonicalized by the class of the fact they bind.

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "atg/attack_model.hpp"
#include "atg/graph.hpp"
#include "atg/session.hpp"
#include "atg/value.hpp"

namespace atg {

class AlertReader {
 public:
  AlertReader(const AttackModel& model, ValueCodec& codec) : model_(&model), codec_(&codec) {
    for (TypeId t = 0; t < model.types.size(); ++t) {
      types_.emplace(model.types[t].name, t);
      for (std::size_t f = 0; f < model.types[t].facts.size(); ++f)
        facts_.emplace(std::pair(t, model.types[t].facts[f].name), f);
    }
  }

  // Parses one record. On failure returns nullopt and sets `error`.
  std::optional<InputAlert> parse(std::string_view line, std::string& error) const {
    nlohmann::json j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      error = "malformed record";
      return std::nullopt;
    }
    InputAlert alert;
    bool have_type = false, have_ts = false, have_attrs = false;
    const nlohmann::json* attrs = nullptr;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k == "id") {
        if (!it->is_string()) return fail(error, "id must be a string");
        alert.id = it->get<std::string>();
        if (alert.id.empty()) return fail(error, "empty id");
      } else if (k == "type") {
        if (!it->is_string()) return fail(error, "type must be a string");
        auto t = types_.find(it->get_ref<const std::string&>());
        if (t == types_.end()) return fail(error, "unknown type '" + it->get<std::string>() + "'");
        alert.type = t->second;
        have_type = true;
      } else if (k == "ts") {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0))
          return fail(error, "ts must be a non-negative integer");
        alert.ts = it->get<std::uint64_t>();
        have_ts = true;
      } else if (k == "attrs") {
        if (!it->is_object()) return fail(error, "attrs must be an object");
        attrs = &*it;
        have_attrs = true;
      } else {
        return fail(error, "unknown field '" + k + "'");
      }
    }
    if (!have_type) return fail(error, "missing type");
    if (!have_ts) return fail(error, "missing ts");
    if (!have_attrs) return fail(error, "missing attrs");

    const HyperAlertType& type = model_->types[alert.type];
    alert.attrs.assign(type.facts.size(), 0);
    std::vector<bool> seen(type.facts.size(), false);
    for (auto it = attrs->begin(); it != attrs->end(); ++it) {
      auto f = facts_.find(std::pair(alert.type, it.key()));
      if (f == facts_.end()) return fail(error, "unknown fact '" + it.key() + "'");
      const Canonicalizer c = model_->classes[type.facts[f->second].fact_class].canonicalizer;
      try {
        if (it->is_string()) {
          alert.attrs[f->second] = codec_->from_text(c, it->get_ref<const std::string&>());
        } else if (it->is_number_integer()) {
          alert.attrs[f->second] = codec_->from_integer(c, it->get<std::int64_t>());
        } else {
          return fail(error, "fact '" + it.key() + "' must be a string or integer");
        }
      } catch (const ValueError& e) {
        return fail(error, "fact '" + it.key() + "': " + e.what());
      }
      seen[f->second] = true;
    }
    for (std::size_t k = 0; k < seen.size(); ++k)
      if (!seen[k]) return fail(error, "missing fact '" + type.facts[k].name + "'");
    return alert;
  }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<TypeId, std::string>& p) const {
      return std::hash<std::string>{}(p.second) * 31u + p.first;
    }
  };

  static std::optional<InputAlert> fail(std::string& error, std::string msg) {
    error = std::move(msg);
    return std::nullopt;
  }

  const AttackModel* model_;
  ValueCodec* codec_;
  std::unordered_map<std::string, TypeId> types_;
  std::unordered_map<std::pair<TypeId, std::string>, std::size_t, PairHash> facts_;
};

inline std::string format_alert(const AttackModel& m, const ValueCodec& codec, const InputAlert& a) {
  const HyperAlertType& t = m.types[a.type];
  nlohmann::json attrs = nlohmann::json::object();
  for (std::size_t k = 0; k < t.facts.size(); ++k)
    attrs[t.facts[k].name] = attr_json(m.classes[t.facts[k].fact_class].canonicalizer, codec, a.attrs[k]);
  nlohmann::json rec = {{"type", t.name}, {"ts", a.ts}, {"attrs", std::move(attrs)}};
  if (!a.id.empty()) rec["id"] = a.id;
  return rec.dump();
}

struct ReadError {
  std::size_t line = 0;
  std::string reason;
};

// Reads a whole stream; blank lines are skipped.
inline std::vector<InputAlert> read_alerts(std::istream& in, const AttackModel& m, ValueCodec& codec,
                                           std::vector<ReadError>* errors = nullptr) {
  AlertReader reader(m, codec);
  std::vector<InputAlert> out;
  std::string line, err;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (auto a = reader.parse(line, err)) {
      out.push_back(std::move(*a));
    } else if (errors) {
      errors->push_back({no, err});
    }
  }
  return out;
}

inline std::string format_event(const Event& e, const CorrelationGraph& g, const AttackModel& m,
                                const ValueCodec& codec) {
  switch (e.kind) {
    case Event::Kind::correlated: return "CORR " + g.vertex(e.src).id + " " + g.vertex(e.dst).id;
    case Event::Kind::aggregated: return "AGGR " + g.vertex(e.dst).id + " " + e.text;
    case Event::Kind::hypothesized: {
      const Vertex& v = g.vertex(e.dst);
      return "HYPO " + v.id + " " + m.types[v.type].name + " " + bound_facts_text(m, codec, v);
    }
    case Event::Kind::error: return "ERR 0 " + e.text;
  }
  return {};
}

}  // namespace atg
