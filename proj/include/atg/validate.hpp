#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "atg/attack_model.hpp"
#include "atg/type_graph.hpp"

namespace atg {

namespace detail {

inline void check_instance(const AttackModel& m, const HyperAlertType& t,
                           const PredicateInstance& inst, std::vector<Diagnostic>& out) {
  auto err = [&](std::string msg) { out.push_back({Severity::error, 0, 0, t.name + ": " + msg}); };
  if (inst.predicate >= m.predicates.size()) {
    err("unknown predicate");
    return;
  }
  const Predicate& p = m.predicates[inst.predicate];
  if (p.arg_classes.size() != inst.args.size()) {
    err("arity mismatch in instance of '" + p.name + "'");
    return;
  }
  std::set<int> seen;
  for (std::size_t k = 0; k < inst.args.size(); ++k) {
    const int a = inst.args[k];
    if (a < 0 || static_cast<std::size_t>(a) >= t.facts.size()) {
      err("instance of '" + p.name + "' refers to an undeclared fact");
      continue;
    }
    if (!seen.insert(a).second)
      err("repeated fact '" + t.facts[static_cast<std::size_t>(a)].name + "' in instance of '" +
          p.name + "'");
    if (t.facts[static_cast<std::size_t>(a)].fact_class != p.arg_classes[k])
      err("class mismatch for fact '" + t.facts[static_cast<std::size_t>(a)].name +
          "' in instance of '" + p.name + "'");
  }
}

}  // namespace detail

// Empty result (or warnings only) iff the model is usable: type invariants
// hold and the induced may-prepare-for relation is acyclic.
inline std::vector<Diagnostic> validate(const AttackModel& model) {
  std::vector<Diagnostic> out;
  auto err = [&](std::string msg) { out.push_back({Severity::error, 0, 0, std::move(msg)}); };

  std::set<std::string> names;
  for (const FactClass& c : model.classes)
    if (!names.insert(c.name).second) err("duplicate class '" + c.name + "'");
  names.clear();
  for (const Predicate& p : model.predicates) {
    if (!names.insert(p.name).second) err("duplicate predicate '" + p.name + "'");
    if (p.arg_classes.empty()) err("predicate '" + p.name + "' has no arguments");
    for (std::size_t c : p.arg_classes)
      if (c >= model.classes.size()) err("predicate '" + p.name + "' uses an unknown class");
  }
  names.clear();
  for (const HyperAlertType& t : model.types) {
    if (!names.insert(t.name).second) err("duplicate type '" + t.name + "'");
    if (t.facts.size() > kMaxFactsPerType) err(t.name + ": too many facts");
    std::set<std::string> facts;
    for (const Fact& f : t.facts) {
      if (!facts.insert(f.name).second) err(t.name + ": duplicate fact '" + f.name + "'");
      if (f.fact_class >= model.classes.size()) err(t.name + ": fact '" + f.name + "' has unknown class");
    }
    for (const PredicateInstance& i : t.prereq) detail::check_instance(model, t, i, out);
    for (const PredicateInstance& i : t.conseq) detail::check_instance(model, t, i, out);
  }
  if (has_errors(out)) return out;

  const AttackModel expanded = expand_implications(model);
  try {
    (void)compile(expanded);
  } catch (const CompileError& e) {
    err(e.what());
  }

  std::set<std::size_t> produced;
  for (const HyperAlertType& t : expanded.types)
    for (const PredicateInstance& i : t.conseq) produced.insert(i.predicate);
  std::set<std::size_t> reported;
  for (const HyperAlertType& t : expanded.types) {
    for (const PredicateInstance& i : t.prereq) {
      if (produced.count(i.predicate) || !reported.insert(i.predicate).second) continue;
      out.push_back({Severity::warning, 0, 0,
                     "unsatisfiable prerequisite predicate '" +
                         model.predicates[i.predicate].name + "' (required by " + t.name +
                         ", produced by no type)"});
    }
  }
  return out;
}

// Parses, validates and expands implications. `model` is set iff no
// diagnostic is an error; warnings are kept.
inline ParseResult load_model(std::string_view text) {
  ParseResult r = parse_model(text);
  if (!r.model) return r;
  std::vector<Diagnostic> v = validate(*r.model);
  r.diagnostics.insert(r.diagnostics.end(), v.begin(), v.end());
  if (has_errors(r.diagnostics))
    r.model.reset();
  else
    r.model = expand_implications(std::move(*r.model));
  return r;
}

}  // namespace atg
