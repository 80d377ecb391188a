#pragma once

// Attack model: fact classes, predicates, implication rules and hyper-alert
// types, plus the text format they are written in.
//
//   class <name> <ipv4|int|str>
//   predicate <Name>(<class>[, <class>]*)
//   implies <Name>(<v1>,...) => <Name>(<vi>,...)
//   type <Name> { facts { <fact>: <class>, ... } prereq { <P(f,..)>, ... } conseq { ... } }
//
// Declarations must appear in the order classes, predicates, implies, types.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atg/value.hpp"

namespace atg {

struct FactClass {
  std::string name;
  Canonicalizer canonicalizer = Canonicalizer::opaque_string;

  friend bool operator==(const FactClass&, const FactClass&) = default;
};

struct Predicate {
  std::string name;
  std::vector<std::size_t> arg_classes;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// `args` are fact positions within the owning type, or variable positions
// within the owning ImplicationRule.
struct PredicateInstance {
  std::size_t predicate = 0;
  std::vector<int> args;

  friend bool operator==(const PredicateInstance&, const PredicateInstance&) = default;
  friend auto operator<=>(const PredicateInstance&, const PredicateInstance&) = default;
};

// Single-antecedent rule. The antecedent binds variables 0..n-1 in order;
// the consequent refers to a subset of them.
struct ImplicationRule {
  std::vector<std::string> variables;
  PredicateInstance antecedent;
  PredicateInstance consequent;

  friend bool operator==(const ImplicationRule&, const ImplicationRule&) = default;
};

struct Fact {
  std::string name;
  std::size_t fact_class = 0;

  friend bool operator==(const Fact&, const Fact&) = default;
};

struct HyperAlertType {
  std::string name;
  std::vector<Fact> facts;
  std::vector<PredicateInstance> prereq;
  std::vector<PredicateInstance> conseq;

  std::optional<int> find_fact(std::string_view n) const {
    for (std::size_t i = 0; i < facts.size(); ++i)
      if (facts[i].name == n) return static_cast<int>(i);
    return std::nullopt;
  }

  FactMask all_facts() const {
    return facts.size() >= 32 ? ~FactMask{0} : ((FactMask{1} << facts.size()) - 1);
  }

  friend bool operator==(const HyperAlertType&, const HyperAlertType&) = default;
};

struct AttackModel {
  std::vector<FactClass> classes;
  std::vector<Predicate> predicates;
  std::vector<ImplicationRule> rules;
  std::vector<HyperAlertType> types;

  std::optional<std::size_t> find_class(std::string_view n) const { return find(classes, n); }
  std::optional<std::size_t> find_predicate(std::string_view n) const { return find(predicates, n); }
  std::optional<TypeId> find_type(std::string_view n) const {
    auto i = find(types, n);
    if (!i) return std::nullopt;
    return static_cast<TypeId>(*i);
  }

  Canonicalizer canonicalizer(TypeId t, int fact) const {
    return classes[types[t].facts[static_cast<std::size_t>(fact)].fact_class].canonicalizer;
  }

  friend bool operator==(const AttackModel&, const AttackModel&) = default;

 private:
  template <class Vec>
  static std::optional<std::size_t> find(const Vec& v, std::string_view n) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].name == n) return i;
    return std::nullopt;
  }
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  int line = 0;
  int column = 0;
  std::string message;

  std::string to_string() const {
    std::ostringstream os;
    os << line << ':' << column << ": " << (severity == Severity::error ? "error" : "warning")
       << ": " << message;
    return os.str();
  }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

struct ParseResult {
  std::optional<AttackModel> model;  // set iff diagnostics holds no errors
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

struct Token {
  enum Kind { identifier, lbrace, rbrace, lparen, rparen, comma, colon, arrow, end, invalid };
  Kind kind = end;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.kind = Token::identifier;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (c == '=' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      advance();
      advance();
      t.kind = Token::arrow;
      t.text = "=>";
      return t;
    }
    advance();
    t.text = std::string(1, c);
    switch (c) {
      case '{': t.kind = Token::lbrace; break;
      case '}': t.kind = Token::rbrace; break;
      case '(': t.kind = Token::lparen; break;
      case ')': t.kind = Token::rparen; break;
      case ',': t.kind = Token::comma; break;
      case ':': t.kind = Token::colon; break;
      default: t.kind = Token::invalid; break;
    }
    return t;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct SyntaxError {
  Token at;
  std::string message;
};

class ModelParser {
 public:
  explicit ModelParser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

  ParseResult run() {
    ParseResult out;
    try {
      while (tok_.kind != Token::end) declaration();
    } catch (const SyntaxError& e) {
      diag(e.at, e.message);
    }
    out.diagnostics = std::move(diags_);
    if (!has_errors(out.diagnostics)) out.model = std::move(model_);
    return out;
  }

 private:
  enum Phase { classes = 0, predicates = 1, implies = 2, types = 3 };

  void diag(const Token& at, std::string msg, Severity s = Severity::error) {
    diags_.push_back({s, at.line, at.column, std::move(msg)});
  }

  [[noreturn]] void fail(std::string msg) { throw SyntaxError{tok_, std::move(msg)}; }

  Token expect(Token::Kind k, std::string_view what) {
    if (tok_.kind != k) {
      fail("syntax error: expected " + std::string(what) + ", found '" +
           (tok_.kind == Token::end ? std::string("end of input") : tok_.text) + "'");
    }
    Token t = tok_;
    tok_ = lex_.next();
    return t;
  }

  bool accept(Token::Kind k) {
    if (tok_.kind != k) return false;
    tok_ = lex_.next();
    return true;
  }

  void keyword(std::string_view kw) {
    if (tok_.kind != Token::identifier || tok_.text != kw)
      fail("syntax error: expected '" + std::string(kw) + "', found '" + tok_.text + "'");
    tok_ = lex_.next();
  }

  void enter_phase(Phase p, const Token& at) {
    static constexpr const char* names[] = {"class", "predicate", "implies", "type"};
    if (p < phase_) {
      diag(at, std::string("declaration out of order: '") + names[p] + "' after '" +
                   names[phase_] + "'");
    } else {
      phase_ = p;
    }
  }

  void declaration() {
    if (tok_.kind != Token::identifier) fail("syntax error: expected a declaration");
    const Token kw = tok_;
    if (kw.text == "class") {
      enter_phase(classes, kw);
      tok_ = lex_.next();
      class_decl();
    } else if (kw.text == "predicate") {
      enter_phase(predicates, kw);
      tok_ = lex_.next();
      predicate_decl();
    } else if (kw.text == "implies") {
      enter_phase(implies, kw);
      tok_ = lex_.next();
      implies_decl();
    } else if (kw.text == "type") {
      enter_phase(types, kw);
      tok_ = lex_.next();
      type_decl();
    } else {
      fail("syntax error: unknown declaration '" + kw.text + "'");
    }
  }

  void class_decl() {
    const Token name = expect(Token::identifier, "class name");
    const Token canon = expect(Token::identifier, "canonicalizer (ipv4, int or str)");
    auto c = canonicalizer_from_keyword(canon.text);
    if (!c) {
      diag(canon, "unknown canonicalizer '" + canon.text + "'");
      return;
    }
    if (model_.find_class(name.text)) {
      diag(name, "duplicate class '" + name.text + "'");
      return;
    }
    model_.classes.push_back({name.text, *c});
  }

  void predicate_decl() {
    const Token name = expect(Token::identifier, "predicate name");
    expect(Token::lparen, "'('");
    Predicate p{name.text, {}};
    bool ok = true;
    do {
      const Token cls = expect(Token::identifier, "class name");
      auto ci = model_.find_class(cls.text);
      if (!ci) {
        diag(cls, "unknown class '" + cls.text + "'");
        ok = false;
      } else {
        p.arg_classes.push_back(*ci);
      }
    } while (accept(Token::comma));
    expect(Token::rparen, "')'");
    if (model_.find_predicate(name.text)) {
      diag(name, "duplicate predicate '" + name.text + "'");
      return;
    }
    if (ok) model_.predicates.push_back(std::move(p));
  }

  struct RawInstance {
    Token name;
    std::vector<Token> args;
  };

  RawInstance raw_instance() {
    RawInstance r;
    r.name = expect(Token::identifier, "predicate name");
    expect(Token::lparen, "'('");
    do {
      r.args.push_back(expect(Token::identifier, "argument"));
    } while (accept(Token::comma));
    expect(Token::rparen, "')'");
    return r;
  }

  // Resolves a raw instance against a list of named slots (facts or rule
  // variables) with known classes.
  std::optional<PredicateInstance> resolve(const RawInstance& raw,
                                           const std::vector<std::string>& slot_names,
                                           const std::vector<std::size_t>& slot_classes,
                                           std::string_view slot_kind) {
    auto pi = model_.find_predicate(raw.name.text);
    if (!pi) {
      diag(raw.name, "unknown predicate '" + raw.name.text + "'");
      return std::nullopt;
    }
    const Predicate& pred = model_.predicates[*pi];
    if (pred.arg_classes.size() != raw.args.size()) {
      diag(raw.name, "arity mismatch: '" + pred.name + "' takes " +
                         std::to_string(pred.arg_classes.size()) + " argument(s), got " +
                         std::to_string(raw.args.size()));
      return std::nullopt;
    }
    PredicateInstance inst{*pi, {}};
    bool ok = true;
    for (std::size_t k = 0; k < raw.args.size(); ++k) {
      const Token& a = raw.args[k];
      auto it = std::find(slot_names.begin(), slot_names.end(), a.text);
      if (it == slot_names.end()) {
        diag(a, "unknown " + std::string(slot_kind) + " '" + a.text + "'");
        ok = false;
        continue;
      }
      const int slot = static_cast<int>(it - slot_names.begin());
      if (std::find(inst.args.begin(), inst.args.end(), slot) != inst.args.end()) {
        diag(a, "repeated fact '" + a.text + "' in instance of '" + pred.name + "'");
        ok = false;
        continue;
      }
      if (slot_classes[static_cast<std::size_t>(slot)] != pred.arg_classes[k]) {
        diag(a, "class mismatch: '" + a.text + "' is " +
                    model_.classes[slot_classes[static_cast<std::size_t>(slot)]].name + " but '" +
                    pred.name + "' expects " + model_.classes[pred.arg_classes[k]].name +
                    " at position " + std::to_string(k + 1));
        ok = false;
        continue;
      }
      inst.args.push_back(slot);
    }
    if (!ok) return std::nullopt;
    return inst;
  }

  void implies_decl() {
    const RawInstance ante = raw_instance();
    expect(Token::arrow, "'=>'");
    const RawInstance cons = raw_instance();

    auto pi = model_.find_predicate(ante.name.text);
    if (!pi) {
      diag(ante.name, "unknown predicate '" + ante.name.text + "'");
      return;
    }
    const Predicate& pred = model_.predicates[*pi];
    if (pred.arg_classes.size() != ante.args.size()) {
      diag(ante.name, "arity mismatch: '" + pred.name + "' takes " +
                          std::to_string(pred.arg_classes.size()) + " argument(s), got " +
                          std::to_string(ante.args.size()));
      return;
    }
    ImplicationRule rule;
    std::vector<std::size_t> var_classes;
    for (std::size_t k = 0; k < ante.args.size(); ++k) {
      const Token& a = ante.args[k];
      if (std::find(rule.variables.begin(), rule.variables.end(), a.text) != rule.variables.end()) {
        diag(a, "repeated fact '" + a.text + "' in instance of '" + pred.name + "'");
        return;
      }
      rule.variables.push_back(a.text);
      var_classes.push_back(pred.arg_classes[k]);
      rule.antecedent.args.push_back(static_cast<int>(k));
    }
    rule.antecedent.predicate = *pi;
    auto c = resolve(cons, rule.variables, var_classes, "variable");
    if (!c) return;
    rule.consequent = std::move(*c);
    model_.rules.push_back(std::move(rule));
  }

  void instance_block(std::string_view block, const HyperAlertType& t,
                      std::vector<PredicateInstance>& out, bool& ok) {
    keyword(block);
    expect(Token::lbrace, "'{'");
    std::vector<std::string> names;
    std::vector<std::size_t> classes_of;
    for (const Fact& f : t.facts) {
      names.push_back(f.name);
      classes_of.push_back(f.fact_class);
    }
    if (tok_.kind != Token::rbrace) {
      do {
        RawInstance raw = raw_instance();
        auto inst = resolve(raw, names, classes_of, "fact");
        if (!inst) {
          ok = false;
        } else if (std::find(out.begin(), out.end(), *inst) == out.end()) {
          out.push_back(std::move(*inst));
        }
      } while (accept(Token::comma));
    }
    expect(Token::rbrace, "'}'");
  }

  void type_decl() {
    const Token name = expect(Token::identifier, "type name");
    expect(Token::lbrace, "'{'");
    HyperAlertType t;
    t.name = name.text;
    bool ok = true;

    keyword("facts");
    expect(Token::lbrace, "'{'");
    if (tok_.kind != Token::rbrace) {
      do {
        const Token fact = expect(Token::identifier, "fact name");
        expect(Token::colon, "':'");
        const Token cls = expect(Token::identifier, "class name");
        auto ci = model_.find_class(cls.text);
        if (!ci) {
          diag(cls, "unknown class '" + cls.text + "'");
          ok = false;
          continue;
        }
        if (t.find_fact(fact.text)) {
          diag(fact, "duplicate fact '" + fact.text + "' in type '" + t.name + "'");
          ok = false;
          continue;
        }
        if (t.facts.size() == kMaxFactsPerType) {
          diag(fact, "type '" + t.name + "' declares more than " +
                         std::to_string(kMaxFactsPerType) + " facts");
          ok = false;
          continue;
        }
        t.facts.push_back({fact.text, *ci});
      } while (accept(Token::comma));
    }
    expect(Token::rbrace, "'}'");

    instance_block("prereq", t, t.prereq, ok);
    instance_block("conseq", t, t.conseq, ok);
    expect(Token::rbrace, "'}'");

    if (model_.find_type(t.name)) {
      diag(name, "duplicate type '" + t.name + "'");
      return;
    }
    if (ok) model_.types.push_back(std::move(t));
  }

  Lexer lex_;
  Token tok_;
  Phase phase_ = classes;
  AttackModel model_;
  std::vector<Diagnostic> diags_;
};

}  // namespace detail

inline ParseResult parse_model(std::string_view text) { return detail::ModelParser(text).run(); }

inline std::string render_instance(const AttackModel& m, const PredicateInstance& inst,
                                   const std::vector<std::string>& slot_names) {
  std::string out = m.predicates[inst.predicate].name + "(";
  for (std::size_t k = 0; k < inst.args.size(); ++k) {
    if (k) out += ", ";
    out += slot_names[static_cast<std::size_t>(inst.args[k])];
  }
  return out + ")";
}

inline std::vector<std::string> fact_names(const HyperAlertType& t) {
  std::vector<std::string> names;
  names.reserve(t.facts.size());
  for (const Fact& f : t.facts) names.push_back(f.name);
  return names;
}

inline std::string render_instance(const AttackModel& m, const HyperAlertType& t,
                                   const PredicateInstance& inst) {
  return render_instance(m, inst, fact_names(t));
}

// Canonical text form; parse_model(render_model(m)) reproduces m exactly.
inline std::string render_model(const AttackModel& m) {
  std::ostringstream os;
  for (const FactClass& c : m.classes)
    os << "class " << c.name << ' ' << canonicalizer_keyword(c.canonicalizer) << '\n';
  for (const Predicate& p : m.predicates) {
    os << "predicate " << p.name << '(';
    for (std::size_t k = 0; k < p.arg_classes.size(); ++k)
      os << (k ? ", " : "") << m.classes[p.arg_classes[k]].name;
    os << ")\n";
  }
  for (const ImplicationRule& r : m.rules) {
    os << "implies " << render_instance(m, r.antecedent, r.variables) << " => "
       << render_instance(m, r.consequent, r.variables) << '\n';
  }
  for (const HyperAlertType& t : m.types) {
    os << "type " << t.name << " {\n  facts {";
    for (std::size_t k = 0; k < t.facts.size(); ++k)
      os << (k ? ", " : " ") << t.facts[k].name << ": " << m.classes[t.facts[k].fact_class].name;
    os << " }\n";
    auto block = [&](const char* label, const std::vector<PredicateInstance>& insts) {
      os << "  " << label << " {";
      for (std::size_t k = 0; k < insts.size(); ++k)
        os << (k ? ", " : " ") << render_instance(m, t, insts[k]);
      os << " }\n";
    };
    block("prereq", t.prereq);
    block("conseq", t.conseq);
    os << "}\n";
  }
  return os.str();
}

// Closes every type's consequences under the implication rules. Prerequisites
// are left alone. Idempotent.
inline AttackModel expand_implications(AttackModel model) {
  for (HyperAlertType& t : model.types) {
    for (std::size_t next = 0; next < t.conseq.size(); ++next) {
      for (const ImplicationRule& r : model.rules) {
        if (r.antecedent.predicate != t.conseq[next].predicate) continue;
        // Antecedent variables are bound positionally to the instance's facts.
        const std::vector<int> binding = t.conseq[next].args;
        PredicateInstance implied{r.consequent.predicate, {}};
        for (int v : r.consequent.args) implied.args.push_back(binding[static_cast<std::size_t>(v)]);
        if (std::find(t.conseq.begin(), t.conseq.end(), implied) == t.conseq.end())
          t.conseq.push_back(std::move(implied));
      }
    }
  }
  return model;
}

}  // namespace atg
