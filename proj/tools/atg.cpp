// atg: compile attack models, correlate alert streams, generate synthetic
// noise, benchmark the engine variants and diff against the batch oracle.
//
// Exit status: 0 success, 1 usage, 2 model diagnostics, 3 input error under
// --strict, 4 oracle diff not empty.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atg/atg.hpp"

namespace {

using namespace atg;

struct Exit {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{1, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AttackModel load(const std::string& path) {
  ParseResult r = load_model(read_file(path));
  for (const Diagnostic& d : r.diagnostics) std::cerr << path << ":" << d.to_string() << "\n";
  if (!r.model) throw Exit{2, ""};
  return std::move(*r.model);
}

// Input stream: a file, or stdin for "-".
class Input {
 public:
  explicit Input(const std::string& path) {
    if (path == "-") {
      in_ = &std::cin;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw Exit{1, "cannot open '" + path + "'"};
      in_ = file_.get();
    }
  }
  std::istream& get() { return *in_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* in_ = nullptr;
};

// Output stream: a file, or stdout for "-" or empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") {
      out_ = &std::cout;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Exit{1, "cannot write '" + path + "'"};
      out_ = file_.get();
    }
  }
  std::ostream& get() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<InputAlert> read_stream(const std::string& path, const AttackModel& m, ValueCodec& codec,
                                    bool strict) {
  Input in(path);
  std::vector<ReadError> errors;
  std::vector<InputAlert> alerts = read_alerts(in.get(), m, codec, &errors);
  for (const ReadError& e : errors) std::cerr << "ERR " << e.line << " " << e.reason << "\n";
  if (strict && !errors.empty()) throw Exit{3, ""};
  return alerts;
}

// ---------------------------------------------------------------------------

struct CompileOpts {
  std::string model;
  std::string output;
  bool dot = false;
};

int cmd_compile(const CompileOpts& o) {
  const AttackModel m = load(o.model);
  const TypeGraph tg = compile(m);
  Output out(o.output);
  out.get() << (o.dot ? type_graph_dot(tg) : compile_report(tg));
  return 0;
}

struct CorrelateOpts {
  std::string model;
  std::string input = "-";
  std::string output;
  std::string format = "canonical";
  std::string events;
  std::string variant;
  bool no_implicit = false;
  bool hypothesize = false;
  bool no_consolidate = false;
  bool strict = false;
  bool all_vertices = false;
};

EngineConfig config_from(const CorrelateOpts& o) {
  if (!o.variant.empty()) return EngineConfig::variant(o.variant);
  EngineConfig c;
  c.implicit_correlation = !o.no_implicit;
  c.hypothesize = o.hypothesize;
  c.consolidate_hypotheses = o.hypothesize && !o.no_consolidate;
  return c;
}

int cmd_correlate(const CorrelateOpts& o) {
  const AttackModel m = load(o.model);
  const TypeGraph tg = compile(m);
  EngineConfig cfg;
  try {
    cfg = config_from(o);
  } catch (const std::invalid_argument& e) {
    throw Exit{1, e.what()};
  }

  ValueCodec codec;
  AlertReader reader(m, codec);
  Session s(tg, cfg);
  Input in(o.input);
  std::unique_ptr<Output> events;
  if (!o.events.empty()) events = std::make_unique<Output>(o.events);

  Stopwatch clock;
  std::uint64_t errors = 0;
  std::vector<Event> ev;
  std::string line, err;
  std::size_t line_no = 0;
  auto report_error = [&](const std::string& reason) {
    ++errors;
    const std::string text = "ERR " + std::to_string(line_no) + " " + reason;
    if (events) events->get() << text << "\n";
    if (o.strict) {
      std::cerr << text << "\n";
      throw Exit{3, ""};
    }
  };
  while (std::getline(in.get(), line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto alert = reader.parse(line, err);
    if (!alert) {
      report_error(err);
      continue;
    }
    ev.clear();
    s.process_alert(*alert, ev);
    for (const Event& e : ev) {
      if (e.kind == Event::Kind::error)
        report_error(e.text);
      else if (events)
        events->get() << format_event(e, s.graph(), m, codec) << "\n";
    }
  }
  RunStats st;
  st.wall_time = clock.wall();
  st.cpu_time = clock.cpu();
  fill_graph_stats(s, st);
  st.errors = errors;

  const GraphView view = o.all_vertices ? full_view(s.graph()) : prune_trivial(s.graph());
  Output out(o.output);
  if (o.format == "dot")
    write_dot(out.get(), view, m, codec);
  else
    write_canonical(out.get(), view, m, codec);
  out.get().flush();
  std::cerr << st.stats_line() << "\n";
  return 0;
}

struct GenOpts {
  std::string model;
  std::string network_class = "C";
  std::string prefix = "10.0.0.0/24";
  std::uint64_t count = 0;
  std::uint64_t seed = 1;
  std::string types;
  std::string scenario;
  std::string output;
};

// Interleaving uses its own stream so changing the scenario never changes
// the noise.
constexpr std::uint64_t kInterleaveSalt = 0x9E3779B97F4A7C15ull;

std::vector<InputAlert> build_stream(const AttackModel& m, ValueCodec& codec, const GenOpts& o) {
  GenSpec spec;
  if (o.network_class == "B")
    spec.network_class = NetworkClass::B;
  else if (o.network_class == "C")
    spec.network_class = NetworkClass::C;
  else
    throw Exit{1, "--class must be B or C"};
  try {
    spec.network_prefix = parse_prefix(o.prefix, spec.network_class);
  } catch (const GenError& e) {
    throw Exit{1, e.what()};
  }
  spec.count = o.count;
  spec.seed = o.seed;
  if (o.types.empty()) {
    for (TypeId t = 0; t < m.types.size(); ++t) spec.type_pool.push_back(t);
  } else {
    for (const std::string& name : split_list(o.types)) {
      auto t = m.find_type(name);
      if (!t) throw Exit{1, "unknown type '" + name + "' in --types"};
      spec.type_pool.push_back(*t);
    }
  }
  std::vector<InputAlert> noise;
  try {
    noise = generate_noise(m, spec);
  } catch (const GenError& e) {
    throw Exit{1, e.what()};
  }
  if (o.scenario.empty()) return noise;
  std::vector<InputAlert> scenario = read_stream(o.scenario, m, codec, true);
  return interleave(std::move(scenario), std::move(noise), o.seed ^ kInterleaveSalt);
}

int cmd_generate(const GenOpts& o) {
  const AttackModel m = load(o.model);
  ValueCodec codec;
  const std::vector<InputAlert> alerts = build_stream(m, codec, o);
  Output out(o.output);
  for (const InputAlert& a : alerts) out.get() << format_alert(m, codec, a) << '\n';
  return 0;
}

struct BenchOpts {
  GenOpts gen;
  int reps = 3;
  std::string variants = "1a,1b,2a,2b";
};

int cmd_bench(const BenchOpts& o) {
  if (o.reps < 1) throw Exit{1, "--reps must be at least 1"};
  const AttackModel m = load(o.gen.model);
  const TypeGraph tg = compile(m);
  ValueCodec codec;
  const std::vector<InputAlert> alerts = build_stream(m, codec, o.gen);
  std::vector<BenchRow> rows;
  for (const std::string& v : split_list(o.variants)) {
    try {
      (void)EngineConfig::variant(v);
    } catch (const std::invalid_argument& e) {
      throw Exit{1, e.what()};
    }
    rows.push_back(bench_variant(tg, v, alerts, o.reps));
  }
  std::cout << "alerts " << alerts.size() << " reps " << o.reps << "\n" << format_bench_table(rows);
  return 0;
}

struct OracleOpts {
  std::string model;
  std::string input;
  std::string against;
  std::size_t max_alerts = kOracleMaxAlerts;
};

// CORR lines of an engine event log, as id pairs.
std::set<IdEdge> read_event_edges(const std::string& path) {
  Input in(path);
  std::set<IdEdge> out;
  std::string line;
  while (std::getline(in.get(), line)) {
    std::istringstream ss(line);
    std::string tag, a, b;
    if (ss >> tag >> a >> b && tag == "CORR") out.emplace(a, b);
  }
  return out;
}

int cmd_oracle(const OracleOpts& o) {
  const AttackModel m = load(o.model);
  const TypeGraph tg = compile(m);
  ValueCodec codec;
  const std::vector<InputAlert> alerts = read_stream(o.input, m, codec, false);
  EdgeReport report;
  try {
    report = batch_correlate(tg, alerts, o.max_alerts);
  } catch (const std::length_error& e) {
    throw Exit{1, e.what()};
  }

  std::set<IdEdge> engine;
  if (o.against.empty()) {
    Session s(tg, EngineConfig::variant("1a"));
    run_stream(s, alerts);
    engine = id_edges(s.graph());
  } else {
    // Edges touching hypothesized vertices have no oracle counterpart.
    std::set<std::string> ids;
    for (std::size_t k = 0; k < alerts.size(); ++k) ids.insert(alert_id(alerts[k], k));
    for (const IdEdge& e : read_event_edges(o.against))
      if (ids.count(e.first) && ids.count(e.second)) engine.insert(e);
  }
  const DiffReport d = diff(report, engine);
  std::cout << "oracle-edges " << report.edges.size() << " engine-edges " << engine.size() << "\n"
            << d.render();
  return d.empty() ? 0 : 4;
}

void add_gen_flags(CLI::App* a, GenOpts& g) {
  a->add_option("--model", g.model, "Model file")->required();
  a->add_option("--class", g.network_class, "Network class")->check(CLI::IsMember({"B", "C"}));
  a->add_option("--prefix", g.prefix, "Monitored network, a.b.c.d/len");
  a->add_option("--count", g.count, "Number of noise alerts")->required();
  a->add_option("--seed", g.seed, "PRNG seed");
  a->add_option("--types", g.types, "Comma-separated type pool (default all types)");
  a->add_option("--scenario", g.scenario, "Scenario stream to interleave");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attack type graph alert correlator"};
  app.require_subcommand(1);

  CompileOpts co;
  auto* c = app.add_subcommand("compile", "Compile a model and report the type graph");
  auto* c_model = c->add_option("--model", co.model, "Model file");
  c->add_option("model_file", co.model, "Model file")->excludes(c_model);
  c->add_flag("--dot", co.dot, "Emit DOT instead of the text report");
  c->add_option("--output,-o", co.output, "Output file (default stdout)");

  CorrelateOpts ro;
  auto* r = app.add_subcommand("correlate", "Correlate an alert stream");
  r->add_option("--model", ro.model, "Model file")->required();
  r->add_option("--input,-i", ro.input, "Alert stream, - for stdin");
  r->add_option("--output,-o", ro.output, "Graph output file (default stdout)");
  r->add_option("--format", ro.format, "Graph format")->check(CLI::IsMember({"canonical", "dot"}));
  r->add_option("--events", ro.events, "Write the event log to this file (- for stdout)");
  r->add_option("--variant", ro.variant, "Engine variant")->check(CLI::IsMember({"1a", "1b", "2a", "2b"}));
  r->add_flag("--no-implicit", ro.no_implicit, "Disable implicit correlation");
  r->add_flag("--hypothesize", ro.hypothesize, "Hypothesize missing alerts");
  r->add_flag("--no-consolidate", ro.no_consolidate, "Keep indistinguishable hypotheses apart");
  r->add_flag("--strict", ro.strict, "Abort on the first input error");
  r->add_flag("--all-vertices", ro.all_vertices, "Export isolated vertices too");

  GenOpts go;
  auto* g = app.add_subcommand("generate", "Generate a synthetic alert stream");
  add_gen_flags(g, go);
  g->add_option("--output,-o", go.output, "Output file (default stdout)");

  BenchOpts bo;
  auto* b = app.add_subcommand("bench", "Benchmark engine variants on a generated stream");
  add_gen_flags(b, bo.gen);
  b->add_option("--reps", bo.reps, "Repetitions per variant");
  b->add_option("--variants", bo.variants, "Comma-separated variants");

  OracleOpts oo;
  auto* o = app.add_subcommand("oracle", "Compare the engine with the batch oracle");
  o->add_option("--model", oo.model, "Model file")->required();
  o->add_option("--input,-i", oo.input, "Alert stream, - for stdin")->required();
  o->add_option("--against", oo.against, "Engine event log (default: run variant 1a)");
  o->add_option("--max", oo.max_alerts, "Alert limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*c) {
      if (co.model.empty()) throw Exit{1, "compile: a model file is required"};
      return cmd_compile(co);
    }
    if (*r) return cmd_correlate(ro);
    if (*g) return cmd_generate(go);
    if (*b) return cmd_bench(bo);
    if (*o) return cmd_oracle(oo);
  } catch (const Exit& e) {
    if (!e.message.empty()) std::cerr << "atg: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "atg: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
