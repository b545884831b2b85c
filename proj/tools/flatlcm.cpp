// flatlcm: command-line front end for flat lossy channel machines.
//
// Exit codes: 0 answered true, 1 answered false, 2 usage or parse error,
// 3 not flat or inconclusive.

#include <flatlcm/gen.hpp>
#include <flatlcm/oracle.hpp>
#include <flatlcm/solver.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace flatlcm;
using nlohmann::json;

namespace {

enum Exit { Yes = 0, No = 1, Usage = 2, Inconclusive = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

Machine load_machine(const std::string& path) { return parse_machine(slurp(path)); }

/// `loc:word`; the word follows machine word syntax, so `q:` and `q:.` are
/// both the empty channel and `q:ab,cd` spells multi-character letters.
Config parse_config(const Machine& m, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("configuration '" + text + "' is not loc:word");
  return {m.location(text.substr(0, colon)), m.parse_word(text.substr(colon + 1))};
}

Config source_or_initial(const Machine& m, const std::string& from) {
  if (!from.empty()) return parse_config(m, from);
  if (!m.initial) throw UsageError("--from is required: the machine has no initial location");
  return {*m.initial, {}};
}

std::string format_config(const Machine& m, const Config& c) {
  return m.locations[c.loc] + ":" + (c.word.empty() ? std::string() : m.format_word(c.word));
}

std::string describe(const Machine& m, const Slp& z, std::size_t expand_limit) {
  const BigNat len = slp_len(z);
  if (len < BigNat(expand_limit)) return m.format_word(slp_expand(z));
  std::ostringstream os;
  os << "<slp size " << z.nodes().size() << ", length " << len << ">";
  return os.str();
}

void print_human(const Machine& m, const Query& q, const Verdict& v, std::size_t expand_limit) {
  std::cout << kind_name(q.kind) << ": " << (v.answer ? "true" : "false") << "\n";
  if (!v.witness) return;
  const Witness& w = *v.witness;
  for (std::size_t i = 0; i < w.segments.size(); ++i) {
    const Segment& s = w.segments[i];
    std::cout << "  " << m.locations[s.location] << "  " << describe(m, s.z, expand_limit);
    if (s.n != 0) std::cout << "  cycle x" << s.n;
    if (s.rule >= 0) std::cout << "  then rule " << s.rule;
    std::cout << "\n";
  }
  if (w.loop) std::cout << "  loop at " << format_config(m, *w.loop) << "\n";
  if (!w.constraints.empty()) {
    std::cout << "  constraints";
    for (const auto& c : w.constraints) std::cout << " " << m.format_word(c);
    std::cout << "\n";
  }
}

struct SolveArgs {
  std::string machine, from, to, emit_witness;
  std::vector<std::string> fair;
  bool json = false;
  bool plain = false;
  std::size_t budget = 0;
  std::size_t expand_limit = 256;
};

int run_solve(QueryKind kind, const SolveArgs& a) {
  const Machine m = load_machine(a.machine);
  Query q;
  q.kind = kind;
  q.source = source_or_initial(m, a.from);
  if (has_target(kind)) {
    if (a.to.empty()) throw UsageError("--to is required");
    q.target = parse_config(m, a.to);
  }
  for (const auto& f : a.fair) q.fair_set.push_back(m.location(f));
  SolverOptions opt;
  opt.plain_backend = a.plain;
  opt.step_budget = a.budget;
  const Verdict v = decide(m, q, opt);
  if (a.json) std::cout << verdict_to_json(m, q, v).dump(2) << "\n";
  else print_human(m, q, v, a.expand_limit);
  if (!a.emit_witness.empty() && v.witness) spill(a.emit_witness, witness_to_json(m, *v.witness).dump(2) + "\n");
  return v.answer ? Yes : No;
}

/// Accepts a bare object or a verdict envelope carrying it under `key`.
json unwrap(const json& j, const char* key) { return j.contains(key) ? j.at(key) : j; }

int run_validate(const std::string& mpath, const std::string& qpath, const std::string& wpath, bool as_json) {
  const Machine m = load_machine(mpath);
  const Query q = query_from_json(m, unwrap(json::parse(slurp(qpath)), "query"));
  const Witness w = witness_from_json(m, unwrap(json::parse(slurp(wpath)), "witness"));
  const Validation r = validate_witness(m, q, w);
  if (as_json) {
    json j{{"accepted", r.ok}};
    if (!r.ok) j["segment"] = r.segment, j["error"] = r.error;
    std::cout << j.dump(2) << "\n";
  } else if (r.ok) {
    std::cout << "accepted\n";
  } else {
    std::cout << "rejected at segment " << r.segment << ": " << r.error << "\n";
  }
  return r.ok ? Yes : No;
}

int run_check_flat(const std::string& path, bool as_json) {
  const Machine m = load_machine(path);
  const FlatnessInfo fl = analyze_flatness(m);
  if (as_json) {
    json j{{"flat", fl.is_flat}};
    if (fl.is_flat) {
      json cycles = json::object();
      for (int q = 0; q < m.num_locations(); ++q)
        if (!fl.cycle_rules[q].empty()) cycles[m.locations[q]] = m.format_actions(fl.cycles[q]);
      j["cycles"] = cycles;
    }
    std::cout << j.dump(2) << "\n";
  } else if (fl.is_flat) {
    std::cout << "flat\n";
    for (int q = 0; q < m.num_locations(); ++q)
      if (!fl.cycle_rules[q].empty()) std::cout << "  " << m.locations[q] << "  " << m.format_actions(fl.cycles[q]) << "\n";
  } else {
    std::cout << "not flat: location " << m.locations[m.rules[fl.offending->first.front()].from]
              << " lies on two cycles\n";
  }
  return fl.is_flat ? Yes : Inconclusive;
}

struct OracleArgs {
  std::string machine, kind = "coverability", from, to, mode = "max";
  std::vector<std::string> fair;
  std::size_t bound = 10, steps = 10000;
  bool json = false;
};

int run_oracle(const OracleArgs& a) {
  const Machine m = load_machine(a.machine);
  Query q;
  q.kind = kind_from_name(a.kind);
  q.source = source_or_initial(m, a.from);
  if (has_target(q.kind)) {
    if (a.to.empty()) throw UsageError("--to is required");
    q.target = parse_config(m, a.to);
  }
  for (const auto& f : a.fair) q.fair_set.push_back(m.location(f));
  OracleConfig cfg;
  cfg.channel_bound = a.bound;
  cfg.step_bound = a.steps;
  if (a.mode == "full") cfg.mode = OracleMode::FullLossy;
  else if (a.mode != "max") throw UsageError("--mode is full or max");
  const OracleVerdict v = oracle_decide(m, q, cfg);
  if (a.json) {
    json trace = json::array();
    for (const auto& c : v.trace) trace.push_back(format_config(m, c));
    std::cout << json{{"query", query_to_json(m, q)}, {"answer", tri_name(v.answer)}, {"trace", trace}}.dump(2)
              << "\n";
  } else {
    std::cout << kind_name(q.kind) << ": " << tri_name(v.answer) << "\n";
    for (const auto& c : v.trace) std::cout << "  " << format_config(m, c) << "\n";
  }
  if (v.answer == Tri::Inconclusive) return Inconclusive;
  return v.answer == Tri::True ? Yes : No;
}

struct GenArgs {
  std::string family, input, out, query_out;
  int n = 0;
  std::uint64_t seed = 0;
  int vars = 3, clauses = 3;
};

int run_gen(const GenArgs& a) {
  if (a.family == "cnf") {
    spill(a.out, print_dimacs(random_cnf(a.seed, a.vars, a.clauses)));
    return Yes;
  }
  Instance in;
  if (a.family == "fig1") {
    if (a.n < 1) throw UsageError("fig1 needs -n >= 1");
    in = gen_fig1(a.n);
  } else if (a.family == "sat-acyclic" || a.family == "sat-acyclic-live" || a.family == "sat-singlepath") {
    if (a.input.empty()) throw UsageError(a.family + " needs a DIMACS file");
    const Cnf c = parse_dimacs(slurp(a.input));
    if (a.family == "sat-singlepath") {
      in = gen_singlepath_sat(c);
    } else {
      AcyclicSatOptions o;
      o.liveness = a.family == "sat-acyclic-live";
      in = gen_acyclic_sat(c, o);
    }
  } else if (a.family == "random") {
    in.machine = gen_random_flat(a.seed);
  } else {
    throw UsageError("unknown family " + a.family);
  }
  spill(a.out, print_machine(in.machine));
  if (!a.query_out.empty()) {
    if (a.family == "random") throw UsageError("random machines carry no query");
    spill(a.query_out, query_to_json(in.machine, in.query).dump(2) + "\n");
  }
  return Yes;
}

void add_solve(CLI::App& app, const std::string& name, const std::string& help, QueryKind kind, SolveArgs& a,
               int& code) {
  auto* c = app.add_subcommand(name, help);
  c->add_option("machine", a.machine, "machine file")->required();
  c->add_option("--from", a.from, "source loc:word, default the initial location with an empty channel");
  if (has_target(kind)) c->add_option("--to", a.to, "target loc:word")->required();
  if (kind == QueryKind::Buchi) c->add_option("--fair", a.fair, "fair locations")->required()->delimiter(',');
  c->add_flag("--json", a.json, "print the verdict as JSON");
  c->add_option("--emit-witness", a.emit_witness, "write the witness JSON to a file, - for stdout");
  c->add_flag("--plain", a.plain, "plain-word backend");
  c->add_option("--budget", a.budget, "search step budget, 0 for none");
  c->add_option("--expand-limit", a.expand_limit, "expand witness contents shorter than this");
  c->callback([&code, kind, &a] { code = run_solve(kind, a); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision procedures for flat lossy channel machines"};
  app.require_subcommand(1, 1);
  int code = Usage;

  std::string flat_path;
  bool flat_json = false;
  auto* cf = app.add_subcommand("check-flat", "report whether the control graph is flat");
  cf->add_option("machine", flat_path, "machine file")->required();
  cf->add_flag("--json", flat_json, "JSON output");
  cf->callback([&] { code = run_check_flat(flat_path, flat_json); });

  SolveArgs reach, cover, nonterm, buchi, unbounded, repcov;
  add_solve(app, "reach", "exact reachability", QueryKind::ReachExact, reach, code);
  add_solve(app, "cover", "coverability", QueryKind::Coverability, cover, code);
  add_solve(app, "nonterm", "existence of an infinite run", QueryKind::Nonterm, nonterm, code);
  add_solve(app, "buchi", "infinite run visiting a fair location infinitely often", QueryKind::Buchi, buchi, code);
  add_solve(app, "unbounded", "infinite reachability set", QueryKind::Unbounded, unbounded, code);
  add_solve(app, "repcov", "repeated coverability of --to", QueryKind::RepCov, repcov, code);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate instances");
  g->add_option("family", gen.family, "fig1, sat-acyclic, sat-acyclic-live, sat-singlepath, random or cnf")->required();
  g->add_option("input", gen.input, "DIMACS file for the sat families");
  g->add_option("-n", gen.n, "fig1 size");
  g->add_option("--seed", gen.seed, "seed for random and cnf");
  g->add_option("--vars", gen.vars, "cnf variables");
  g->add_option("--clauses", gen.clauses, "cnf clauses");
  g->add_option("-o,--out", gen.out, "output file, default stdout");
  g->add_option("--query", gen.query_out, "write the instance query JSON here");
  g->callback([&] { code = run_gen(gen); });

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "bounded forward exploration");
  o->add_option("machine", orc.machine, "machine file")->required();
  o->add_option("--kind", orc.kind, "reach_exact, coverability, nonterm, buchi, unbounded or repcov");
  o->add_option("--from", orc.from, "source loc:word");
  o->add_option("--to", orc.to, "target loc:word");
  o->add_option("--fair", orc.fair, "fair locations")->delimiter(',');
  o->add_option("--bound", orc.bound, "channel bound");
  o->add_option("--steps", orc.steps, "step bound");
  o->add_option("--mode", orc.mode, "max or full");
  o->add_flag("--json", orc.json, "JSON output");
  o->callback([&] { code = run_oracle(orc); });

  std::string vm, vq, vw;
  bool vjson = false;
  auto* v = app.add_subcommand("validate", "re-check a witness");
  v->add_option("machine", vm, "machine file")->required();
  v->add_option("query", vq, "query or verdict JSON, - for stdin")->required();
  v->add_option("witness", vw, "witness or verdict JSON, - for stdin")->required();
  v->add_flag("--json", vjson, "JSON output");
  v->callback([&] { code = run_validate(vm, vq, vw, vjson); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? Yes : Usage;
  } catch (const NotFlatError& e) {
    std::cerr << "flatlcm: " << e.what() << "\n";
    return Inconclusive;
  } catch (const BudgetExceeded& e) {
    std::cerr << "flatlcm: " << e.what() << "\n";
    return Inconclusive;
  } catch (const std::exception& e) {
    std::cerr << "flatlcm: " << e.what() << "\n";
    return Usage;
  }
  return code;
}
