#include <catch_amalgamated.hpp>

#include "support.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(FLATLCM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / ("flatlcm_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("reach on fig1 answers true with a valid witness", "[cli]") {
  const fs::path d = scratch();
  REQUIRE(cli("gen fig1 -n 10 -o " + q(d / "f.lcm") + " --query " + q(d / "f.json")).code == 0);
  const Run r = cli("reach " + q(d / "f.lcm") + " --from 'q0:' --to \"q'0:\" --json --emit-witness " + q(d / "w.json"));
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("answer") == true);
  CHECK(cli("validate " + q(d / "f.lcm") + " " + q(d / "f.json") + " " + q(d / "w.json")).code == 0);
  const Run env = cli("validate " + q(d / "f.lcm") + " " + q(d / "f.json") + " - < " + q(d / "w.json"));
  CHECK(env.code == 0);
  auto w = nlohmann::json::parse(std::ifstream(d / "w.json"));
  w["segments"][2]["exponent"] = "3";
  write(d / "bad.json", w.dump());
  const Run bad = cli("validate " + q(d / "f.lcm") + " " + q(d / "f.json") + " " + q(d / "bad.json"));
  CHECK(bad.code == 1);
  CHECK(bad.out.find("rejected") != std::string::npos);
}

TEST_CASE("human output keeps long contents compressed", "[cli]") {
  const fs::path d = scratch();
  REQUIRE(cli("gen fig1 -n 12 -o " + q(d / "f12.lcm")).code == 0);
  const Run r = cli("reach " + q(d / "f12.lcm") + " --to \"q'0:\"");
  CHECK(r.code == 0);
  CHECK(r.out.find("<slp size") != std::string::npos);
  CHECK(r.out.find(std::string(300, 'a')) == std::string::npos);
}

TEST_CASE("SAT pipeline exit codes follow satisfiability", "[cli]") {
  const fs::path d = scratch();
  write(d / "sat.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
  write(d / "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
  for (const auto& [file, expect] : std::vector<std::pair<std::string, int>>{{"sat.cnf", 0}, {"unsat.cnf", 1}}) {
    REQUIRE(cli("gen sat-acyclic " + q(d / file) + " -o " + q(d / "m.lcm")).code == 0);
    CHECK(cli("reach " + q(d / "m.lcm") + " --from I_b: --to V_e:").code == expect);
    REQUIRE(cli("gen sat-acyclic-live " + q(d / file) + " -o " + q(d / "l.lcm")).code == 0);
    CHECK(cli("nonterm " + q(d / "l.lcm")).code == expect);
  }
}

TEST_CASE("usage and parse errors exit 2", "[cli]") {
  const fs::path d = scratch();
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("reach").code == 2);
  write(d / "broken.lcm", "alphabet a\nloc p\nrule p -> p ?a\n");
  CHECK(cli("reach " + q(d / "broken.lcm") + " --from p: --to p:").code == 2);
  write(d / "ok.lcm", "alphabet a\nloc p\n");
  CHECK(cli("reach " + q(d / "ok.lcm") + " --from p --to p:").code == 2);
  CHECK(cli("reach " + q(d / "ok.lcm") + " --from nowhere: --to p:").code == 2);
  CHECK(cli("reach " + q(d / "missing.lcm") + " --from p: --to p:").code == 2);
  CHECK(cli("nonterm " + q(d / "ok.lcm")).code == 2);
}

TEST_CASE("non-flat machines exit 3", "[cli]") {
  const fs::path d = scratch();
  write(d / "nf.lcm", "alphabet a\nloc p init\nrule p -> p : !a\nrule p -> p : ?a\n");
  CHECK(cli("check-flat " + q(d / "nf.lcm")).code == 3);
  CHECK(cli("cover " + q(d / "nf.lcm") + " --to p:a").code == 3);
  write(d / "f.lcm", "alphabet a\nloc p init\nrule p -> p : ?a !aa\n");
  const Run r = cli("check-flat " + q(d / "f.lcm") + " --json");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out).at("cycles").at("p") == "?a !aa");
}

TEST_CASE("liveness subcommands", "[cli]") {
  const fs::path d = scratch();
  write(d / "g.lcm", "alphabet a\nloc p init q\nrule p -> p : ?a !aa\nrule p -> q : ?a\n");
  CHECK(cli("nonterm " + q(d / "g.lcm") + " --from p:a").code == 0);
  CHECK(cli("nonterm " + q(d / "g.lcm")).code == 1);
  CHECK(cli("unbounded " + q(d / "g.lcm") + " --from p:a").code == 0);
  CHECK(cli("buchi " + q(d / "g.lcm") + " --from p:a --fair q").code == 1);
  CHECK(cli("buchi " + q(d / "g.lcm") + " --from p:a --fair p,q").code == 0);
  CHECK(cli("repcov " + q(d / "g.lcm") + " --from p:a --to p:a").code == 0);
  const Run j = cli("nonterm " + q(d / "g.lcm") + " --from p:a --json --emit-witness " + q(d / "w.json"));
  write(d / "v.json", j.out);
  CHECK(cli("validate " + q(d / "g.lcm") + " " + q(d / "v.json") + " " + q(d / "w.json")).code == 0);
  CHECK(cli("validate " + q(d / "g.lcm") + " " + q(d / "v.json") + " - < " + q(d / "v.json")).code == 0);
}

TEST_CASE("oracle subcommand", "[cli]") {
  const fs::path d = scratch();
  write(d / "w.lcm", "alphabet a\nloc p init\nrule p -> p : !a\n");
  CHECK(cli("oracle " + q(d / "w.lcm") + " --to p:aaa").code == 0);
  CHECK(cli("oracle " + q(d / "w.lcm") + " --to p:aaaaaa --bound 3").code == 3);
  CHECK(cli("oracle " + q(d / "w.lcm") + " --kind nonterm --mode full --bound 3").code == 0);
  CHECK(cli("oracle " + q(d / "w.lcm") + " --mode weird --to p:").code == 2);
  const Run r = cli("oracle " + q(d / "w.lcm") + " --to p:aa --json");
  CHECK(nlohmann::json::parse(r.out).at("answer") == "true");
}

TEST_CASE("verdict JSON schema", "[cli]") {
  const fs::path d = scratch();
  REQUIRE(cli("gen fig1 -n 2 -o " + q(d / "f2.lcm")).code == 0);
  const auto j = nlohmann::json::parse(cli("reach " + q(d / "f2.lcm") + " --to \"q'0:\" --json").out);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"answer", "query", "stats", "witness"});
  const auto& seg = j.at("witness").at("segments");
  REQUIRE(seg.size() == 6);
  CHECK(seg[0].at("location") == "q0");
  CHECK(seg[0].at("exponent") == "0");
  CHECK(seg[0].at("rule_id") == 0);
  CHECK(seg[0].at("slp_grammar") == "root empty\n");
  CHECK(seg[2].at("exponent") == "2");
  CHECK(seg.back().at("rule_id").is_null());
  std::vector<std::string> skeys;
  for (const auto& [k, v] : j.at("stats").items()) skeys.push_back(k);
  CHECK(skeys == std::vector<std::string>{"arrivals", "entries", "max_basis", "members", "millis", "pruned",
                                          "repcov_canonical_only", "repcov_cap_exceeded", "seeds",
                                          "undecided_subsumptions"});
}

TEST_CASE("gen writes DIMACS and random machines", "[cli]") {
  const Run c = cli("gen cnf --seed 3 --vars 4 --clauses 5");
  CHECK(c.code == 0);
  CHECK(flatlcm::parse_dimacs(c.out) == flatlcm::random_cnf(3, 4, 5));
  const Run m = cli("gen random --seed 9");
  CHECK(m.code == 0);
  CHECK(flatlcm::parse_machine(m.out) == flatlcm::gen_random_flat(9));
  CHECK(cli("gen nope").code == 2);
}
