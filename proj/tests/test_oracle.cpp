#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace flatlcm;
using ref::W;

TEST_CASE("pure writer is truncated at the bound", "[oracle]") {
  const Machine m = parse_machine("alphabet a\nloc q\nrule q -> q : !a\n");
  OracleConfig cfg;
  cfg.channel_bound = 3;
  const Exploration ex = oracle_explore(m, {0, W("")}, cfg);
  CHECK_FALSE(ex.exhaustive);
  std::set<Word> seen;
  for (const auto& c : ex.nodes) seen.insert(c.word);
  CHECK(seen == std::set<Word>{W(""), W("a"), W("aa"), W("aaa")});
  REQUIRE(ex.overflow.size() == 1);
  CHECK(ex.overflow[0].word == W("aaaa"));
}

TEST_CASE("read from the empty channel blocks", "[oracle]") {
  const Machine m = parse_machine("alphabet a\nloc p q\nrule p -> q : ?a\n");
  const Exploration ex = oracle_explore(m, {0, W("")}, {});
  CHECK(ex.exhaustive);
  CHECK(ex.nodes.size() == 1);
  CHECK(ex.succ[0].empty());
  CHECK(oracle_coverability(m, {0, W("")}, {1, W("")}).answer == Tri::False);
  CHECK(oracle_coverability(m, {0, W("a")}, {1, W("")}).answer == Tri::True);
}

TEST_CASE("fig1 with n = 3", "[oracle]") {
  const Instance in = gen_fig1(3);
  const OracleVerdict v = oracle_decide(in.machine, in.query);
  CHECK(v.answer == Tri::True);
  REQUIRE_FALSE(v.trace.empty());
  CHECK(v.trace.front() == in.query.source);
  CHECK(v.trace.back().loc == in.query.target->loc);
}

TEST_CASE("trace steps follow rules", "[oracle]") {
  const Instance in = gen_fig1(2);
  const OracleVerdict v = oracle_decide(in.machine, in.query);
  REQUIRE(v.answer == Tri::True);
  for (std::size_t i = 0; i + 1 < v.trace.size(); ++i) {
    bool step = false;
    for (const auto& r : in.machine.rules)
      if (r.from == v.trace[i].loc && r.to == v.trace[i + 1].loc && ref::max_post(r.actions, v.trace[i].word) == v.trace[i + 1].word)
        step = true;
    REQUIRE(step);
  }
}

TEST_CASE("liveness verdicts", "[oracle]") {
  const Machine m = parse_machine("alphabet a\nloc q\nrule q -> q : ?a !aa\n");
  CHECK(oracle_unbounded(m, {0, W("a")}).answer == Tri::True);
  CHECK(oracle_nonterm(m, {0, W("a")}).answer == Tri::True);
  CHECK(oracle_nonterm(m, {0, W("")}).answer == Tri::False);
  const Machine acyclic = parse_machine("alphabet a\nloc p q\nrule p -> q : !a\n");
  CHECK(oracle_nonterm(acyclic, {0, W("aa")}).answer == Tri::False);
  CHECK(oracle_unbounded(acyclic, {0, W("aa")}).answer == Tri::False);
  const Machine keep = parse_machine("alphabet a b\nloc q\nrule q -> q : ?a !a\n");
  CHECK(oracle_repcov(keep, {0, W("a")}, {0, W("a")}).answer == Tri::True);
  CHECK(oracle_repcov(keep, {0, W("a")}, {0, W("b")}).answer == Tri::False);
}

TEST_CASE("full lossy and maximal content agree", "[oracle]") {
  OracleConfig full, maxc;
  full.mode = OracleMode::FullLossy;
  full.channel_bound = maxc.channel_bound = 5;
  int both = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const Machine m = gen_random_flat(seed);
    detail::Rng r(seed + 5);
    const Config src = random_config(r, m, 3, 3), tgt = random_config(r, m, 3, 3);
    const Tri a = oracle_coverability(m, src, tgt, full).answer, b = oracle_coverability(m, src, tgt, maxc).answer;
    if (a == Tri::Inconclusive || b == Tri::Inconclusive) continue;
    ++both;
    INFO("seed " << seed);
    REQUIRE(a == b);
  }
  CHECK(both > 50);
}

TEST_CASE("exact reachability needs a step", "[oracle]") {
  const Machine m = parse_machine("alphabet a\nloc p\n");
  CHECK(oracle_reach_exact(m, {0, W("a")}, {0, W("a")}).answer == Tri::True);
  CHECK(oracle_reach_exact(m, {0, W("a")}, {0, W("")}).answer == Tri::False);
  CHECK(oracle_coverability(m, {0, W("a")}, {0, W("")}).answer == Tri::True);
}
