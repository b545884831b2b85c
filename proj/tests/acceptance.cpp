// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: flatlcm_acceptance [criterion...]; no arguments runs all eight.
// Exit status is the number of failed criteria.

#include "support.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

using namespace flatlcm;
using ref::seq;
using ref::W;

namespace {

// Pinned limits.
constexpr double c1_limit_ms = 1.0;
constexpr int c1_timing_runs = 5;
constexpr double c2_limit_s = 10.0;
constexpr int c2_random_cases = 100000;
constexpr double c3_instance_limit_s = 2.0;
constexpr double c4_limit_s = 60.0;
constexpr int c4_cases = 100000;
constexpr std::size_t c4_max_len = 10000;
constexpr double c5_limit_s = 300.0;
constexpr int c5_machines = 500;
constexpr double c5_min_conclusive = 0.80;
constexpr double c6_limit_s = 300.0;
constexpr int c6_formulas = 200;
constexpr std::size_t c6_step_budget = 20000;
constexpr double c7_limit_s = 60.0;
constexpr double c8_limit_s = 60.0;
constexpr int c8_fixpoint_cases = 10000;
constexpr std::size_t c8_lasso_steps = 10000;

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_).count(); }

 private:
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

Word b(std::size_t n) { return Word(n, 'b'); }
Word a(std::size_t n) { return Word(n, 'a'); }

std::vector<Word> ab5_sequence() {
  std::vector<Word> e{b(4) + a(3), b(8) + a(2), b(12) + a(1), b(16)};
  for (std::size_t k = 5; k <= 21; ++k) e.push_back(b(k <= 20 ? 20 - k : 0));
  return e;
}

void criterion1(Outcome& o) {
  const ActionSeq s = seq("!abbbbb ?bbbb");
  const auto expect = ab5_sequence();
  double best = 1e9;
  for (int run = 0; run < c1_timing_runs; ++run) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Word> ys;
    Word y = a(4);
    for (std::size_t k = 1; k <= 21; ++k) ys.push_back(y = pr(s, y));
    const std::size_t L = iteration_number(s, a(4));
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, ms);
    o.require(ys == expect, "pr sequence differs");
    o.require(L == 20, "iteration number " + std::to_string(L));
  }
  o.require(best < c1_limit_ms, "too slow");
  o.detail << "y1..y21 exact, L = 20, best of " << c1_timing_runs << " runs " << best << " ms (limit " << c1_limit_ms
           << ")";
}

void criterion2(Outcome& o) {
  Clock clk;
  for (std::size_t n = 1; n <= 10; ++n)
    for (std::size_t m = 1; m <= 10; ++m) {
      const ActionSeq s{Action::write(W("a") + b(n + 1)), Action::read(b(n))};
      const std::size_t L = iteration_number(s, a(m));
      o.require(L == m * (n + 1), "L(n=" + std::to_string(n) + ", m=" + std::to_string(m) + ") = " + std::to_string(L));
    }
  ref::Rand r(2);
  std::size_t worst_slack = SIZE_MAX;
  for (int i = 0; i < c2_random_cases; ++i) {
    const ActionSeq s = r.actions(r.range(1, 3), 10);
    const Word x = r.word(3, 8);
    const std::size_t L = iteration_number(s, x), bound = x.size() * (rea(s).size() + 1);
    o.require(L <= bound, "bound violated");
    if (L <= bound) worst_slack = std::min(worst_slack, bound - L);
  }
  const double t = clk.seconds();
  o.require(t < c2_limit_s, "too slow");
  o.detail << "100 family cases exact, " << c2_random_cases << " random cases within bound (min slack " << worst_slack
           << "), " << t << " s (limit " << c2_limit_s << ")";
}

void criterion3(Outcome& o) {
  double worst = 0;
  for (int n = 2; n <= 20; ++n) {
    Clock clk;
    const Instance in = gen_fig1(n);
    const Verdict v = decide(in.machine, in.query);
    const std::string tag = "n = " + std::to_string(n) + ": ";
    o.require(v.answer && v.witness.has_value(), tag + "no witness");
    if (!v.witness) continue;
    o.require(validate_witness(in.machine, in.query, *v.witness).ok, tag + "witness rejected");
    const auto& seg = v.witness->segments;
    for (int i = 1; i <= n; ++i) {
      const int q = in.machine.location("q" + std::to_string(i));
      const auto it = std::find_if(seg.begin(), seg.end(), [&](const Segment& s) { return s.location == q; });
      o.require(it != seg.end() && it->n == BigNat(1) << (i - 1), tag + "exponent at q" + std::to_string(i));
    }
    const int qn = in.machine.location("q" + std::to_string(n));
    const auto it = std::find_if(seg.begin(), seg.end(), [&](const Segment& s) { return s.location == qn; });
    if (it != seg.end() && it + 1 != seg.end() && it->rule >= 0) {
      const Slp leaving = slp_pr(in.machine.rules[it->rule].actions, (it + 1)->z);
      o.require(slp_len(leaving) == (BigNat(1) << n) + 1, tag + "content length at q_n");
    } else {
      o.require(false, tag + "q_n segment missing");
    }
    const double t = clk.seconds();
    worst = std::max(worst, t);
    o.require(t < c3_instance_limit_s, tag + "too slow");
  }
  o.detail << "n = 2..20 true, validated, exponents 2^(i-1), |content at q_n| = 2^n+1, slowest " << worst
           << " s (limit " << c3_instance_limit_s << ")";
}

Word power_prefix(const Word& v, std::size_t n) {
  Word w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(v[i % v.size()]);
  return w;
}

void criterion4(Outcome& o) {
  Clock clk;
  ref::Rand r(4);
  // Mostly short expansions, one case in fifty up to the length limit.
  auto slp = [&](std::size_t cap) { return ref::random_slp(r, 3, r.range(0, 49) == 0 ? c4_max_len : cap); };
  std::size_t longest = 0;
  for (int i = 0; i < c4_cases; ++i) {
    const Slp x = slp(40);
    const Word xe = slp_expand(x);
    longest = std::max(longest, xe.size());
    const Word v = r.word(3, 3, 1);
    const std::size_t n = r.range(0, 120);
    o.require(slp_subword_of_power(x, v, n) == is_subword(xe, power_prefix(v, n)), "subword_of_power");
  }
  for (int i = 0; i < c4_cases; ++i) {
    const Slp x = slp(60);
    const Word v = r.word(3, 3, 1);
    const int k = r.range(0, 6);
    Word y = slp_expand(x);
    longest = std::max(longest, y.size());
    for (int j = 0; j < k; ++j) y = residual(y, v);
    o.require(slp_expand(slp_residual_power(x, v, k)) == y, "residual_power");
  }
  for (int i = 0; i < c4_cases; ++i) {
    const ActionSeq s = r.actions(3, 6);
    const Slp x = ref::random_slp(r, 3, 30);
    const int k = r.range(0, 10);
    Word y = slp_expand(x);
    for (int j = 0; j < k; ++j) y = pr(s, y);
    const Slp z = slp_pr_iter(s, x, k);
    o.require(slp_len(z) <= c4_max_len && slp_expand(z) == y, "pr_iter");
  }
  for (int i = 0; i < c4_cases; ++i) {
    const Slp x = slp(200), y = slp(12);
    const Word xe = slp_expand(x), ye = slp_expand(y);
    longest = std::max(longest, xe.size());
    o.require(slp_is_factor(y, x) == (xe.find(ye) != Word::npos), "factor matching");
    const std::size_t lo = r.range(0, static_cast<int>(xe.size()));
    const std::size_t hi = r.range(static_cast<int>(lo), static_cast<int>(xe.size()));
    o.require(slp_expand(slp_factor(x, lo, hi)) == xe.substr(lo, hi - lo), "factor");
    o.require(slp_expand(slp_concat(x, y)) == xe + ye, "concat");
    o.require(slp_equal(x, y) == (xe == ye), "equality");
  }
  const ActionSeq s = seq("!abbbbb ?bbbb");
  const Slp x = slp_from_plain(a(4));
  const auto expect = ab5_sequence();
  for (std::size_t k = 1; k <= 21; ++k)
    o.require(slp_expand(slp_pr_iter(s, x, k)) == expect[k - 1], "sequence from an SLP at k = " + std::to_string(k));
  const double t = clk.seconds();
  o.require(t < c4_limit_s, "too slow");
  o.detail << c4_cases << " cases each for subword_of_power, residual_power, pr_iter, factor/concat/matching "
           << "(longest expansion " << longest << "), y1..y21 from an SLP, " << t << " s (limit " << c4_limit_s << ")";
}

void criterion5(Outcome& o) {
  Clock clk;
  int total = 0, conclusive = 0, mismatches = 0;
  for (int seed = 0; seed < c5_machines; ++seed) {
    const Machine m = gen_random_flat(seed);
    detail::Rng r(static_cast<std::uint64_t>(seed) * 7919 + 1);
    for (auto kind : {QueryKind::Coverability, QueryKind::ReachExact, QueryKind::Nonterm, QueryKind::Unbounded,
                      QueryKind::RepCov}) {
      Query q;
      q.kind = kind;
      q.source = random_config(r, m, 3, 3);
      if (has_target(kind)) q.target = random_config(r, m, 3, 3);
      const Verdict v = decide(m, q);
      const OracleVerdict ov = oracle_decide(m, q);
      ++total;
      if (ov.answer == Tri::Inconclusive) continue;
      ++conclusive;
      if ((ov.answer == Tri::True) != v.answer) {
        if (mismatches == 0)
          o.require(false, "seed " + std::to_string(seed) + " " + kind_name(kind));
        ++mismatches;
      }
    }
  }
  const double frac = static_cast<double>(conclusive) / total;
  const double t = clk.seconds();
  o.require(frac >= c5_min_conclusive, "too few conclusive oracle runs");
  o.require(t < c5_limit_s, "too slow");
  o.detail << c5_machines << " machines, " << total << " queries, " << conclusive << " conclusive (" << 100 * frac
           << " %, floor " << 100 * c5_min_conclusive << " %), " << mismatches << " mismatches, " << t << " s (limit "
           << c5_limit_s << ")";
}

void criterion6(Outcome& o) {
  Clock clk;
  int sat = 0, agree_reach = 0, agree_live = 0, agree_path = 0, over_budget = 0, wrong = 0;
  double path_s = 0;
  for (int s = 0; s < c6_formulas; ++s) {
    detail::Rng rr(static_cast<std::uint64_t>(s) + 1000);
    const int vars = rr.range(3, 8), clauses = rr.range(1, 12);
    const Cnf c = random_cnf(s, vars, clauses);
    const bool truth = ref::satisfiable(c);
    sat += truth;
    const Instance reach = gen_acyclic_sat(c);
    if (decide(reach.machine, reach.query).answer == truth) ++agree_reach;
    else ++wrong;
    AcyclicSatOptions lo;
    lo.liveness = true;
    const Instance live = gen_acyclic_sat(c, lo);
    if (decide(live.machine, live.query).answer == truth) ++agree_live;
    else ++wrong;
    const Instance path = gen_singlepath_sat(c);
    SolverOptions opt;
    opt.step_budget = c6_step_budget;
    Clock pc;
    try {
      if (decide(path.machine, path.query, opt).answer == truth) ++agree_path;
      else ++wrong;
    } catch (const BudgetExceeded&) {
      ++over_budget;
    }
    path_s += pc.seconds();
  }
  const double t = clk.seconds();
  o.require(wrong == 0, "wrong verdicts");
  o.require(agree_reach == c6_formulas && agree_live == c6_formulas, "acyclic reduction");
  o.require(agree_path == c6_formulas, "single-path reduction: " + std::to_string(over_budget) +
                                           " formulas exceeded the step budget");
  o.require(t < c6_limit_s, "too slow");
  o.detail << c6_formulas << " formulas (" << sat << " satisfiable); acyclic reach " << agree_reach << "/" << c6_formulas
           << ", acyclic liveness " << agree_live << "/" << c6_formulas << ", single-path " << agree_path << "/"
           << c6_formulas << " (" << over_budget << " over the " << c6_step_budget << "-step budget, " << path_s
           << " s); wrong verdicts " << wrong << "; " << t << " s (limit " << c6_limit_s << ")";
}

void criterion7(Outcome& o) {
  Clock clk;
  std::size_t witnesses = 0, accepted = 0, mutations = 0, rejected = 0;
  auto check = [&](const Machine& m, const Query& q, const Verdict& v) {
    if (!v.witness) return;
    ++witnesses;
    if (validate_witness(m, q, *v.witness).ok) ++accepted;
    else o.require(false, std::string("emitted witness rejected for ") + kind_name(q.kind));
    for (const auto& w : ref::mutants(m, *v.witness)) {
      ++mutations;
      if (!validate_witness(m, q, w).ok) ++rejected;
      else o.require(false, std::string("mutation accepted for ") + kind_name(q.kind));
    }
  };
  for (int n = 2; n <= 12; ++n) {
    const Instance in = gen_fig1(n);
    check(in.machine, in.query, decide(in.machine, in.query));
  }
  for (int seed = 0; seed < c5_machines; ++seed) {
    const Machine m = gen_random_flat(seed);
    detail::Rng r(static_cast<std::uint64_t>(seed) * 7919 + 1);
    for (auto kind : {QueryKind::Coverability, QueryKind::ReachExact, QueryKind::Nonterm, QueryKind::Unbounded,
                      QueryKind::RepCov}) {
      Query q;
      q.kind = kind;
      q.source = random_config(r, m, 3, 3);
      if (has_target(kind)) q.target = random_config(r, m, 3, 3);
      check(m, q, decide(m, q));
    }
  }
  for (int s = 0; s < 40; ++s) {
    const Instance in = gen_acyclic_sat(random_cnf(s, 4, 6));
    check(in.machine, in.query, decide(in.machine, in.query));
  }
  const double t = clk.seconds();
  o.require(witnesses > 0 && accepted == witnesses && rejected == mutations, "integrity");
  o.require(t < c7_limit_s, "too slow");
  o.detail << accepted << "/" << witnesses << " witnesses accepted, " << rejected << "/" << mutations
           << " mutations rejected, " << t << " s (limit " << c7_limit_s << ")";
}

/// sigma iterated forever from x, decided on maximal contents: blocked, or
/// some earlier content embeds in a later one.
std::optional<bool> lasso(const ActionSeq& s, const Word& x) {
  std::vector<Word> zs{x};
  for (std::size_t i = 0; i < c8_lasso_steps; ++i) {
    auto z = ref::max_post(s, zs.back());
    if (!z) return false;
    for (const auto& p : zs)
      if (ref::subword(p, *z)) return true;
    zs.push_back(std::move(*z));
  }
  return std::nullopt;
}

/// Every action sequence over {a, b} with total payload size at most n.
std::vector<ActionSeq> all_sequences(std::size_t n) {
  std::vector<ActionSeq> out{ActionSeq{}};
  std::vector<std::pair<ActionSeq, std::size_t>> frontier{{ActionSeq{}, 0}};
  while (!frontier.empty()) {
    auto [s, size] = frontier.back();
    frontier.pop_back();
    for (std::size_t k = 1; size + k <= n; ++k)
      for (const auto& w : ref::all_words(2, k)) {
        if (w.size() != k) continue;
        for (bool read : {true, false}) {
          ActionSeq t = s;
          t.push_back(read ? Action::read(w) : Action::write(w));
          out.push_back(t);
          frontier.push_back({std::move(t), size + k});
        }
      }
  }
  return out;
}

void criterion8(Outcome& o) {
  Clock clk;
  ref::Rand r(8);
  int values = 0;
  for (int i = 0; i < c8_fixpoint_cases; ++i) {
    const ActionSeq s = r.actions(r.range(1, 3), 8);
    const OmegaResult om = pr_omega(s);
    if (!om.value) continue;
    ++values;
    o.require(pr(s, *om.value) == *om.value, "fixpoint law");
  }
  const auto seqs = all_sequences(4);
  const auto words = ref::all_words(2, 4);
  std::size_t pairs = 0, undecided = 0;
  for (const auto& s : seqs) {
    const OmegaResult om = pr_omega(s);
    for (const auto& x : words) {
      ++pairs;
      const auto l = lasso(s, x);
      if (!l) {
        ++undecided;
        o.require(false, "lasso search undecided");
        continue;
      }
      const bool claim = om.value && is_subword(*om.value, x);
      o.require(claim == *l, "equivalence fails");
    }
  }
  const double t = clk.seconds();
  o.require(t < c8_limit_s, "too slow");
  o.detail << c8_fixpoint_cases << " random cycles (" << values << " with a fixpoint), law holds; " << seqs.size()
           << " cycles x " << words.size() << " words = " << pairs << " pairs match the lasso oracle, " << undecided
           << " undecided; " << t << " s (limit " << c8_limit_s << ")";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Outcome&)>> all{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  if (pick.empty())
    for (int i = 1; i <= 8; ++i) pick.push_back(i);
  int failed = 0;
  for (int c : pick) {
    if (c < 1 || c > 8) {
      std::cerr << "no criterion " << c << "\n";
      return 64;
    }
    Outcome o;
    try {
      all[c - 1](o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
    failed += !o.pass;
  }
  return failed;
}
