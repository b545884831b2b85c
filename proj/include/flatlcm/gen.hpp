#ifndef FLATLCM_GEN_HPP
#define FLATLCM_GEN_HPP

#include "machine.hpp"
#include "solver.hpp"
#include "words.hpp"

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatlcm {

struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  bool operator==(const Cnf&) const = default;
};

struct DimacsError : std::runtime_error {
  DimacsError(std::size_t line, const std::string& what)
      : std::runtime_error("dimacs line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

/// DIMACS CNF with at most three literals per clause; each clause on one line
/// ending with 0.
inline Cnf parse_dimacs(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  Cnf c;
  long declared = -1;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first == "c" || first[0] == 'c' || first == "%") continue;
    if (first == "p") {
      std::string fmt;
      long v = -1, m = -1;
      if (declared >= 0) throw DimacsError(lineno, "second header");
      if (!(ls >> fmt >> v >> m) || fmt != "cnf" || v < 0 || m < 0) throw DimacsError(lineno, "malformed header");
      std::string extra;
      if (ls >> extra) throw DimacsError(lineno, "trailing tokens after header");
      c.num_vars = static_cast<int>(v);
      declared = m;
      continue;
    }
    if (declared < 0) throw DimacsError(lineno, "clause before the p cnf header");
    std::istringstream cs(line);
    std::vector<int> clause;
    std::string tok;
    bool closed = false;
    while (cs >> tok) {
      if (closed) throw DimacsError(lineno, "literal after the terminating 0");
      long lit = 0;
      std::size_t used = 0;
      try {
        lit = std::stol(tok, &used);
      } catch (...) {
        throw DimacsError(lineno, "malformed literal " + tok);
      }
      if (used != tok.size()) throw DimacsError(lineno, "malformed literal " + tok);
      if (lit == 0) {
        closed = true;
        continue;
      }
      if (std::labs(lit) > c.num_vars) throw DimacsError(lineno, "variable out of range: " + tok);
      clause.push_back(static_cast<int>(lit));
    }
    if (!closed) throw DimacsError(lineno, "clause without terminating 0");
    if (clause.empty()) throw DimacsError(lineno, "empty clause");
    if (clause.size() > 3)
      throw DimacsError(lineno, "clause has " + std::to_string(clause.size()) + " literals; only 3CNF is reduced");
    c.clauses.push_back(std::move(clause));
  }
  if (declared < 0) throw DimacsError(lineno, "missing p cnf header");
  if (static_cast<long>(c.clauses.size()) != declared)
    throw DimacsError(lineno, "header declares " + std::to_string(declared) + " clauses, found " +
                                  std::to_string(c.clauses.size()));
  return c;
}

inline std::string print_dimacs(const Cnf& c) {
  std::ostringstream os;
  os << "p cnf " << c.num_vars << " " << c.clauses.size() << "\n";
  for (const auto& cl : c.clauses) {
    for (int l : cl) os << l << " ";
    os << "0\n";
  }
  return os.str();
}

struct Instance {
  Machine machine;
  Query query;
};

/// fig1 family: doubling self-loops on q1..qn, halving self-loops on q'n..q'1.
inline Instance gen_fig1(int n) {
  if (n < 1) throw std::invalid_argument("gen_fig1: n must be at least 1");
  Machine m;
  m.name = "fig1_n" + std::to_string(n);
  m.add_letter("a");
  m.add_letter("b");
  const Letter a = m.letter("a"), b = m.letter("b");
  const Word A{a}, B{b}, AA{a, a};
  std::vector<int> q(n + 1), qp(n + 1);
  q[0] = m.add_location("q0");
  for (int i = 1; i <= n; ++i) q[i] = m.add_location("q" + std::to_string(i));
  for (int i = n; i >= 1; --i) qp[i] = m.add_location("q'" + std::to_string(i));
  qp[0] = m.add_location("q'0");
  m.initial = q[0];
  m.add_rule(q[0], {Action::write({a, b})}, q[1]);
  for (int i = 1; i <= n; ++i) {
    m.add_rule(q[i], {Action::read(A), Action::write(AA)}, q[i]);
    m.add_rule(q[i], {Action::read(B), Action::write(B)}, i < n ? q[i + 1] : qp[n]);
  }
  for (int i = n; i >= 1; --i) {
    m.add_rule(qp[i], {Action::read(AA), Action::write(A)}, qp[i]);
    if (i > 1) m.add_rule(qp[i], {Action::read(B), Action::write(B)}, qp[i - 1]);
  }
  m.add_rule(qp[1], {Action::read({b, a})}, qp[0]);
  Instance in{std::move(m), {}};
  in.query.kind = QueryKind::ReachExact;
  in.query.source = {q[0], {}};
  in.query.target = Config{qp[0], {}};
  return in;
}

struct AcyclicSatOptions {
  /// Append the self-loop !$ on V_e and ask for nontermination (or
  /// unboundedness) instead of reachability.
  bool liveness = false;
  bool unbounded = false;
  /// Drop the $ end-marker from the valuation lines.
  bool dollar_free = false;
};

/// Acyclic SAT machine: write a valuation, check each clause on one of its literal lines,
/// then read the valuation back to make sure nothing was lost.
inline Instance gen_acyclic_sat(const Cnf& c, AcyclicSatOptions opt = {}) {
  Machine m;
  m.name = "sat_acyclic";
  m.add_letter("0");
  m.add_letter("1");
  const bool dollar = !opt.dollar_free || opt.liveness;
  if (dollar) m.add_letter("$");
  const Word Z{'0'}, O{'1'}, D{'$'};
  const int n = c.num_vars;
  auto loc = [&](const std::string& s) { return m.add_location(s); };
  auto marker = [&](ActionSeq s) { return opt.dollar_free ? ActionSeq{} : s; };

  const int ib = loc("I_b");
  m.initial = ib;
  int prev = ib;
  for (int i = 1; i <= n; ++i) {
    const int v = loc("I_" + std::to_string(i));
    m.add_rule(prev, {Action::write(Z)}, v);
    m.add_rule(prev, {Action::write(O)}, v);
    prev = v;
  }
  const int ie = loc("I_e");
  m.add_rule(prev, marker({Action::write(D)}), ie);
  int tail = ie;

  for (std::size_t ci = 0; ci < c.clauses.size(); ++ci) {
    const auto& cl = c.clauses[ci];
    const std::string cn = "C" + std::to_string(ci + 1);
    std::vector<int> starts, ends;
    for (std::size_t li = 0; li < cl.size(); ++li) {
      const std::string ln = cn + "_" + std::to_string(li + 1);
      const int s = loc(li == 0 ? cn + "_b" : ln + "_0");
      starts.push_back(s);
      int p = s;
      const int var = std::abs(cl[li]);
      for (int i = 1; i <= n; ++i) {
        const int v = loc(ln + "_" + std::to_string(i));
        if (i == var) {
          const Word& bit = cl[li] > 0 ? O : Z;
          m.add_rule(p, {Action::read(bit), Action::write(bit)}, v);
        } else {
          m.add_rule(p, {Action::read(Z), Action::write(Z)}, v);
          m.add_rule(p, {Action::read(O), Action::write(O)}, v);
        }
        p = v;
      }
      const int e = loc(li + 1 == cl.size() ? cn + "_e" : ln + "_e");
      m.add_rule(p, marker({Action::read(D), Action::write(D)}), e);
      ends.push_back(e);
    }
    for (std::size_t li = 0; li + 1 < starts.size(); ++li) {
      m.add_rule(starts[li], {}, starts[li + 1]);
      m.add_rule(ends[li], {}, ends[li + 1]);
    }
    m.add_rule(tail, {}, starts[0]);
    tail = ends.back();
  }

  const int vb = loc("V_b");
  m.add_rule(tail, {}, vb);
  prev = vb;
  for (int i = 1; i <= n; ++i) {
    const int v = loc("V_" + std::to_string(i));
    m.add_rule(prev, {Action::read(Z)}, v);
    m.add_rule(prev, {Action::read(O)}, v);
    prev = v;
  }
  const int ve = loc("V_e");
  m.add_rule(prev, marker({Action::read(D)}), ve);

  Instance in{std::move(m), {}};
  in.query.source = {ib, {}};
  if (opt.liveness) {
    in.machine.add_rule(ve, {Action::write(D)}, ve);
    in.query.kind = opt.unbounded ? QueryKind::Unbounded : QueryKind::Nonterm;
  } else {
    in.query.kind = QueryKind::ReachExact;
    in.query.target = Config{ve, {}};
  }
  return in;
}

/// Single-path SAT machine: one line of locations, every cycle a self-loop. The valuation is
/// kept on the channel as v1 b1 ... vn bn; a clause line appends the mark x
/// after a satisfying bit, 2n lines push the mark to the front, and the check
/// line consumes it. A final line drains the channel before f.
inline Instance gen_singlepath_sat(const Cnf& c) {
  Machine m;
  m.name = "sat_singlepath";
  const int n = c.num_vars;
  std::vector<Word> v(n + 1);
  for (int i = 1; i <= n; ++i) {
    m.add_letter("v" + std::to_string(i));
    v[i] = Word{m.letter("v" + std::to_string(i))};
  }
  m.add_letter("0");
  m.add_letter("1");
  m.add_letter("x");
  const Word Z{m.letter("0")}, O{m.letter("1")}, X{m.letter("x")};
  auto loc = [&](const std::string& s) { return m.add_location(s); };
  auto rw = [](const Word& r, const Word& w) { return ActionSeq{Action::read(r), Action::write(w)}; };
  auto self = [&](int q, ActionSeq s) { m.add_rule(q, std::move(s), q); };

  const int l0 = loc("L0");
  m.initial = l0;
  Word init;
  for (int i = 1; i <= n; ++i) init += v[i] + Z;
  int cur = loc("L0_w");
  m.add_rule(l0, {Action::write(init)}, cur);
  for (int i = 1; i <= n; ++i) {
    const std::string s = "L0_" + std::to_string(i);
    const int b = loc(s + "_keep"), k = loc(s + "_flip");
    m.add_rule(cur, rw(v[i], v[i]), b);
    self(b, rw(Z, Z));
    m.add_rule(b, {}, k);
    self(k, rw(Z, O));
    cur = k;
  }

  for (std::size_t ci = 0; ci < c.clauses.size(); ++ci) {
    const auto& cl = c.clauses[ci];
    const std::string cn = "C" + std::to_string(ci + 1);
    auto has = [&](int lit) { return std::find(cl.begin(), cl.end(), lit) != cl.end(); };

    // L1: copy the valuation, marking satisfied literals.
    for (int i = 1; i <= n; ++i) {
      const std::string s = cn + "_L1_" + std::to_string(i);
      const int a = loc(s), z = loc(s + "_0"), o = loc(s + "_1");
      m.add_rule(cur, {}, a);
      m.add_rule(a, rw(v[i], v[i]), z);
      self(z, rw(Z, has(-i) ? Z + X : Z));
      m.add_rule(z, {}, o);
      self(o, rw(O, has(i) ? O + X : O));
      cur = o;
    }

    // L2: 2n passes, each able to move a mark one letter to the left.
    for (int pass = 1; pass <= 2 * n; ++pass) {
      const std::string s = cn + "_L2_" + std::to_string(pass);
      const int e0 = loc(s);
      m.add_rule(cur, {}, e0);
      self(e0, rw(X, X));
      cur = e0;
      for (int i = 1; i <= n; ++i) {
        const std::string t = s + "_" + std::to_string(i);
        const Word loops[6][2] = {{v[i], v[i]}, {v[i] + X, X + v[i]}, {Z, Z}, {Z + X, X + Z}, {O, O}, {O + X, X + O}};
        for (int j = 0; j < 6; ++j) {
          const int e = loc(t + "_" + std::to_string(j + 1));
          m.add_rule(cur, {}, e);
          self(e, rw(loops[j][0], loops[j][1]));
          cur = e;
        }
      }
    }

    // L3: consume the mark at the head, copy the valuation back.
    const int f0 = loc(cn + "_L3");
    m.add_rule(cur, {}, f0);
    cur = f0;
    for (int i = 1; i <= n; ++i) {
      const std::string s = cn + "_L3_" + std::to_string(i);
      const int a = loc(s), z = loc(s + "_0"), o = loc(s + "_1");
      m.add_rule(cur, i == 1 ? ActionSeq{Action::read(X)} : ActionSeq{}, a);
      m.add_rule(a, rw(v[i], v[i]), z);
      self(z, rw(Z, Z));
      m.add_rule(z, {}, o);
      self(o, rw(O, O));
      cur = o;
    }
  }

  // Drain the valuation.
  for (int i = 1; i <= n; ++i) {
    const std::string s = "D_" + std::to_string(i);
    const int a = loc(s + "_0"), o = loc(s + "_1");
    m.add_rule(cur, {Action::read(v[i])}, a);
    self(a, {Action::read(Z)});
    m.add_rule(a, {}, o);
    self(o, {Action::read(O)});
    cur = o;
  }
  const int f = loc("f");
  m.add_rule(cur, {}, f);

  Instance in{std::move(m), {}};
  in.query.kind = QueryKind::ReachExact;
  in.query.source = {l0, {}};
  in.query.target = Config{f, {}};
  return in;
}

// ---------------------------------------------------------------------------
// Random instances

struct RandomFlatParams {
  int locations = 6;
  int letters = 3;
  int max_rules = 8;
  int max_actions = 2;
  int max_payload = 2;
  /// Percent chance that a component grows into a cycle.
  int cycle_percent = 50;
  int max_cycle = 3;
};

namespace detail {

/// Uniform-enough draws from a standard engine without the
/// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : e_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : e_() % n; }
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool percent(int p) { return static_cast<int>(below(100)) < p; }

 private:
  std::mt19937_64 e_;
};

inline Word random_word(Rng& r, int letters, int maxlen, int minlen = 0) {
  Word w;
  const int len = r.range(minlen, maxlen);
  for (int i = 0; i < len; ++i) w.push_back(static_cast<Letter>('a' + r.below(letters)));
  return w;
}

inline ActionSeq random_actions(Rng& r, const RandomFlatParams& p) {
  ActionSeq s;
  const int k = r.range(0, p.max_actions);
  for (int i = 0; i < k; ++i) {
    Word w = random_word(r, p.letters, p.max_payload, 1);
    s.push_back(r.percent(50) ? Action::read(std::move(w)) : Action::write(std::move(w)));
  }
  return s;
}

}  // namespace detail

/// Components in a fixed order; each is a single location, possibly with a
/// self-loop, or a simple cycle. Extra rules only go to later components, so
/// every component stays a single elementary cycle.
inline Machine gen_random_flat(std::uint64_t seed, const RandomFlatParams& p = {}) {
  detail::Rng r(seed);
  Machine m;
  m.name = "random_" + std::to_string(seed);
  for (int i = 0; i < p.letters; ++i) m.add_letter(std::string(1, static_cast<char>('a' + i)));
  for (int i = 0; i < p.locations; ++i) m.add_location("p" + std::to_string(i));
  m.initial = 0;
  std::vector<int> comp(p.locations);
  int budget = p.max_rules;
  int ncomp = 0;
  for (int i = 0; i < p.locations;) {
    int len = 1;
    if (budget > 0 && r.percent(p.cycle_percent)) len = std::min(r.range(1, p.max_cycle), p.locations - i);
    if (len > budget) len = 1;
    for (int j = 0; j < len; ++j) comp[i + j] = ncomp;
    if (len > 1 || (budget > 0 && r.percent(p.cycle_percent))) {
      for (int j = 0; j < len; ++j) {
        m.add_rule(i + j, detail::random_actions(r, p), i + (j + 1) % len);
        --budget;
      }
    }
    i += len;
    ++ncomp;
  }
  for (int tries = 0; budget > 0 && tries < 4 * p.max_rules; ++tries) {
    const int a = r.range(0, p.locations - 1), b = r.range(0, p.locations - 1);
    if (comp[a] >= comp[b]) continue;
    ActionSeq s = detail::random_actions(r, p);
    Rule rule{a, s, b};
    if (std::find(m.rules.begin(), m.rules.end(), rule) != m.rules.end()) continue;
    m.add_rule(a, std::move(s), b);
    --budget;
  }
  return m;
}

inline Config random_config(detail::Rng& r, const Machine& m, int letters, int maxlen) {
  return {r.range(0, m.num_locations() - 1), detail::random_word(r, letters, maxlen)};
}

/// Random 3CNF; literals within a clause use distinct variables.
/// Clause widths are drawn from [min_width, max_width], capped by vars.
inline Cnf random_cnf(std::uint64_t seed, int vars, int clauses, int min_width = 3, int max_width = 3) {
  detail::Rng r(seed);
  Cnf c;
  c.num_vars = vars;
  for (int i = 0; i < clauses; ++i) {
    std::vector<int> cl;
    const int k = std::min(vars, r.range(min_width, max_width));
    while (static_cast<int>(cl.size()) < k) {
      const int v = r.range(1, vars);
      if (std::any_of(cl.begin(), cl.end(), [&](int l) { return std::abs(l) == v; })) continue;
      cl.push_back(r.percent(50) ? v : -v);
    }
    c.clauses.push_back(std::move(cl));
  }
  return c;
}

}  // namespace flatlcm

#endif
