#ifndef FLATLCM_ORACLE_HPP
#define FLATLCM_ORACLE_HPP

#include "machine.hpp"
#include "solver.hpp"
#include "words.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace flatlcm {

enum class OracleMode { FullLossy, MaximalContent };

struct OracleConfig {
  std::size_t channel_bound = 10;
  std::size_t step_bound = 10000;
  OracleMode mode = OracleMode::MaximalContent;
};

enum class Tri { False, True, Inconclusive };

inline const char* tri_name(Tri t) {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct OracleVerdict {
  Tri answer = Tri::Inconclusive;
  std::vector<Config> trace;
};

/// Bounded forward graph. Node 0 is the source.
struct Exploration {
  std::vector<Config> nodes;
  std::vector<std::vector<int>> succ;
  std::vector<int> parent;
  /// Contents reached past the channel bound; recorded, never expanded.
  std::vector<Config> overflow;
  bool exhaustive = true;

  std::vector<Config> trace_to(int v) const {
    std::vector<Config> t;
    for (; v >= 0; v = parent[v]) t.push_back(nodes[v]);
    std::reverse(t.begin(), t.end());
    return t;
  }
};

namespace detail {

/// Maximal content after a rule, or nullopt when a read blocks.
inline std::optional<Word> max_post(const ActionSeq& s, Word x) {
  for (const auto& a : s) {
    if (a.is_write()) {
      x += a.payload;
    } else {
      auto r = ominus(x, a.payload);
      if (!r) return std::nullopt;
      x = std::move(*r);
    }
  }
  return x;
}

inline std::set<Word> lossy_post(const ActionSeq& s, const Word& x, bool& truncated) {
  std::set<Word> cur{x};
  if (s.empty()) {
    if (x.size() > lossy_step_limit) {
      truncated = true;
      return {};
    }
    return subwords(x);
  }
  for (const auto& a : s) {
    std::set<Word> next;
    for (const auto& w : cur) {
      if (w.size() + a.payload.size() > lossy_step_limit) {
        truncated = true;
        continue;
      }
      auto st = lossy_step(w, a);
      next.insert(st.begin(), st.end());
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace detail

inline Exploration oracle_explore(const Machine& m, const Config& src, const OracleConfig& cfg) {
  Exploration ex;
  std::map<std::pair<int, Word>, int> index;
  auto add = [&](Config c, int parent) -> int {
    auto key = std::make_pair(c.loc, c.word);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (c.word.size() > cfg.channel_bound) {
      ex.exhaustive = false;
      ex.overflow.push_back(std::move(c));
      return -1;
    }
    const int id = static_cast<int>(ex.nodes.size());
    index.emplace(std::move(key), id);
    ex.nodes.push_back(std::move(c));
    ex.succ.emplace_back();
    ex.parent.push_back(parent);
    return id;
  };
  add(src, -1);
  if (ex.nodes.empty()) return ex;
  std::size_t expanded = 0;
  for (std::size_t h = 0; h < ex.nodes.size(); ++h) {
    if (expanded++ >= cfg.step_bound) {
      ex.exhaustive = false;
      break;
    }
    const Config c = ex.nodes[h];
    for (const auto& r : m.rules) {
      if (r.from != c.loc) continue;
      std::vector<Word> posts;
      if (cfg.mode == OracleMode::MaximalContent) {
        if (auto w = detail::max_post(r.actions, c.word)) posts.push_back(std::move(*w));
      } else {
        bool truncated = false;
        for (auto& w : detail::lossy_post(r.actions, c.word, truncated)) posts.push_back(w);
        if (truncated) ex.exhaustive = false;
      }
      for (auto& w : posts) {
        const int id = add({r.to, std::move(w)}, static_cast<int>(h));
        if (id >= 0 && std::find(ex.succ[h].begin(), ex.succ[h].end(), id) == ex.succ[h].end())
          ex.succ[h].push_back(id);
      }
    }
  }
  return ex;
}

namespace detail {

inline bool has_incoming(const Exploration& ex, int v) {
  for (const auto& s : ex.succ)
    if (std::find(s.begin(), s.end(), v) != s.end()) return true;
  return false;
}

inline OracleVerdict oracle_cover_impl(const Machine& m, const Config& src, const Config& tgt,
                                       const OracleConfig& cfg, bool need_step) {
  const Exploration ex = oracle_explore(m, src, cfg);
  for (std::size_t v = 0; v < ex.nodes.size(); ++v) {
    const Config& c = ex.nodes[v];
    if (c.loc != tgt.loc || !is_subword(tgt.word, c.word)) continue;
    if (need_step && v == 0 && !has_incoming(ex, 0)) continue;
    return {Tri::True, ex.trace_to(static_cast<int>(v))};
  }
  for (const auto& c : ex.overflow)
    if (c.loc == tgt.loc && is_subword(tgt.word, c.word)) return {Tri::True, {}};
  return {ex.exhaustive ? Tri::False : Tri::Inconclusive, {}};
}

/// Strongly connected components of the explored graph restricted to allowed
/// nodes; returns per node its component, or -1.
inline std::vector<int> graph_scc(const Exploration& ex, const std::vector<char>& allowed) {
  const int n = static_cast<int>(ex.nodes.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on(n, 0);
  int counter = 0, ncomp = 0;
  struct Frame {
    int v;
    std::size_t i;
  };
  for (int s = 0; s < n; ++s) {
    if (!allowed[s] || index[s] >= 0) continue;
    std::vector<Frame> call{{s, 0}};
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on[s] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.i < ex.succ[f.v].size()) {
        const int w = ex.succ[f.v][f.i++];
        if (!allowed[w]) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on[w] = 1;
          call.push_back({w, 0});
        } else if (on[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const int v = f.v;
      if (low[v] == index[v]) {
        for (;;) {
          const int w = stack.back();
          stack.pop_back();
          on[w] = 0;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comp;
}

/// Some allowed cycle through a node satisfying mark.
template <class Mark>
bool exact_cycle(const Exploration& ex, const std::vector<char>& allowed, Mark mark) {
  const auto comp = graph_scc(ex, allowed);
  const int n = static_cast<int>(ex.nodes.size());
  std::vector<char> cyclic(n, 0);
  for (int v = 0; v < n; ++v) {
    if (comp[v] < 0) continue;
    for (int w : ex.succ[v])
      if (allowed[w] && comp[w] == comp[v]) cyclic[comp[v]] = 1;
  }
  for (int v = 0; v < n; ++v)
    if (comp[v] >= 0 && cyclic[comp[v]] && mark(v)) return true;
  return false;
}

/// Lasso from c to some c' ⊒ c at the same location through at least one
/// edge, staying in allowed nodes and meeting a marked node after c.
template <class Mark>
std::optional<std::vector<int>> subsumed_lasso(const Exploration& ex, const std::vector<char>& allowed, int c,
                                               Mark mark) {
  const int n = static_cast<int>(ex.nodes.size());
  // state: node * 2 + seen mark
  std::vector<int> prev(2 * n, -2);
  std::deque<int> queue;
  for (int w : ex.succ[c]) {
    if (!allowed[w]) continue;
    const int st = 2 * w + (mark(w) ? 1 : 0);
    if (prev[st] == -2) {
      prev[st] = -1;
      queue.push_back(st);
    }
  }
  while (!queue.empty()) {
    const int st = queue.front();
    queue.pop_front();
    const int v = st / 2;
    if ((st & 1) && ex.nodes[v].loc == ex.nodes[c].loc && is_subword(ex.nodes[c].word, ex.nodes[v].word)) {
      std::vector<int> path;
      for (int s = st; s >= 0; s = prev[s]) path.push_back(s / 2);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int w : ex.succ[v]) {
      if (!allowed[w]) continue;
      const int nst = 2 * w + ((st & 1) || mark(w) ? 1 : 0);
      if (prev[nst] == -2) {
        prev[nst] = st;
        queue.push_back(nst);
      }
    }
  }
  return std::nullopt;
}

template <class Allowed, class Mark>
OracleVerdict lasso_query(const Machine& m, const Config& src, const OracleConfig& cfg, Allowed allow, Mark mark,
                          std::size_t lasso_budget = 400) {
  const Exploration ex = oracle_explore(m, src, cfg);
  const int n = static_cast<int>(ex.nodes.size());
  std::vector<char> allowed(n, 0);
  for (int v = 0; v < n; ++v) allowed[v] = allow(ex.nodes[v]) ? 1 : 0;
  auto mk = [&](int v) { return mark(ex.nodes[v]); };
  if (exact_cycle(ex, allowed, mk)) return {Tri::True, {}};
  if (ex.exhaustive) return {Tri::False, {}};
  std::size_t tried = 0;
  for (int v = 0; v < n && tried < lasso_budget; ++v) {
    if (!allowed[v]) continue;
    ++tried;
    if (subsumed_lasso(ex, allowed, v, mk)) return {Tri::True, ex.trace_to(v)};
  }
  return {Tri::Inconclusive, {}};
}

}  // namespace detail

inline OracleVerdict oracle_coverability(const Machine& m, const Config& src, const Config& tgt,
                                         const OracleConfig& cfg = {}) {
  return detail::oracle_cover_impl(m, src, tgt, cfg, false);
}

/// Exact reachability: src itself, or tgt covered after at least one step.
inline OracleVerdict oracle_reach_exact(const Machine& m, const Config& src, const Config& tgt,
                                        const OracleConfig& cfg = {}) {
  if (src == tgt) return {Tri::True, {src}};
  return detail::oracle_cover_impl(m, src, tgt, cfg, true);
}

inline OracleVerdict oracle_buchi(const Machine& m, const Config& src, const std::vector<int>& fair,
                                  const OracleConfig& cfg = {}) {
  return detail::lasso_query(
      m, src, cfg, [](const Config&) { return true; },
      [&](const Config& c) { return std::find(fair.begin(), fair.end(), c.loc) != fair.end(); });
}

inline OracleVerdict oracle_nonterm(const Machine& m, const Config& src, const OracleConfig& cfg = {}) {
  return detail::lasso_query(m, src, cfg, [](const Config&) { return true; }, [](const Config&) { return true; });
}

/// Eventually forever: every visit of tgt.loc carries a content above
/// tgt.word, and tgt.loc is visited infinitely often.
inline OracleVerdict oracle_repcov(const Machine& m, const Config& src, const Config& tgt,
                                   const OracleConfig& cfg = {}) {
  return detail::lasso_query(
      m, src, cfg, [&](const Config& c) { return c.loc != tgt.loc || is_subword(tgt.word, c.word); },
      [&](const Config& c) { return c.loc == tgt.loc; });
}

/// Closed exploration: false. A strictly growing lasso whose repetition keeps
/// growing the channel well past the bound: true.
inline OracleVerdict oracle_unbounded(const Machine& m, const Config& src, const OracleConfig& cfg = {}) {
  const Exploration ex = oracle_explore(m, src, cfg);
  if (ex.exhaustive) return {Tri::False, {}};
  const int n = static_cast<int>(ex.nodes.size());
  std::vector<char> allowed(n, 1);
  const std::size_t goal = 2 * cfg.channel_bound + 4;
  std::size_t tried = 0;
  for (int c = 0; c < n && tried < 400; ++c) {
    auto path = detail::subsumed_lasso(ex, allowed, c, [](int) { return true; });
    ++tried;
    if (!path) continue;
    const Config& end = ex.nodes[path->back()];
    if (end.word == ex.nodes[c].word) continue;
    // Rules along the loop, then replay them with maximal contents.
    std::vector<const ActionSeq*> rules;
    int from = c;
    for (int v : *path) {
      const ActionSeq* pick = nullptr;
      for (const auto& r : m.rules) {
        if (r.from != ex.nodes[from].loc || r.to != ex.nodes[v].loc) continue;
        auto w = detail::max_post(r.actions, ex.nodes[from].word);
        if (w && *w == ex.nodes[v].word) {
          pick = &r.actions;
          break;
        }
      }
      if (!pick) break;
      rules.push_back(pick);
      from = v;
    }
    if (rules.size() != path->size()) continue;
    Word x = end.word;
    for (std::size_t round = 0; round < goal + 2 && x.size() <= goal; ++round) {
      const std::size_t before = x.size();
      bool ok = true;
      for (const auto* s : rules) {
        auto w = detail::max_post(*s, x);
        if (!w) {
          ok = false;
          break;
        }
        x = std::move(*w);
      }
      if (!ok || x.size() <= before) break;
    }
    if (x.size() > goal) return {Tri::True, ex.trace_to(c)};
  }
  return {Tri::Inconclusive, {}};
}

inline OracleVerdict oracle_decide(const Machine& m, const Query& q, const OracleConfig& cfg = {}) {
  switch (q.kind) {
    case QueryKind::ReachExact: return oracle_reach_exact(m, q.source, *q.target, cfg);
    case QueryKind::Coverability: return oracle_coverability(m, q.source, *q.target, cfg);
    case QueryKind::Nonterm: return oracle_nonterm(m, q.source, cfg);
    case QueryKind::Buchi: return oracle_buchi(m, q.source, q.fair_set, cfg);
    case QueryKind::Unbounded: return oracle_unbounded(m, q.source, cfg);
    case QueryKind::RepCov: return oracle_repcov(m, q.source, *q.target, cfg);
  }
  return {};
}

}  // namespace flatlcm

#endif
