#ifndef FLATLCM_SOLVER_HPP
#define FLATLCM_SOLVER_HPP

#include "acceleration.hpp"
#include "machine.hpp"
#include "slp.hpp"
#include "words.hpp"

#include <boost/dynamic_bitset.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatlcm {

struct NotFlatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a search exceeds SolverOptions::step_budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  int loc = 0;
  Word word;
  bool operator==(const Config&) const = default;
};

enum class QueryKind { ReachExact, Coverability, Nonterm, Buchi, Unbounded, RepCov };

inline const char* kind_name(QueryKind k) {
  switch (k) {
    case QueryKind::ReachExact: return "reach_exact";
    case QueryKind::Coverability: return "coverability";
    case QueryKind::Nonterm: return "nonterm";
    case QueryKind::Buchi: return "buchi";
    case QueryKind::Unbounded: return "unbounded";
    case QueryKind::RepCov: return "repcov";
  }
  return "?";
}

inline QueryKind kind_from_name(const std::string& s) {
  for (auto k : {QueryKind::ReachExact, QueryKind::Coverability, QueryKind::Nonterm, QueryKind::Buchi,
                 QueryKind::Unbounded, QueryKind::RepCov})
    if (s == kind_name(k)) return k;
  throw std::invalid_argument("unknown query kind " + s);
}

inline bool has_target(QueryKind k) {
  return k == QueryKind::ReachExact || k == QueryKind::Coverability || k == QueryKind::RepCov;
}

struct Query {
  QueryKind kind = QueryKind::Coverability;
  Config source;
  std::optional<Config> target;
  std::vector<int> fair_set;
};

/// One location visit: arrive with z, iterate the cycle n times, leave by rule.
struct Segment {
  int location = 0;
  Slp z;
  BigNat n = 0;
  int rule = -1;  // rule to the next segment; -1 on the last one
};

struct Witness {
  std::vector<Segment> segments;
  /// Liveness and repeated coverability: the location whose cycle is iterated
  /// forever and the content reached there.
  std::optional<Config> loop;
  /// Repeated coverability: y_0 = x, y_{i+1} = pr(sigma, y_i).
  std::vector<Word> constraints;
  /// Unboundedness: positions of rea^l inside wri^{l-1} for the loop cycle.
  std::vector<std::size_t> embedding;
};

struct Stats {
  std::size_t seeds = 0;
  std::size_t arrivals = 0;
  std::size_t entries = 0;
  std::size_t members = 0;
  std::size_t pruned = 0;
  std::size_t undecided_subsumptions = 0;
  std::size_t max_basis = 0;
  bool repcov_cap_exceeded = false;
  bool repcov_canonical_only = false;
  double millis = 0;
};

struct Verdict {
  bool answer = false;
  std::optional<Witness> witness;
  Stats stats;
};

struct SolverOptions {
  bool plain_backend = false;
  /// Two SLPs are compared for subsumption by expanding a side of at most this
  /// many letters; beyond it the pair counts as incomparable.
  std::size_t compare_limit = std::size_t(1) << 16;
  /// Cap on minimal common superwords tried as repeated-coverability seeds.
  std::size_t repcov_member_cap = 4096;
  /// Forward pass over maximal contents used to discard backward words no run
  /// can cover. Locations downstream of a truncated word are left unfiltered.
  bool forward_prune = true;
  std::size_t forward_node_cap = 5000;
  std::size_t forward_length_cap = 64;
  /// Arrivals plus ring entries allowed before giving up; 0 means no limit.
  std::size_t step_budget = 0;
};

// ---------------------------------------------------------------------------
// Word backends

/// Shape of the chain x_k = x / v^k.
struct ResidualShape {
  bool kappa_infinite = false;
  BigNat kappa = -1;
  BigNat s = 0;  // first k with x_k = x_{k+1}
};

struct PlainBackend {
  using W = Word;
  W from_plain(const Word& w) const { return w; }
  BigNat len(const W& w) const { return w.size(); }
  W pr(const ActionSeq& s, const W& w) const { return flatlcm::pr(s, w); }
  W pr_iter(const ActionSeq& s, const W& w, const BigNat& k) const { return pr_iter_word(s, w, k); }
  bool equal(const W& a, const W& b) const { return a == b; }
  std::optional<bool> subword(const W& a, const W& b) const { return is_subword(a, b); }
  bool below(const W& a, const Word& y) const { return is_subword(a, y); }
  Slp to_slp(const W& w) const { return slp_from_plain(w); }
  ResidualShape shape(const W& x, const Word& v) const {
    auto c = detail::residual_chain(x, v);
    ResidualShape r;
    r.kappa_infinite = c.kappa.infinite;
    if (c.kappa.infinite) {
      r.s = c.xs.size() - 1;
    } else {
      r.kappa = c.kappa.value;
      r.s = r.kappa + 1;
    }
    return r;
  }
};

/// An SLP together with its expansion when that is short.
struct SlpWord {
  Slp slp;
  std::optional<Word> flat;
};

struct SlpBackend {
  using W = SlpWord;
  std::size_t compare_limit = std::size_t(1) << 16;
  std::size_t flat_limit = 4096;

  W wrap(Slp x) const {
    W w{std::move(x), std::nullopt};
    if (w.slp.length() <= flat_limit) w.flat = slp_expand(w.slp);
    return w;
  }
  W wrap_flat(Word x) const {
    if (x.size() > flat_limit) return {slp_from_plain(x), std::nullopt};
    Slp z = slp_from_plain(x);
    return {std::move(z), std::move(x)};
  }
  W from_plain(const Word& w) const { return wrap_flat(w); }
  BigNat len(const W& w) const { return w.flat ? BigNat(w.flat->size()) : w.slp.length(); }
  W pr(const ActionSeq& s, const W& w) const {
    if (w.flat) return wrap_flat(flatlcm::pr(s, *w.flat));
    return wrap(slp_pr(s, w.slp));
  }
  W pr_iter(const ActionSeq& s, const W& w, const BigNat& k) const {
    if (w.flat && k <= 64) {
      Word x = *w.flat;
      for (BigNat i = 0; i < k && x.size() <= flat_limit; ++i) x = flatlcm::pr(s, x);
      if (x.size() <= flat_limit) return wrap_flat(std::move(x));
    }
    return wrap(slp_pr_iter(s, w.slp, k));
  }
  bool equal(const W& a, const W& b) const {
    if (a.flat && b.flat) return *a.flat == *b.flat;
    return slp_equal(a.slp, b.slp);
  }
  std::optional<bool> subword(const W& a, const W& b) const {
    if (a.flat && b.flat) return is_subword(*a.flat, *b.flat);
    return slp_subword_bounded(a.slp, b.slp, compare_limit);
  }
  bool below(const W& a, const Word& y) const {
    if (a.flat) return is_subword(*a.flat, y);
    return slp_subword_rev(a.slp, y);
  }
  Slp to_slp(const W& w) const { return w.slp; }
  ResidualShape shape(const W& x, const Word& v) const {
    if (x.flat) return PlainBackend{}.shape(*x.flat, v);
    if (v.empty()) return {true, -1, 0};
    const PowerEmbedder e(x.slp, v);
    const BigNat b = e.stable_length();
    const BigNat c = *e.suffix_cost(x.slp.length() - b);
    ResidualShape r;
    r.s = (c + v.size() - 1) / v.size();
    r.kappa_infinite = b > 0;
    if (!r.kappa_infinite) r.kappa = r.s - 1;
    return r;
  }
};

namespace detail {

/// Indices k such that the words pr[s^k](y) for these k lie below every
/// member of the family: an optional index past kappa where the power part is
/// shortest, and a top index from which all smaller indices count.
struct FamilyIndices {
  std::optional<BigNat> tail_min;
  BigNat top = -1;
};

template <class B>
FamilyIndices family_indices(const B& b, const ActionSeq& s, const typename B::W& y) {
  if (s.empty()) return {std::nullopt, 0};
  const Word u = rea(s), v = wri(s);
  const ResidualShape sh = b.shape(y, v);
  if (u.empty()) return {sh.s, -1};
  if (sh.kappa_infinite) return {std::nullopt, sh.s};
  const BigNat first = sh.kappa + 1;
  const BigNat q0 = b.len(b.pr_iter(s, y, first));
  auto step = [&](const BigNat& q) { return pr_power_on_frac(s, {u, q}).num; };
  Progression prog(step, u.size());
  return {first + prog.minimum(q0).first, sh.kappa};
}

}  // namespace detail

namespace detail {

/// Over-approximation of the channel contents at one location: letters, ordered
/// pairs and (for small alphabets) ordered triples that may occur as subwords,
/// and per-letter count bounds.
struct ContentShape {
  static constexpr long unbounded = std::numeric_limits<long>::max();
  using Bits = boost::dynamic_bitset<>;

  std::size_t k = 0;
  bool triples = false;
  bool reached = false;
  Bits letters;
  Bits pairs;               // a * k + b
  std::vector<Bits> trip;   // trip[c]: pairs (a, b) that may precede c
  std::vector<long> count;

  ContentShape() = default;
  ContentShape(std::size_t n, bool with_triples)
      : k(n), triples(with_triples), letters(n), pairs(n * n), trip(with_triples ? n : 0, Bits(n * n)), count(n, 0) {}

  bool pair(int a, int b) const { return pairs.test(a * k + b); }

  void write(int d) {
    if (triples) trip[d] |= pairs;
    for (std::size_t a = letters.find_first(); a != letters.npos; a = letters.find_next(a)) pairs.set(a * k + d);
    letters.set(d);
    if (count[d] != unbounded) ++count[d];
  }

  /// Drops through a greedy embedding of u; false when u cannot occur.
  bool read(const std::vector<int>& u) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const int c = u[i];
      if (!letters.test(c) || count[c] == 0) return false;
      if (i > 0 && !pair(u[i - 1], c)) return false;
      if (triples && i > 1 && !trip[c].test(u[i - 2] * k + u[i - 1])) return false;
      if (count[c] != unbounded) --count[c];
    }
    if (u.empty()) return true;
    const std::size_t l = u.back();
    Bits keep(k), np(k * k);
    for (std::size_t a = letters.find_first(); a != letters.npos; a = letters.find_next(a))
      if (pair(l, a)) keep.set(a);
    for (std::size_t a = keep.find_first(); a != keep.npos; a = keep.find_next(a))
      for (std::size_t b = keep.find_first(); b != keep.npos; b = keep.find_next(b))
        if (pair(a, b) && (!triples || trip[b].test(l * k + a))) np.set(a * k + b);
    if (triples) {
      for (std::size_t c = 0; c < k; ++c) {
        if (!keep.test(c)) {
          trip[c].reset();
          continue;
        }
        Bits mask(k * k);
        for (std::size_t a = keep.find_first(); a != keep.npos; a = keep.find_next(a))
          if (np.test(a * k + c))
            for (std::size_t b = keep.find_first(); b != keep.npos; b = keep.find_next(b))
              if (np.test(b * k + c) && np.test(a * k + b)) mask.set(a * k + b);
        trip[c] &= mask;
      }
    }
    for (std::size_t c = 0; c < k; ++c)
      if (!keep.test(c)) count[c] = 0;
    letters = std::move(keep);
    pairs = std::move(np);
    return true;
  }

  /// Joins o into this; counts that grow past a widening step become unbounded.
  bool join(const ContentShape& o, bool widen) {
    if (!reached) {
      *this = o;
      return true;
    }
    bool changed = false;
    auto unite = [&](Bits& x, const Bits& y) {
      if (!y.is_subset_of(x)) {
        x |= y;
        changed = true;
      }
    };
    unite(letters, o.letters);
    unite(pairs, o.pairs);
    for (std::size_t c = 0; c < trip.size(); ++c) unite(trip[c], o.trip[c]);
    for (std::size_t d = 0; d < k; ++d)
      if (o.count[d] > count[d]) {
        count[d] = widen ? unbounded : o.count[d];
        changed = true;
      }
    return changed;
  }

  bool admits(const std::vector<int>& y) const {
    if (!reached) return false;
    Bits seen(k), seen_pairs(k * k);
    std::vector<long> c(k, 0);
    for (int d : y) {
      if (!letters.test(d) || ++c[d] > count[d]) return false;
      for (std::size_t a = seen.find_first(); a != seen.npos; a = seen.find_next(a))
        if (!pair(a, d)) return false;
      if (triples) {
        if (!seen_pairs.is_subset_of(trip[d])) return false;
        for (std::size_t a = seen.find_first(); a != seen.npos; a = seen.find_next(a)) seen_pairs.set(a * k + d);
      }
      seen.set(d);
    }
    return true;
  }
};

/// Maximal channel contents reachable at each location, where every read
/// drops the channel up to its payload and nothing else is lost. Where that
/// set is incomplete, a ContentShape per location stands in.
struct ForwardCover {
  std::vector<std::vector<Word>> words;
  std::vector<char> exact;
  std::size_t length_cap = 0;
  std::map<Letter, int> index;
  std::vector<ContentShape> shape;

  std::vector<int> indices(const Word& w) const {
    std::vector<int> r;
    r.reserve(w.size());
    for (Letter a : w) r.push_back(index.at(a));
    return r;
  }

  bool covers(int q, const Word& y) const {
    if (!exact[q]) return shape[q].admits(indices(y));
    for (const auto& z : words[q])
      if (is_subword(y, z)) return true;
    return false;
  }
  bool covers(int q, const SlpWord& y) const {
    if (y.flat) return covers(q, *y.flat);
    return !exact[q] && shape[q].reached;
  }
};

inline void content_shapes(const Machine& m, const Config& src, ForwardCover& fc) {
  const int n = m.num_locations();
  for (const auto& a : m.alphabet) fc.index.emplace(m.letter(a), static_cast<int>(fc.index.size()));
  const std::size_t k = fc.index.size();
  std::vector<std::vector<int>> out(n);
  for (int ri = 0; ri < static_cast<int>(m.rules.size()); ++ri) out[m.rules[ri].from].push_back(ri);
  std::vector<std::vector<std::pair<bool, std::vector<int>>>> acts(m.rules.size());
  for (std::size_t ri = 0; ri < m.rules.size(); ++ri)
    for (const auto& a : m.rules[ri].actions) acts[ri].emplace_back(a.is_write(), fc.indices(a.payload));

  fc.shape.assign(n, ContentShape(k, k <= 16));
  std::vector<int> updates(n, 0);
  const int widen = static_cast<int>(2 * k + 4);
  ContentShape init(k, k <= 16);
  init.reached = true;
  for (int d : fc.indices(src.word)) init.write(d);
  fc.shape[src.loc] = init;
  std::deque<int> work{src.loc};
  std::vector<char> queued(n, 0);
  queued[src.loc] = 1;
  while (!work.empty()) {
    const int q = work.front();
    work.pop_front();
    queued[q] = 0;
    for (int ri : out[q]) {
      ContentShape c = fc.shape[q];
      bool ok = true;
      for (const auto& [w, u] : acts[ri]) {
        if (w) {
          for (int d : u) c.write(d);
        } else if (!c.read(u)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const int t = m.rules[ri].to;
      if (fc.shape[t].join(c, ++updates[t] > widen) && !queued[t]) {
        queued[t] = 1;
        work.push_back(t);
      }
    }
  }
}

inline ForwardCover forward_cover(const Machine& m, const Config& src, std::size_t node_cap, std::size_t length_cap) {
  const int n = m.num_locations();
  std::vector<std::vector<Word>> seen(n);
  std::vector<std::vector<char>> alive(n);
  std::vector<char> truncated(n, 0);
  std::deque<std::pair<int, std::size_t>> work;
  std::vector<std::vector<int>> out(n);
  for (int ri = 0; ri < static_cast<int>(m.rules.size()); ++ri) out[m.rules[ri].from].push_back(ri);
  std::size_t total = 0;
  bool blown = false;

  auto insert = [&](int q, Word w) {
    if (w.size() > length_cap) {
      truncated[q] = 1;
      return;
    }
    auto& ws = seen[q];
    for (std::size_t i = 0; i < ws.size(); ++i)
      if (alive[q][i] && is_subword(w, ws[i])) return;
    for (std::size_t i = 0; i < ws.size(); ++i)
      if (alive[q][i] && is_subword(ws[i], w)) alive[q][i] = 0;
    ws.push_back(std::move(w));
    alive[q].push_back(1);
    work.emplace_back(q, ws.size() - 1);
    if (++total > node_cap) blown = true;
  };

  insert(src.loc, src.word);
  while (!work.empty() && !blown) {
    const auto [q, i] = work.front();
    work.pop_front();
    if (!alive[q][i]) continue;
    const Word w = seen[q][i];
    for (int ri : out[q]) {
      const auto& r = m.rules[ri];
      Word x = w;
      bool ok = true;
      for (const auto& a : r.actions) {
        if (a.is_write()) {
          x += a.payload;
        } else if (auto y = ominus(x, a.payload)) {
          x = std::move(*y);
        } else {
          ok = false;
          break;
        }
      }
      if (ok) insert(r.to, std::move(x));
    }
  }

  ForwardCover fc;
  fc.length_cap = length_cap;
  fc.exact.assign(n, blown ? 0 : 1);
  fc.words.resize(n);
  content_shapes(m, src, fc);
  if (blown) return fc;
  std::vector<int> stack;
  for (int q = 0; q < n; ++q)
    if (truncated[q]) {
      fc.exact[q] = 0;
      stack.push_back(q);
    }
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    for (int ri : out[q]) {
      const int t = m.rules[ri].to;
      if (fc.exact[t]) {
        fc.exact[t] = 0;
        stack.push_back(t);
      }
    }
  }
  for (int q = 0; q < n; ++q)
    for (std::size_t i = 0; i < seen[q].size(); ++i)
      if (alive[q][i]) fc.words[q].push_back(std::move(seen[q][i]));
  return fc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Backward search over the component DAG

enum class SeedKind { Cover, ViaRule };

/// Cover: content word needed at loc. ViaRule: word needed at the target of
/// rule after taking it.
struct Seed {
  SeedKind kind = SeedKind::Cover;
  int loc = 0;
  Word word;
  int rule = -1;
};

struct SearchResult {
  std::optional<Witness> witness;
  int seed = -1;
};

template <class B>
class BackwardSearch {
  using W = typename B::W;

 public:
  BackwardSearch(const Machine& m, const FlatnessInfo& fl, B backend, Config src,
                 const detail::ForwardCover* cover = nullptr, std::size_t budget = 0)
      : m_(m), fl_(fl), b_(std::move(backend)), src_(std::move(src)), cover_(cover), budget_(budget) {
    const int n = m.num_locations();
    arrived_.resize(n);
    entered_.resize(n);
    preds_.resize(n);
    for (int ri = 0; ri < static_cast<int>(m.rules.size()); ++ri) {
      const auto& r = m.rules[ri];
      if (!fl.same_scc(r.from, r.to)) preds_[r.to].push_back(ri);
    }
  }

  SearchResult run(const std::vector<Seed>& seeds) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Seed& sd = seeds[i];
      ++stats.seeds;
      if (sd.kind == SeedKind::Cover) {
        push_arrival(sd.loc, b_.from_plain(sd.word), -1, -1, static_cast<int>(i));
      } else {
        const auto& r = m_.rules[sd.rule];
        push_arrival(r.from, b_.pr(r.actions, b_.from_plain(sd.word)), sd.rule, -1, static_cast<int>(i));
      }
      drive();
      if (found_ >= 0) return extract(seeds);
    }
    return {};
  }

  Stats stats;

 private:
  struct Arrival {
    int loc;
    W y;
    int rule;        // rule taken after the cycle, -1 for a cover seed
    int next_entry;  // -1 at a seed
    int seed;
  };
  struct Entry {
    int arrival;
    BigNat k;
    std::size_t ring_pos;
  };
  struct Frame {
    int arrival;
    detail::FamilyIndices idx;
    bool tail_done = false;
    BigNat next_k;
    bool ascending = false;
    bool has_member = false;
    W member;
    BigNat k;
    std::vector<int> ring;        // q, then backwards along its cycle
    std::vector<int> ring_rules;  // ring_rules[j-1] leads from ring[j] to ring[j-1]
    std::size_t ring_pos = 0;
    W ring_word;
    int entry = -1;
    std::size_t pred_pos = 0;
  };

  bool dominated(std::vector<W>& seen, const W& w) {
    for (const auto& a : seen) {
      auto r = b_.subword(a, w);
      if (!r) ++stats.undecided_subsumptions;
      else if (*r) return true;
    }
    seen.push_back(w);
    stats.max_basis = std::max(stats.max_basis, seen.size());
    return false;
  }

  bool unreachable(int q, const W& w) {
    if (!cover_ || cover_->covers(q, w)) return false;
    ++stats.pruned;
    return true;
  }

  void spend() {
    if (budget_ && stats.arrivals + stats.entries > budget_) throw BudgetExceeded("search step budget exhausted");
  }

  void push_arrival(int q, W y, int rule, int next_entry, int seed) {
    if (unreachable(q, y)) return;
    if (dominated(arrived_[q], y)) {
      ++stats.pruned;
      return;
    }
    ++stats.arrivals;
    spend();
    arrivals_.push_back({q, std::move(y), rule, next_entry, seed});
    Frame f;
    f.arrival = static_cast<int>(arrivals_.size() - 1);
    f.idx = detail::family_indices(b_, fl_.cycles[q], arrivals_.back().y);
    f.next_k = f.idx.top;
    if (f.idx.top > 0) {
      const ActionSeq& s = fl_.cycles[q];
      const W& y = arrivals_.back().y;
      const BigNat exact = BigNat(b_.len(y)) + f.idx.top * (BigNat(rea(s).size()) - BigNat(wri(s).size()));
      if (b_.len(b_.pr_iter(s, y, f.idx.top)) != exact) {
        f.ascending = true;
        f.next_k = 0;
      }
    }
    f.ring.push_back(q);
    const auto& cyc = fl_.cycle_rules[q];
    for (std::size_t i = cyc.size(); i-- > 1;) {
      f.ring.push_back(m_.rules[cyc[i]].from);
      f.ring_rules.push_back(cyc[i]);
    }
    stack_.push_back(std::move(f));
  }

  bool next_member(Frame& f) {
    const Arrival& a = arrivals_[f.arrival];
    const ActionSeq& s = fl_.cycles[a.loc];
    BigNat k;
    if (f.idx.tail_min && !f.tail_done) {
      f.tail_done = true;
      k = *f.idx.tail_min;
    } else if (f.ascending ? f.next_k <= f.idx.top : f.next_k >= 0) {
      k = f.next_k;
      f.next_k += f.ascending ? 1 : -1;
    } else {
      return false;
    }
    W z = b_.pr_iter(s, a.y, k);
    while (k > 0 && b_.equal(b_.pr_iter(s, a.y, k - 1), z)) k -= 1;
    ++stats.members;
    f.member = std::move(z);
    f.k = std::move(k);
    f.has_member = true;
    f.ring_pos = 0;
    return true;
  }

  void drive() {
    while (!stack_.empty() && found_ < 0) {
      const std::size_t top = stack_.size() - 1;
      Frame& f = stack_[top];
      if (f.entry >= 0) {
        const int r = f.ring[f.ring_pos - 1];
        if (f.pred_pos < preds_[r].size()) {
          const int ri = preds_[r][f.pred_pos++];
          W y = b_.pr(m_.rules[ri].actions, f.ring_word);
          const int entry = f.entry, seed = arrivals_[f.arrival].seed;
          push_arrival(m_.rules[ri].from, std::move(y), ri, entry, seed);
          continue;
        }
        f.entry = -1;
      }
      if (f.has_member && f.ring_pos < f.ring.size()) {
        const std::size_t pos = f.ring_pos++;
        if (pos == 0) f.ring_word = f.member;
        else f.ring_word = b_.pr(m_.rules[f.ring_rules[pos - 1]].actions, f.ring_word);
        const int r = f.ring[pos];
        if (unreachable(r, f.ring_word)) continue;
        if (dominated(entered_[r], f.ring_word)) {
          ++stats.pruned;
          continue;
        }
        ++stats.entries;
        spend();
        entries_.push_back({f.arrival, f.k, pos});
        const int e = static_cast<int>(entries_.size() - 1);
        if (r == src_.loc && b_.below(f.ring_word, src_.word)) {
          found_ = e;
          return;
        }
        f.entry = e;
        f.pred_pos = 0;
        continue;
      }
      if (next_member(f)) continue;
      stack_.pop_back();
    }
  }

  SearchResult extract(const std::vector<Seed>& seeds) {
    Witness w;
    int e = found_, seed = -1;
    while (e >= 0) {
      const Entry& en = entries_[e];
      const Arrival& a = arrivals_[en.arrival];
      const ActionSeq& s = fl_.cycles[a.loc];
      const W z = b_.pr_iter(s, a.y, en.k);
      std::vector<int> ring{a.loc}, ring_rules;
      const auto& cyc = fl_.cycle_rules[a.loc];
      for (std::size_t i = cyc.size(); i-- > 1;) {
        ring.push_back(m_.rules[cyc[i]].from);
        ring_rules.push_back(cyc[i]);
      }
      std::vector<W> words{z};
      for (std::size_t j = 1; j <= en.ring_pos; ++j)
        words.push_back(b_.pr(m_.rules[ring_rules[j - 1]].actions, words.back()));
      for (std::size_t j = en.ring_pos; j >= 1; --j)
        w.segments.push_back({ring[j], b_.to_slp(words[j]), 0, ring_rules[j - 1]});
      w.segments.push_back({a.loc, b_.to_slp(z), en.k, a.rule});
      seed = a.seed;
      e = a.next_entry;
    }
    const Seed& sd = seeds[seed];
    if (sd.kind == SeedKind::ViaRule) w.segments.push_back({m_.rules[sd.rule].to, b_.to_slp(b_.from_plain(sd.word)), 0, -1});
    return {std::move(w), seed};
  }

  const Machine& m_;
  const FlatnessInfo& fl_;
  B b_;
  Config src_;
  const detail::ForwardCover* cover_;
  std::size_t budget_;
  std::vector<std::vector<W>> arrived_, entered_;
  std::vector<std::vector<int>> preds_;
  std::vector<Arrival> arrivals_;
  std::vector<Entry> entries_;
  std::vector<Frame> stack_;
  int found_ = -1;
};

// ---------------------------------------------------------------------------
// Decision procedures

namespace detail {

inline FlatnessInfo require_flat(const Machine& m) {
  FlatnessInfo fl = analyze_flatness(m);
  if (!fl.is_flat) {
    std::string msg = "machine is not flat: location ";
    const auto& c = fl.offending->first;
    msg += m.locations[m.rules[c.front()].from] + " lies on two cycles";
    throw NotFlatError(msg);
  }
  return fl;
}

inline void check_config(const Machine& m, const Config& c) {
  if (c.loc < 0 || c.loc >= m.num_locations()) throw std::invalid_argument("configuration location out of range");
  for (Letter x : c.word)
    if (!m.has_letter(x)) throw std::invalid_argument("configuration word uses a letter outside the alphabet");
}

inline SearchResult search(const Machine& m, const FlatnessInfo& fl, const SolverOptions& opt, const Config& src,
                           const std::vector<Seed>& seeds, Stats& stats) {
  std::optional<ForwardCover> cover;
  if (opt.forward_prune) cover = forward_cover(m, src, opt.forward_node_cap, opt.forward_length_cap);
  const ForwardCover* fc = cover ? &*cover : nullptr;
  if (opt.plain_backend) {
    BackwardSearch<PlainBackend> s(m, fl, PlainBackend{}, src, fc, opt.step_budget);
    auto r = s.run(seeds);
    stats = s.stats;
    return r;
  }
  BackwardSearch<SlpBackend> s(m, fl, SlpBackend{opt.compare_limit}, src, fc, opt.step_budget);
  auto r = s.run(seeds);
  stats = s.stats;
  return r;
}

class Timer {
 public:
  double millis() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline Verdict finish(SearchResult r, Stats st, const Timer& t) {
  Verdict v;
  v.answer = r.witness.has_value();
  v.witness = std::move(r.witness);
  v.stats = st;
  v.stats.millis = t.millis();
  return v;
}

/// Liveness: reach (q', y') where sigma_{q'} can be iterated forever from y'.
template <class Pred>
Verdict decide_looping(const Machine& m, const Config& src, const SolverOptions& opt, Pred keep) {
  Timer t;
  const FlatnessInfo fl = require_flat(m);
  check_config(m, src);
  std::vector<Seed> seeds;
  for (int q = 0; q < m.num_locations(); ++q) {
    if (!fl.on_cycle(q) || !keep(q, fl.cycles[q])) continue;
    const OmegaResult om = pr_omega(fl.cycles[q]);
    if (om.bottom()) continue;
    seeds.push_back({SeedKind::Cover, q, *om.value, -1});
  }
  Stats st;
  auto r = search(m, fl, opt, src, seeds, st);
  if (r.witness) r.witness->loop = Config{seeds[r.seed].loc, seeds[r.seed].word};
  return finish(std::move(r), st, t);
}

}  // namespace detail

/// src reaches some (tgt.loc, y) with tgt.word ⊑ y.
inline Verdict decide_coverability(const Machine& m, const Config& src, const Config& tgt,
                                   const SolverOptions& opt = {}) {
  detail::Timer t;
  const FlatnessInfo fl = detail::require_flat(m);
  detail::check_config(m, src);
  detail::check_config(m, tgt);
  Stats st;
  auto r = detail::search(m, fl, opt, src, {{SeedKind::Cover, tgt.loc, tgt.word, -1}}, st);
  return detail::finish(std::move(r), st, t);
}

/// src reaches tgt exactly: src == tgt, or tgt is covered after at least one
/// step (the last step may drop any excess).
inline Verdict decide_reach_exact(const Machine& m, const Config& src, const Config& tgt,
                                  const SolverOptions& opt = {}) {
  detail::Timer t;
  const FlatnessInfo fl = detail::require_flat(m);
  detail::check_config(m, src);
  detail::check_config(m, tgt);
  if (src == tgt) {
    Verdict v;
    v.answer = true;
    v.witness = Witness{};
    v.stats.millis = t.millis();
    return v;
  }
  std::vector<Seed> seeds;
  for (int ri = 0; ri < static_cast<int>(m.rules.size()); ++ri)
    if (m.rules[ri].to == tgt.loc) seeds.push_back({SeedKind::ViaRule, tgt.loc, tgt.word, ri});
  Stats st;
  auto r = detail::search(m, fl, opt, src, seeds, st);
  return detail::finish(std::move(r), st, t);
}

inline Verdict decide_nonterm(const Machine& m, const Config& src, const SolverOptions& opt = {}) {
  return detail::decide_looping(m, src, opt, [](int, const ActionSeq&) { return true; });
}

inline Verdict decide_buchi(const Machine& m, const Config& src, const std::vector<int>& fair,
                            const SolverOptions& opt = {}) {
  return detail::decide_looping(
      m, src, opt, [&](int q, const ActionSeq&) { return std::find(fair.begin(), fair.end(), q) != fair.end(); });
}

inline Verdict decide_unbounded(const Machine& m, const Config& src, const SolverOptions& opt = {}) {
  Verdict v = detail::decide_looping(m, src, opt, [](int, const ActionSeq& s) { return is_increasing(s); });
  if (v.witness) v.witness->embedding = *increasing_embedding(analyze_flatness(m).cycles[v.witness->loop->loc]);
  return v;
}

/// Some run eventually visits tgt.loc infinitely often, each time with a
/// content above tgt.word.
inline Verdict decide_repcov(const Machine& m, const Config& src, const Config& tgt, const SolverOptions& opt = {}) {
  detail::Timer t;
  const FlatnessInfo fl = detail::require_flat(m);
  detail::check_config(m, src);
  detail::check_config(m, tgt);
  Verdict v;
  const ActionSeq& s = fl.cycles[tgt.loc];
  if (!fl.on_cycle(tgt.loc)) {
    v.stats.millis = t.millis();
    return v;
  }
  const RepCovConstraints rc = rep_cov_constraints(s, tgt.word);
  if (!rc.stabilized()) {
    v.stats.repcov_cap_exceeded = true;
    v.stats.millis = t.millis();
    return v;
  }
  std::vector<Seed> seeds;
  bool canonical = false;
  if (auto ms = minimal_common_superwords(rc.constraints, opt.repcov_member_cap)) {
    for (auto& z : *ms) seeds.push_back({SeedKind::Cover, tgt.loc, std::move(z), -1});
  } else {
    canonical = true;
    seeds.push_back({SeedKind::Cover, tgt.loc, rc.canonical_member(), -1});
  }
  Stats st;
  auto r = detail::search(m, fl, opt, src, seeds, st);
  st.repcov_canonical_only = canonical;
  if (r.witness) {
    r.witness->loop = Config{tgt.loc, seeds[r.seed].word};
    r.witness->constraints = rc.constraints;
  }
  return detail::finish(std::move(r), st, t);
}

// ---------------------------------------------------------------------------
// Witness checking

struct Validation {
  bool ok = true;
  int segment = -1;  // first failing segment, -1 when the failure is global
  std::string error;
  explicit operator bool() const { return ok; }
};

namespace detail {

inline Validation reject(int seg, std::string why) { return {false, seg, std::move(why)}; }

inline bool letters_ok(const Machine& m, const Slp& x) {
  for (const auto& n : x.nodes())
    if (n.leaf && !m.has_letter(n.letter)) return false;
  return true;
}

// Cycle word of q recomputed from the rules: follow the unique rule that stays
// inside the strongly connected component. nullopt off cycles.
inline std::optional<ActionSeq> cycle_of(const Machine& m, const FlatnessInfo& fl, int q) {
  ActionSeq s;
  int v = q;
  for (;;) {
    int next = -1;
    for (const auto& r : m.rules)
      if (r.from == v && fl.same_scc(r.from, r.to)) {
        s.insert(s.end(), r.actions.begin(), r.actions.end());
        next = r.to;
        break;
      }
    if (next < 0) return std::nullopt;
    if (next == q) return s;
    v = next;
  }
}

}  // namespace detail

/// Re-derives every link of the witness from the machine.
inline Validation validate_witness(const Machine& m, const Query& q, const Witness& w) {
  using detail::reject;
  const FlatnessInfo fl = analyze_flatness(m);
  if (!fl.is_flat) return reject(-1, "machine is not flat");
  const int nloc = m.num_locations();
  if (q.source.loc < 0 || q.source.loc >= nloc) return reject(-1, "source location out of range");
  if (has_target(q.kind) && (!q.target || q.target->loc < 0 || q.target->loc >= nloc))
    return reject(-1, "query target missing or out of range");

  // Content Y demanded after the last segment, and its location.
  Word y;
  int last_loc = -1;
  switch (q.kind) {
    case QueryKind::ReachExact:
    case QueryKind::Coverability:
      y = q.target->word;
      last_loc = q.target->loc;
      break;
    default: {
      if (!w.loop) return reject(-1, "missing loop configuration");
      const int lq = w.loop->loc;
      if (lq < 0 || lq >= nloc) return reject(-1, "loop location out of range");
      const auto cyc = detail::cycle_of(m, fl, lq);
      if (!cyc) return reject(-1, "loop location has no cycle");
      const ActionSeq& s = *cyc;
      const Word& yl = w.loop->word;
      if (q.kind == QueryKind::RepCov) {
        if (lq != q.target->loc) return reject(-1, "loop location differs from the target");
        const auto& c = w.constraints;
        if (c.empty() || c[0] != q.target->word) return reject(-1, "first constraint is not the target word");
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
          if (pr(s, c[i]) != c[i + 1]) return reject(-1, "constraint " + std::to_string(i + 1) + " is wrong");
        const Word after = pr(s, c.back());
        if (std::none_of(c.begin(), c.end(), [&](const Word& ci) { return is_subword(after, ci); }))
          return reject(-1, "constraints have not stabilized");
        for (const auto& ci : c)
          if (!is_subword(ci, yl)) return reject(-1, "loop content misses a constraint");
      } else {
        if (pr(s, yl) != yl) return reject(-1, "loop content is not a fixpoint of the cycle");
        if (q.kind == QueryKind::Buchi &&
            std::find(q.fair_set.begin(), q.fair_set.end(), lq) == q.fair_set.end())
          return reject(-1, "loop location is not fair");
        if (q.kind == QueryKind::Unbounded) {
          const Word u = rea(s), v = wri(s);
          const auto& e = w.embedding;
          if (v.empty() || e.size() != u.size() * v.size()) return reject(-1, "increasing embedding has the wrong size");
          for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] >= v.size() * (v.size() - 1) || (i > 0 && e[i] <= e[i - 1]) ||
                v[e[i] % v.size()] != u[i % u.size()])
              return reject(-1, "increasing embedding is broken at position " + std::to_string(i));
        }
      }
      y = yl;
      last_loc = lq;
    }
  }

  if (w.segments.empty()) {
    if (q.kind == QueryKind::ReachExact && q.target && q.source == *q.target) return {};
    return reject(-1, "empty witness");
  }
  const auto& seg = w.segments;
  const int mseg = static_cast<int>(seg.size());
  if (seg.back().location != last_loc) return reject(mseg - 1, "last segment is not at the final location");
  if (seg.back().rule != -1) return reject(mseg - 1, "last segment has an outgoing rule");

  bool stepped = false;
  Slp zp = slp_from_plain(y);
  for (int i = mseg - 1; i >= 0; --i) {
    const Segment& sg = seg[i];
    if (sg.location < 0 || sg.location >= nloc) return reject(i, "location out of range");
    if (!detail::letters_ok(m, sg.z)) return reject(i, "letter outside the alphabet");
    if (sg.n < 0) return reject(i, "negative exponent");
    const ActionSeq s = detail::cycle_of(m, fl, sg.location).value_or(ActionSeq{});
    if (s.empty() && sg.n != 0) return reject(i, "exponent on an empty cycle");
    if (sg.n > 0) stepped = true;
    if (!slp_equal(sg.z, slp_pr_iter(s, zp, sg.n))) return reject(i, "content does not match the iterated cycle");
    if (sg.n > 0 && slp_equal(sg.z, slp_pr_iter(s, zp, sg.n - 1))) return reject(i, "exponent is not minimal");
    if (i == 0) break;
    const int ri = seg[i - 1].rule;
    if (ri < 0 || ri >= static_cast<int>(m.rules.size())) return reject(i - 1, "missing rule");
    const Rule& r = m.rules[ri];
    if (r.from != seg[i - 1].location || r.to != sg.location) return reject(i - 1, "rule does not connect segments");
    stepped = true;
    zp = slp_pr(r.actions, sg.z);
  }
  if (seg[0].location != q.source.loc) return reject(0, "first segment is not at the source location");
  if (!slp_subword_rev(seg[0].z, q.source.word)) return reject(0, "first content is not below the source word");
  if (q.kind == QueryKind::ReachExact && !stepped) return reject(0, "exact reachability needs at least one step");
  return {};
}

/// Drops segments one at a time while the witness stays valid.
inline Witness shorten_witness(const Machine& m, const Query& q, Witness w) {
  for (std::size_t i = 0; i < w.segments.size();) {
    const auto& sg = w.segments;
    const bool droppable = i + 1 == sg.size() ? i > 0 && sg[i - 1].location == sg[i].location
                                              : sg[i + 1].location == (i > 0 ? sg[i].location : q.source.loc);
    if (!droppable) {
      ++i;
      continue;
    }
    Witness c = w;
    c.segments.erase(c.segments.begin() + static_cast<std::ptrdiff_t>(i));
    if (validate_witness(m, q, c).ok) w = std::move(c);
    else ++i;
  }
  return w;
}

/// Dispatch on the query kind; witnesses come back shortened.
inline Verdict decide(const Machine& m, const Query& q, const SolverOptions& opt = {}) {
  auto tgt = [&]() -> const Config& {
    if (!q.target) throw std::invalid_argument(std::string(kind_name(q.kind)) + " query needs a target");
    return *q.target;
  };
  Verdict v;
  switch (q.kind) {
    case QueryKind::ReachExact: v = decide_reach_exact(m, q.source, tgt(), opt); break;
    case QueryKind::Coverability: v = decide_coverability(m, q.source, tgt(), opt); break;
    case QueryKind::Nonterm: v = decide_nonterm(m, q.source, opt); break;
    case QueryKind::Buchi: v = decide_buchi(m, q.source, q.fair_set, opt); break;
    case QueryKind::Unbounded: v = decide_unbounded(m, q.source, opt); break;
    case QueryKind::RepCov: v = decide_repcov(m, q.source, tgt(), opt); break;
    default: throw std::invalid_argument("unknown query kind");
  }
  if (v.witness) v.witness = shorten_witness(m, q, std::move(*v.witness));
  return v;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json config_json(const Machine& m, const Config& c) {
  return {{"location", m.locations.at(c.loc)}, {"word", m.format_word(c.word)}};
}

inline Config config_from_json(const Machine& m, const nlohmann::json& j) {
  return {m.location(j.at("location").get<std::string>()), m.parse_word(j.at("word").get<std::string>())};
}

}  // namespace detail

inline nlohmann::json query_to_json(const Machine& m, const Query& q) {
  nlohmann::json j{{"kind", kind_name(q.kind)}, {"source", detail::config_json(m, q.source)}};
  if (q.target) j["target"] = detail::config_json(m, *q.target);
  if (q.kind == QueryKind::Buchi) {
    j["fair"] = nlohmann::json::array();
    for (int f : q.fair_set) j["fair"].push_back(m.locations.at(f));
  }
  return j;
}

inline Query query_from_json(const Machine& m, const nlohmann::json& j) {
  Query q;
  q.kind = kind_from_name(j.at("kind").get<std::string>());
  q.source = detail::config_from_json(m, j.at("source"));
  if (j.contains("target")) q.target = detail::config_from_json(m, j.at("target"));
  if (j.contains("fair"))
    for (const auto& f : j.at("fair")) q.fair_set.push_back(m.location(f.get<std::string>()));
  return q;
}

inline nlohmann::json witness_to_json(const Machine& m, const Witness& w) {
  nlohmann::json segs = nlohmann::json::array();
  auto namer = [&](Letter c) { return m.letter_name(c); };
  for (const auto& s : w.segments) {
    nlohmann::json rule = nullptr;
    if (s.rule >= 0) rule = s.rule;
    segs.push_back({{"location", m.locations.at(s.location)},
                    {"slp_grammar", slp_to_text(s.z, namer)},
                    {"exponent", s.n.str()},
                    {"rule_id", rule}});
  }
  nlohmann::json j{{"segments", segs}};
  if (w.loop) j["loop"] = detail::config_json(m, *w.loop);
  if (!w.constraints.empty()) {
    j["constraints"] = nlohmann::json::array();
    for (const auto& c : w.constraints) j["constraints"].push_back(m.format_word(c));
  }
  if (!w.embedding.empty()) j["increasing_embedding"] = w.embedding;
  return j;
}

inline Witness witness_from_json(const Machine& m, const nlohmann::json& j) {
  Witness w;
  auto letter = [&](const std::string& n) { return m.letter(n); };
  for (const auto& s : j.at("segments")) {
    Segment sg;
    sg.location = m.location(s.at("location").get<std::string>());
    sg.z = slp_from_text(s.at("slp_grammar").get<std::string>(), letter);
    const std::string e = s.at("exponent").get<std::string>();
    if (e.empty() || e.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("exponent must be a decimal string");
    sg.n = BigNat(e);
    sg.rule = s.at("rule_id").is_null() ? -1 : s.at("rule_id").get<int>();
    w.segments.push_back(std::move(sg));
  }
  if (j.contains("loop")) w.loop = detail::config_from_json(m, j.at("loop"));
  if (j.contains("constraints"))
    for (const auto& c : j.at("constraints")) w.constraints.push_back(m.parse_word(c.get<std::string>()));
  if (j.contains("increasing_embedding")) w.embedding = j.at("increasing_embedding").get<std::vector<std::size_t>>();
  return w;
}

inline nlohmann::json stats_to_json(const Stats& s) {
  return {{"seeds", s.seeds},
          {"arrivals", s.arrivals},
          {"entries", s.entries},
          {"members", s.members},
          {"pruned", s.pruned},
          {"undecided_subsumptions", s.undecided_subsumptions},
          {"max_basis", s.max_basis},
          {"repcov_cap_exceeded", s.repcov_cap_exceeded},
          {"repcov_canonical_only", s.repcov_canonical_only},
          {"millis", s.millis}};
}

inline nlohmann::json verdict_to_json(const Machine& m, const Query& q, const Verdict& v) {
  nlohmann::json j{{"query", query_to_json(m, q)}, {"answer", v.answer}, {"stats", stats_to_json(v.stats)}};
  if (v.witness) j["witness"] = witness_to_json(m, *v.witness);
  return j;
}

}  // namespace flatlcm

#endif
