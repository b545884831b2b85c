#ifndef FLATLCM_SLP_HPP
#define FLATLCM_SLP_HPP

#include "progression.hpp"
#include "words.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace flatlcm {

struct SlpNode {
  bool leaf = true;
  Letter letter = 0;
  std::uint32_t left = 0, right = 0;
  BigNat len = 1;
};

/// Straight-line program. Children have smaller ids than their parent and the
/// root is the last node; the empty word has no nodes.
class Slp {
 public:
  Slp() = default;

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<SlpNode>& nodes() const { return nodes_; }
  std::uint32_t root() const { return static_cast<std::uint32_t>(nodes_.size() - 1); }
  BigNat length() const { return empty() ? BigNat(0) : nodes_.back().len; }
  std::size_t depth() const {
    std::vector<std::size_t> d(nodes_.size(), 1);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (!nodes_[i].leaf) d[i] = 1 + std::max(d[nodes_[i].left], d[nodes_[i].right]);
    return nodes_.empty() ? 0 : d.back();
  }

  bool operator==(const Slp& o) const {
    if (nodes_.size() != o.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto &a = nodes_[i], &b = o.nodes_[i];
      if (a.leaf != b.leaf || (a.leaf ? a.letter != b.letter : (a.left != b.left || a.right != b.right)))
        return false;
    }
    return true;
  }

 private:
  friend class SlpBuilder;
  std::vector<SlpNode> nodes_;
};

/// Hash-consing arena for building SLPs. Ids are local to the builder.
class SlpBuilder {
 public:
  using Id = std::int64_t;
  static constexpr Id eps = -1;

  Id leaf(Letter c) {
    auto it = leaves_.find(c);
    if (it != leaves_.end()) return it->second;
    nodes_.push_back({true, c, 0, 0, 1});
    return leaves_[c] = static_cast<Id>(nodes_.size() - 1);
  }

  Id pair(Id a, Id b) {
    if (a == eps) return b;
    if (b == eps) return a;
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    auto it = pairs_.find(key);
    if (it != pairs_.end()) return it->second;
    BigNat len = nodes_[a].len + nodes_[b].len;
    nodes_.push_back({false, 0, static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), std::move(len)});
    return pairs_[key] = static_cast<Id>(nodes_.size() - 1);
  }

  BigNat len(Id a) const { return a == eps ? BigNat(0) : nodes_[a].len; }

  Id import(const Slp& s) {
    if (s.empty()) return eps;
    std::vector<Id> map(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& n = s.nodes()[i];
      map[i] = n.leaf ? leaf(n.letter) : pair(map[n.left], map[n.right]);
    }
    return map.back();
  }

  Id plain(const Word& w) { return plain(w, 0, w.size()); }

  Id prefix(Id a, const BigNat& k) {
    if (k == 0 || a == eps) return eps;
    if (k >= len(a)) return a;
    const Id l = nodes_[a].left, r = nodes_[a].right;
    const BigNat ll = len(l);
    if (k <= ll) return prefix(l, k);
    return pair(l, prefix(r, k - ll));
  }

  /// Last k letters.
  Id suffix(Id a, const BigNat& k) {
    if (k == 0 || a == eps) return eps;
    if (k >= len(a)) return a;
    const Id l = nodes_[a].left, r = nodes_[a].right;
    const BigNat rl = len(r);
    if (k <= rl) return suffix(r, k);
    return pair(suffix(l, k - rl), r);
  }

  /// Letters [i, j).
  Id factor(Id a, const BigNat& i, const BigNat& j) {
    if (i > j || j > len(a)) throw std::out_of_range("slp factor: bad range");
    return prefix(suffix(a, len(a) - i), j - i);
  }

  /// Prefix of v^omega with n letters.
  Id power(const Word& v, const BigNat& n) {
    if (n == 0) return eps;
    if (v.empty()) throw std::invalid_argument("slp power: empty base");
    const Id base = plain(v);
    BigNat q = n / v.size();
    const BigNat rem = n % v.size();
    Id acc = eps, sq = base;
    while (q > 0) {
      if ((q & 1) != 0) acc = pair(acc, sq);
      q >>= 1;
      if (q > 0) sq = pair(sq, sq);
    }
    return pair(acc, prefix(base, rem));
  }

  Slp build(Id root) const {
    Slp s;
    if (root == eps) return s;
    std::vector<char> mark(static_cast<std::size_t>(root) + 1, 0);
    std::vector<Id> stack{root};
    while (!stack.empty()) {
      Id a = stack.back();
      stack.pop_back();
      if (mark[a]) continue;
      mark[a] = 1;
      if (!nodes_[a].leaf) {
        stack.push_back(nodes_[a].left);
        stack.push_back(nodes_[a].right);
      }
    }
    std::vector<std::uint32_t> remap(mark.size(), 0);
    for (std::size_t i = 0; i < mark.size(); ++i) {
      if (!mark[i]) continue;
      remap[i] = static_cast<std::uint32_t>(s.nodes_.size());
      SlpNode n = nodes_[i];
      if (!n.leaf) {
        n.left = remap[n.left];
        n.right = remap[n.right];
      }
      s.nodes_.push_back(std::move(n));
    }
    return s;
  }

 private:
  Id plain(const Word& w, std::size_t lo, std::size_t hi) {
    if (lo == hi) return eps;
    if (hi - lo == 1) return leaf(w[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    const Id a = plain(w, lo, mid);
    return pair(a, plain(w, mid, hi));
  }

  std::vector<SlpNode> nodes_;
  std::unordered_map<Letter, Id> leaves_;
  std::unordered_map<std::uint64_t, Id> pairs_;
};

inline constexpr std::size_t default_expand_limit = std::size_t(1) << 24;

inline Slp slp_from_plain(const Word& w) {
  SlpBuilder b;
  return b.build(b.plain(w));
}

inline const BigNat slp_len(const Slp& x) { return x.length(); }

namespace detail {

inline void expand_range(const Slp& x, std::uint32_t a, const BigNat& i, const BigNat& j, Word& out) {
  const auto& n = x.nodes()[a];
  if (i >= j) return;
  if (n.leaf) {
    out.push_back(n.letter);
    return;
  }
  const BigNat& ll = x.nodes()[n.left].len;
  if (i < ll) expand_range(x, n.left, i, std::min(j, ll), out);
  if (j > ll) expand_range(x, n.right, i > ll ? BigNat(i - ll) : BigNat(0), j - ll, out);
}

}  // namespace detail

inline Word slp_expand(const Slp& x, std::size_t limit = default_expand_limit) {
  if (x.length() > limit) throw std::length_error("slp_expand: expansion exceeds limit");
  Word out;
  if (x.empty()) return out;
  out.reserve(static_cast<std::size_t>(x.length()));
  std::vector<std::uint32_t> stack{x.root()};
  while (!stack.empty()) {
    const auto& n = x.nodes()[stack.back()];
    stack.pop_back();
    if (n.leaf) {
      out.push_back(n.letter);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

/// Letters [i, j) of x, expanded.
inline Word slp_expand_range(const Slp& x, const BigNat& i, const BigNat& j,
                             std::size_t limit = default_expand_limit) {
  if (i > j || j > x.length()) throw std::out_of_range("slp_expand_range: bad range");
  if (j - i > limit) throw std::length_error("slp_expand_range: expansion exceeds limit");
  Word out;
  if (!x.empty()) detail::expand_range(x, x.root(), i, j, out);
  return out;
}

inline Slp slp_concat(const Slp& x, const Slp& y) {
  SlpBuilder b;
  const auto a = b.import(x);
  return b.build(b.pair(a, b.import(y)));
}

inline Slp slp_factor(const Slp& x, const BigNat& i, const BigNat& j) {
  SlpBuilder b;
  return b.build(b.factor(b.import(x), i, j));
}

/// v^p with p·|v| = n letters.
inline Slp slp_power(const Word& v, const BigNat& n) {
  SlpBuilder b;
  return b.build(b.power(v, n));
}

// ---------------------------------------------------------------------------
// Karp-Rabin fingerprints modulo 2^61 - 1 with two fixed bases.

namespace detail {

inline constexpr std::uint64_t fp_mod = (std::uint64_t(1) << 61) - 1;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(p & fp_mod) + static_cast<std::uint64_t>(p >> 61);
  if (r >= fp_mod) r -= fp_mod;
  return r;
}

inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  if (r >= fp_mod) r -= fp_mod;
  return r;
}

struct Fp {
  std::uint64_t h1 = 0, h2 = 0, p1 = 1, p2 = 1;
  bool operator==(const Fp& o) const { return h1 == o.h1 && h2 == o.h2; }
  static Fp join(const Fp& a, const Fp& b) {
    return {addmod(mulmod(a.h1, b.p1), b.h1), addmod(mulmod(a.h2, b.p2), b.h2), mulmod(a.p1, b.p1),
            mulmod(a.p2, b.p2)};
  }
};

inline constexpr std::uint64_t fp_base1 = 0x1f3a5c7e9b2d4f61ull % fp_mod;
inline constexpr std::uint64_t fp_base2 = 0x0c4b8e2f6a1d3957ull % fp_mod;

inline Fp fp_letter(Letter c) {
  const std::uint64_t v = static_cast<std::uint64_t>(c) + 1;
  return {v, mulmod(v, 0x9e3779b97f4a7c15ull % fp_mod), fp_base1, fp_base2};
}

class Fingerprints {
 public:
  explicit Fingerprints(const Slp& x) : x_(x), fp_(x.size()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& n = x.nodes()[i];
      fp_[i] = n.leaf ? fp_letter(n.letter) : Fp::join(fp_[n.left], fp_[n.right]);
    }
  }

  Fp whole() const { return x_.empty() ? Fp{} : fp_.back(); }

  Fp prefix(const BigNat& k) const { return x_.empty() ? Fp{} : prefix(x_.root(), k); }
  Fp suffix(const BigNat& k) const { return x_.empty() ? Fp{} : suffix(x_.root(), k); }

 private:
  Fp prefix(std::uint32_t a, const BigNat& k) const {
    if (k == 0) return {};
    const auto& n = x_.nodes()[a];
    if (k >= n.len) return fp_[a];
    const BigNat& ll = x_.nodes()[n.left].len;
    if (k <= ll) return prefix(n.left, k);
    return Fp::join(fp_[n.left], prefix(n.right, k - ll));
  }
  Fp suffix(std::uint32_t a, const BigNat& k) const {
    if (k == 0) return {};
    const auto& n = x_.nodes()[a];
    if (k >= n.len) return fp_[a];
    const BigNat& rl = x_.nodes()[n.right].len;
    if (k <= rl) return suffix(n.right, k);
    return Fp::join(suffix(n.left, k - rl), fp_[n.right]);
  }

  const Slp& x_;
  std::vector<Fp> fp_;
};

}  // namespace detail

/// Equality of expansions (randomized, fingerprint based).
inline bool slp_equal(const Slp& x, const Slp& y) {
  if (x.length() != y.length()) return false;
  return detail::Fingerprints(x).whole() == detail::Fingerprints(y).whole();
}

inline bool slp_is_prefix(const Slp& x, const Slp& y) {
  if (x.length() > y.length()) return false;
  return detail::Fingerprints(x).whole() == detail::Fingerprints(y).prefix(x.length());
}

inline bool slp_is_suffix(const Slp& x, const Slp& y) {
  if (x.length() > y.length()) return false;
  return detail::Fingerprints(x).whole() == detail::Fingerprints(y).suffix(x.length());
}

namespace detail {

inline std::vector<std::size_t> kmp_table(const Word& p) {
  std::vector<std::size_t> f(p.size() + 1, 0);
  for (std::size_t i = 1, k = 0; i < p.size(); ++i) {
    while (k > 0 && p[i] != p[k]) k = f[k];
    if (p[i] == p[k]) ++k;
    f[i + 1] = k;
  }
  return f;
}

inline bool kmp_find(const Word& p, const std::vector<std::size_t>& f, const Word& t) {
  for (std::size_t i = 0, k = 0; i < t.size(); ++i) {
    while (k > 0 && t[i] != p[k]) k = f[k];
    if (t[i] == p[k]) ++k;
    if (k == p.size()) return true;
  }
  return false;
}

}  // namespace detail

/// Factor test. The pattern x is expanded; every occurrence in y crosses the
/// split point of some production, and each crossing window is scanned.
inline bool slp_is_factor(const Slp& x, const Slp& y, std::size_t limit = default_expand_limit) {
  if (x.empty()) return true;
  if (x.length() > y.length()) return false;
  const Word p = slp_expand(x, limit);
  const auto f = detail::kmp_table(p);
  const BigNat m = p.size();
  for (std::size_t a = 0; a < y.size(); ++a) {
    const auto& n = y.nodes()[a];
    if (n.leaf) {
      if (p.size() == 1 && n.letter == p[0]) return true;
      continue;
    }
    if (n.len < m) continue;
    const BigNat& ll = y.nodes()[n.left].len;
    const BigNat lo = ll + 1 > m ? BigNat(ll + 1 - m) : BigNat(0);
    const BigNat hi = std::min(n.len, BigNat(ll + m - 1));
    Word window;
    detail::expand_range(y, static_cast<std::uint32_t>(a), lo, hi, window);
    if (detail::kmp_find(p, f, window)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Embedding into powers of a plain word.

/// Greedy embedding costs p(A, v_(i)): letters of (v rotated by i)^omega
/// consumed to embed nonterminal A.
class PowerEmbedder {
 public:
  PowerEmbedder(const Slp& x, const Word& v) : x_(x), v_(v), bad_(x.size(), 0), cost_(x.size()) {
    const std::size_t L = v.size();
    std::map<Letter, std::size_t> idx;
    for (Letter c : v) idx.emplace(c, idx.size());
    std::vector<std::vector<std::size_t>> first(L, std::vector<std::size_t>(idx.size(), 0));
    for (std::size_t i = 0; i < L; ++i)
      for (auto [c, ci] : idx)
        for (std::size_t j = 0; j < L; ++j)
          if (v[(i + j) % L] == c) {
            first[i][ci] = j + 1;
            break;
          }
    for (std::size_t a = 0; a < x.size(); ++a) {
      const auto& n = x.nodes()[a];
      if (n.leaf) {
        auto it = idx.find(n.letter);
        if (it == idx.end()) {
          bad_[a] = 1;
          continue;
        }
        cost_[a].resize(L);
        for (std::size_t i = 0; i < L; ++i) cost_[a][i] = first[i][it->second];
        continue;
      }
      if (bad_[n.left] || bad_[n.right]) {
        bad_[a] = 1;
        continue;
      }
      cost_[a].resize(L);
      for (std::size_t i = 0; i < L; ++i) {
        const BigNat& c1 = cost_[n.left][i];
        cost_[a][i] = c1 + cost_[n.right][(i + detail::mod_small(c1, L)) % L];
      }
    }
  }

  /// Letters of v^omega needed to embed the whole word; nullopt when some
  /// letter is missing from v.
  std::optional<BigNat> cost() const { return suffix_cost(x_.length()); }

  /// Same for the suffix of length m.
  std::optional<BigNat> suffix_cost(const BigNat& m) const {
    if (m == 0) return BigNat(0);
    if (v_.empty()) return std::nullopt;
    BigNat total = 0;
    std::size_t shift = 0;
    if (!suffix_cost(x_.root(), m, shift, total)) return std::nullopt;
    return total;
  }

  /// Length of x / v^omega: the prefix ending at the last letter missing from v.
  BigNat stable_length() const {
    if (x_.empty()) return 0;
    BigNat l = 0;
    std::uint32_t a = x_.root();
    if (!bad_[a]) return 0;
    for (;;) {
      const auto& n = x_.nodes()[a];
      if (n.leaf) return l + 1;
      if (bad_[n.right]) {
        l += x_.nodes()[n.left].len;
        a = n.right;
      } else {
        a = n.left;
      }
    }
  }

 private:
  // Embeds the suffix of length m of node a starting at rotation shift.
  bool suffix_cost(std::uint32_t a, const BigNat& m, std::size_t& shift, BigNat& total) const {
    const auto& n = x_.nodes()[a];
    const std::size_t L = v_.size();
    if (m >= n.len) {
      if (bad_[a]) return false;
      const BigNat& c = cost_[a][shift];
      total += c;
      shift = (shift + detail::mod_small(c, L)) % L;
      return true;
    }
    const BigNat& rl = x_.nodes()[n.right].len;
    if (m <= rl) return suffix_cost(n.right, m, shift, total);
    if (!suffix_cost(n.left, m - rl, shift, total)) return false;
    return suffix_cost(n.right, rl, shift, total);
  }

  const Slp& x_;
  Word v_;
  std::vector<char> bad_;
  std::vector<std::vector<BigNat>> cost_;
};

/// x ⊑ v^p where n = p·|v| counts letters.
inline bool slp_subword_of_power(const Slp& x, const Word& v, const BigNat& n) {
  if (x.empty()) return true;
  if (v.empty()) return false;
  auto c = PowerEmbedder(x, v).cost();
  return c && *c <= n;
}

namespace detail {

inline SlpBuilder::Id residual_power(SlpBuilder& b, const Slp& x, SlpBuilder::Id xid, const Word& v,
                                     const BigNat& k) {
  if (x.empty() || k == 0 || v.empty()) return xid;
  const PowerEmbedder e(x, v);
  const BigNat n = k * v.size(), len = x.length();
  BigNat lo = 0, hi = len;
  while (lo < hi) {
    const BigNat mid = (lo + hi) / 2;
    auto c = e.suffix_cost(len - mid);
    if (c && *c <= n) hi = mid;
    else lo = mid + 1;
  }
  return b.prefix(xid, lo);
}

}  // namespace detail

/// x / v^k.
inline Slp slp_residual_power(const Slp& x, const Word& v, const BigNat& k) {
  SlpBuilder b;
  const auto id = b.import(x);
  return b.build(detail::residual_power(b, x, id, v, k));
}

/// pr[s](x) by the small-step fold over whole payloads.
inline Slp slp_pr(const ActionSeq& s, const Slp& x) {
  Slp y = x;
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (it->payload.empty()) continue;
    if (it->is_read()) {
      SlpBuilder b;
      const auto w = b.plain(it->payload);
      y = b.build(b.pair(w, b.import(y)));
    } else {
      y = slp_residual_power(y, it->payload, 1);
    }
  }
  return y;
}

struct SlpKappa {
  bool infinite = false;
  BigNat value = -1;
};

/// Largest k with x / v^k nonempty, by dichotomic search.
inline SlpKappa slp_kappa(const Slp& x, const Word& v) {
  if (x.empty()) return {false, -1};
  const PowerEmbedder e(x, v);
  auto c = e.cost();
  if (!c) return {true, 0};
  BigNat lo = 0, hi = x.length() + 1;
  while (lo < hi) {
    const BigNat mid = (lo + hi) / 2;
    if (*c <= mid * v.size()) hi = mid;
    else lo = mid + 1;
  }
  return {false, lo - 1};
}

/// pr[s^k](x) in time polynomial in the SLP size, |s| and log k.
inline Slp slp_pr_iter(const ActionSeq& s, const Slp& x, const BigNat& k) {
  if (k == 0) return x;
  const Word u = rea(s), v = wri(s);
  if (u.empty()) return slp_residual_power(x, v, k);
  const SlpKappa kap = slp_kappa(x, v);
  auto prefixed = [&](const BigNat& j) {
    SlpBuilder b;
    const auto xid = b.import(x);
    const auto r = detail::residual_power(b, x, xid, v, j);
    const auto p = b.power(u, j * u.size());
    return b.build(b.pair(p, r));
  };
  if (kap.infinite || k <= kap.value) return prefixed(k);
  Slp y = kap.value >= 0 ? prefixed(kap.value) : Slp{};
  y = slp_pr(s, y);
  const BigNat q0 = y.length();
  if (!slp_equal(y, slp_power(u, q0))) throw std::logic_error("slp_pr_iter: y_{kappa+1} is not a power of rea(s)");
  auto step = [&](const BigNat& q) { return slp_pr(s, slp_power(u, q)).length(); };
  detail::Progression prog(step, u.size());
  return slp_power(u, prog.at(q0, k - std::max<BigNat>(kap.value, 0) - 1));
}

namespace detail {

inline std::size_t subword_walk(const Slp& y, std::uint32_t a, std::size_t c, const Word& x,
                                std::unordered_map<std::uint64_t, std::size_t>& memo) {
  if (c == x.size()) return c;
  const auto& n = y.nodes()[a];
  if (n.leaf) return n.letter == x[c] ? c + 1 : c;
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | c;
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  const std::size_t r = subword_walk(y, n.right, subword_walk(y, n.left, c, x, memo), x, memo);
  memo.emplace(key, r);
  return r;
}

}  // namespace detail

/// x ⊑ y for plain x.
inline bool slp_subword(const Word& x, const Slp& y) {
  if (x.empty()) return true;
  if (y.empty() || y.length() < x.size()) return false;
  std::unordered_map<std::uint64_t, std::size_t> memo;
  return detail::subword_walk(y, y.root(), 0, x, memo) == x.size();
}

namespace detail {

class RevEmbedder {
 public:
  explicit RevEmbedder(const Word& y) : n_(y.size()) {
    for (Letter c : y) idx_.emplace(c, idx_.size());
    next_.assign((n_ + 1) * idx_.size(), n_ + 1);
    for (std::size_t p = n_; p-- > 0;) {
      for (std::size_t c = 0; c < idx_.size(); ++c) next_[p * idx_.size() + c] = next_[(p + 1) * idx_.size() + c];
      next_[p * idx_.size() + idx_[y[p]]] = p + 1;
    }
  }

  // Position after greedily embedding node a from position p; n+1 = failure.
  std::size_t walk(const Slp& x, std::uint32_t a, std::size_t p) {
    if (p > n_) return p;
    const auto& n = x.nodes()[a];
    if (n.leaf) {
      auto it = idx_.find(n.letter);
      return it == idx_.end() ? n_ + 1 : next_[p * idx_.size() + it->second];
    }
    if (n.len > n_ - p) return n_ + 1;
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | p;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const std::size_t r = walk(x, n.right, walk(x, n.left, p));
    memo_.emplace(key, r);
    return r;
  }

  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::map<Letter, std::size_t> idx_;
  std::vector<std::size_t> next_;
  std::unordered_map<std::uint64_t, std::size_t> memo_;
};

}  // namespace detail

/// x ⊑ y for plain y.
inline bool slp_subword_rev(const Slp& x, const Word& y) {
  if (x.empty()) return true;
  if (x.length() > y.size()) return false;
  detail::RevEmbedder e(y);
  return e.walk(x, x.root(), 0) <= y.size();
}

/// x ⊑ y for two SLPs, decided by expanding whichever side fits under the
/// limit; nullopt when neither does.
inline std::optional<bool> slp_subword_bounded(const Slp& x, const Slp& y, std::size_t limit) {
  if (x.empty()) return true;
  if (x.length() > y.length()) return false;
  if (y.length() <= limit) return slp_subword_rev(x, slp_expand(y, limit));
  if (x.length() <= limit) return slp_subword(slp_expand(x, limit), y);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text form: one production per line, then the root.
//   <id> leaf <letter>
//   <id> pair <left> <right>
//   root <id> | root empty

inline std::string slp_to_text(const Slp& x, const std::function<std::string(Letter)>& name) {
  std::ostringstream os;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& n = x.nodes()[i];
    if (n.leaf) os << i << " leaf " << name(n.letter) << "\n";
    else os << i << " pair " << n.left << " " << n.right << "\n";
  }
  if (x.empty()) os << "root empty\n";
  else os << "root " << x.root() << "\n";
  return os.str();
}

inline std::string slp_to_text(const Slp& x) {
  return slp_to_text(x, [](Letter c) { return std::to_string(static_cast<std::uint32_t>(c)); });
}

/// Parses the text form; productions need not be hash-consed or minimal.
inline Slp slp_from_text(const std::string& text, const std::function<Letter(const std::string&)>& letter) {
  std::istringstream is(text);
  std::string line;
  std::vector<SlpBuilder::Id> ids;
  SlpBuilder b;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("slp text line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string first, kind;
    if (!(ls >> first)) continue;
    if (first == "root") {
      std::string r;
      if (!(ls >> r)) fail("missing root");
      if (r == "empty") return Slp{};
      std::size_t ri = 0;
      try {
        ri = std::stoul(r);
      } catch (...) {
        fail("bad root id");
      }
      if (ri >= ids.size()) fail("root id out of range");
      return b.build(ids[ri]);
    }
    std::size_t id = 0;
    try {
      id = std::stoul(first);
    } catch (...) {
      fail("bad production id");
    }
    if (id != ids.size()) fail("production ids must be consecutive from 0");
    if (!(ls >> kind)) fail("missing production kind");
    if (kind == "leaf") {
      std::string tok;
      if (!(ls >> tok)) fail("missing letter");
      ids.push_back(b.leaf(letter(tok)));
    } else if (kind == "pair") {
      std::size_t l = 0, r = 0;
      if (!(ls >> l >> r)) fail("missing children");
      if (l >= id || r >= id) fail("children must precede their parent");
      ids.push_back(b.pair(ids[l], ids[r]));
    } else {
      fail("unknown production kind " + kind);
    }
  }
  throw std::invalid_argument("slp text: missing root line");
}

inline Slp slp_from_text(const std::string& text) {
  return slp_from_text(text, [](const std::string& t) { return static_cast<Letter>(std::stoul(t)); });
}

}  // namespace flatlcm

#endif
