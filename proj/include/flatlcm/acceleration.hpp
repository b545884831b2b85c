#ifndef FLATLCM_ACCELERATION_HPP
#define FLATLCM_ACCELERATION_HPP

#include "progression.hpp"
#include "words.hpp"

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace flatlcm {

/// u^{num/|u|}: the prefix of u^omega of length num.
struct FracPower {
  Word base;
  BigNat num = 0;

  std::size_t den() const { return base.size(); }
  bool operator==(const FracPower&) const = default;

  Word expand(std::size_t limit = std::size_t(1) << 24) const {
    if (num == 0) return {};
    if (base.empty()) throw std::invalid_argument("FracPower: empty base with nonzero length");
    if (num > limit) throw std::length_error("FracPower: expansion too large");
    const auto n = static_cast<std::size_t>(num);
    Word w;
    w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) w.push_back(base[i % base.size()]);
    return w;
  }
};

struct Kappa {
  bool infinite = false;
  long long value = -1;
  bool operator==(const Kappa&) const = default;
};

/// Largest k with x/v^k nonempty.
inline Kappa kappa(const Word& x, const Word& v) {
  if (x.empty()) return {false, -1};
  if (!alph_included(x, v)) return {true, 0};
  long long k = 0;
  Word y = residual(x, v);
  while (!y.empty()) {
    y = residual(y, v);
    ++k;
  }
  return {false, k};
}

namespace detail {

/// Compact word u_(shift)^num · tail over a fixed base u.
struct CompactPower {
  const Word* base;
  std::size_t shift = 0;
  BigNat num = 0;
  std::size_t numres = 0;
  Word tail;

  Letter last_power_letter() const {
    const std::size_t L = base->size();
    return (*base)[(shift + numres + L - 1) % L];
  }

  void apply_reversed(const ActionSeq& s) {
    const std::size_t L = base->size();
    for (auto it = s.rbegin(); it != s.rend(); ++it) {
      const Word& w = it->payload;
      if (it->is_read()) {
        for (auto c = w.rbegin(); c != w.rend(); ++c) {
          shift = (shift + L - 1) % L;
          if ((*base)[shift] != *c) throw std::logic_error("compact power: read does not follow the base");
          num += 1;
          numres = (numres + 1) % L;
        }
      } else {
        for (auto c = w.rbegin(); c != w.rend(); ++c) {
          if (!tail.empty()) {
            if (tail.back() == *c) tail.pop_back();
          } else if (num > 0 && last_power_letter() == *c) {
            num -= 1;
            numres = (numres + L - 1) % L;
          }
        }
      }
    }
  }
};

}  // namespace detail

/// pr[s](u^p) for u = rea(s); the result is again a power of u.
inline FracPower pr_power_on_frac(const ActionSeq& s, const FracPower& p) {
  if (p.base.empty() || p.base != rea(s)) throw std::invalid_argument("pr_power_on_frac: base is not rea(s)");
  detail::CompactPower c{&p.base, 0, p.num, detail::mod_small(p.num, p.base.size()), {}};
  c.apply_reversed(s);
  if (c.shift != 0) throw std::logic_error("pr_power_on_frac: shift did not return to zero");
  return {p.base, c.num};
}

/// y_k = u^{p}·x_{<ell}.
struct PrePowerResult {
  FracPower p;
  std::size_t ell = 0;

  Word expand(const Word& x, std::size_t limit = std::size_t(1) << 24) const {
    return p.expand(limit) + x.substr(0, ell);
  }
};

namespace detail {

struct ResidualChain {
  std::vector<Word> xs;  // x_0 .. x_s, strictly shrinking
  Kappa kappa;
};

inline ResidualChain residual_chain(const Word& x, const Word& v) {
  ResidualChain r{{x}, {}};
  if (x.empty()) {
    r.kappa = {false, -1};
    return r;
  }
  for (;;) {
    Word n = residual(r.xs.back(), v);
    if (n == r.xs.back()) {
      r.kappa = {true, 0};
      return r;
    }
    if (n.empty()) {
      r.kappa = {false, static_cast<long long>(r.xs.size()) - 1};
      return r;
    }
    r.xs.push_back(std::move(n));
  }
}

}  // namespace detail

/// pr[s^k](x) in time polynomial in |s|, |x| and log k.
inline PrePowerResult pr_iter(const ActionSeq& s, const Word& x, const BigNat& k) {
  const Word u = rea(s), v = wri(s);
  if (k == 0) return {{u, 0}, x.size()};
  auto chain = detail::residual_chain(x, v);
  if (u.empty()) {
    const std::size_t last = chain.xs.size() - 1;
    const std::size_t idx = k >= last ? last : static_cast<std::size_t>(k);
    std::size_t ell = chain.xs[idx].size();
    if (!chain.kappa.infinite && k > last) ell = 0;
    return {{u, 0}, ell};
  }
  if (chain.kappa.infinite || k <= chain.kappa.value) {
    const std::size_t last = chain.xs.size() - 1;
    const std::size_t idx = k >= last ? last : static_cast<std::size_t>(k);
    return {{u, k * u.size()}, chain.xs[idx].size()};
  }
  const long long kap = chain.kappa.value;
  detail::CompactPower c{&u, 0, 0, 0, {}};
  if (kap >= 0) {
    c.num = BigNat(kap) * u.size();
    c.tail = chain.xs[static_cast<std::size_t>(kap)];
  }
  c.apply_reversed(s);
  if (c.shift != 0 || !c.tail.empty()) throw std::logic_error("pr_iter: y_{kappa+1} is not a power of rea(s)");
  const BigNat kk = k - (std::max(kap, 0LL) + 1);
  auto step = [&](const BigNat& q) { return pr_power_on_frac(s, {u, q}).num; };
  detail::Progression prog(step, u.size());
  return {{u, prog.at(c.num, kk)}, 0};
}

inline Word pr_iter_word(const ActionSeq& s, const Word& x, const BigNat& k) {
  return pr_iter(s, x, k).expand(x);
}

/// Smallest L such that pr[s^l](x) ⊑ pr[s^{L+1}](x) for some l <= L.
inline std::size_t iteration_number(const ActionSeq& s, const Word& x) {
  std::vector<Word> ys{x};
  for (std::size_t L = 0;; ++L) {
    Word next = pr(s, ys[L]);
    for (std::size_t l = 0; l <= L; ++l)
      if (ys[l].size() <= next.size() && is_subword(ys[l], next)) return L;
    ys.push_back(std::move(next));
  }
}

struct BasisElem {
  Word word;
  std::size_t index = 0;
  bool operator==(const BasisElem&) const = default;
};
using Basis = std::vector<BasisElem>;

/// Antichain insertion keeping the earliest of equal words.
inline bool antichain_insert(Basis& b, BasisElem e) {
  for (const auto& o : b)
    if (is_subword(o.word, e.word)) return false;
  std::erase_if(b, [&](const BasisElem& o) { return is_subword(e.word, o.word); });
  b.push_back(std::move(e));
  return true;
}

/// Minimal elements of pr[s^i](x) for i <= L(s, x), tagged with indices.
inline Basis pre_star_basis(const ActionSeq& s, const Word& x) {
  const std::size_t L = iteration_number(s, x);
  Basis b;
  Word y = x;
  for (std::size_t i = 0; i <= L; ++i) {
    antichain_insert(b, {y, i});
    y = pr(s, y);
  }
  std::sort(b.begin(), b.end(), [](const BasisElem& a, const BasisElem& c) { return a.index < c.index; });
  return b;
}

struct OmegaResult {
  std::optional<Word> value;
  bool bottom() const { return !value.has_value(); }
};

/// Greatest fixpoint seed pr[s^omega](eps), or bottom when the iteration from
/// eps grows forever.
inline OmegaResult pr_omega(const ActionSeq& s) {
  const Word u = rea(s);
  Word y;
  std::vector<std::size_t> lens{0};
  std::map<std::size_t, std::size_t> last{{0, 0}};
  for (;;) {
    Word n = pr(s, y);
    if (n == y) return {y};
    y = std::move(n);
    lens.push_back(y.size());
    const std::size_t j = lens.size() - 1;
    if (u.empty()) continue;
    const std::size_t res = y.size() % u.size();
    auto it = last.find(res);
    if (it != last.end() && lens[it->second + 1] > u.size()) return {};
    last[res] = j;
  }
}

/// rea(s)^l ⊑ wri(s)^{l-1} with l = |wri(s)| > 0.
inline bool is_increasing(const ActionSeq& s) {
  const Word u = rea(s), v = wri(s);
  if (v.empty()) return false;
  return is_subword(repeat(u, v.size()), repeat(v, v.size() - 1));
}

/// Leftmost embedding of rea(s)^l into wri(s)^{l-1}, l = |wri(s)|, as
/// positions in the latter; nullopt when s is not increasing.
inline std::optional<std::vector<std::size_t>> increasing_embedding(const ActionSeq& s) {
  const Word u = rea(s), v = wri(s);
  if (v.empty()) return std::nullopt;
  const Word x = repeat(u, v.size()), y = repeat(v, v.size() - 1);
  std::vector<std::size_t> pos;
  std::size_t j = 0;
  for (Letter c : x) {
    while (j < y.size() && y[j] != c) ++j;
    if (j == y.size()) return std::nullopt;
    pos.push_back(j++);
  }
  return pos;
}

struct RepCovConstraints {
  enum class Status { Stabilized, CapExceeded };
  std::vector<Word> constraints;
  Status status = Status::Stabilized;

  bool stabilized() const { return status == Status::Stabilized; }
  bool member(const Word& z) const {
    if (!stabilized()) return false;
    for (const auto& y : constraints)
      if (!is_subword(y, z)) return false;
    return true;
  }
  Word canonical_member() const {
    Word z;
    for (const auto& y : constraints) z += y;
    return z;
  }
};

inline std::size_t rep_cov_cap(const ActionSeq& s, const Word& x) {
  return 2 * (x.size() + 1) * (rea(s).size() + 1) + 2;
}

/// Constraint words y_0..y_K with I_s(x) = ↑y_0 ∩ ... ∩ ↑y_K.
inline RepCovConstraints rep_cov_constraints(const ActionSeq& s, const Word& x) {
  const std::size_t cap = rep_cov_cap(s, x);
  RepCovConstraints r;
  r.constraints.push_back(x);
  for (;;) {
    Word next = pr(s, r.constraints.back());
    for (const auto& y : r.constraints)
      if (is_subword(next, y)) return r;
    if (r.constraints.size() >= cap) {
      r.status = RepCovConstraints::Status::CapExceeded;
      return r;
    }
    r.constraints.push_back(std::move(next));
  }
}

namespace detail {

inline void merges(const Word& a, const Word& b, std::size_t i, std::size_t j, Word& cur, std::set<Word>& out,
                   std::size_t cap) {
  if (out.size() > cap) return;
  if (i == a.size() || j == b.size()) {
    out.insert(cur + a.substr(i) + b.substr(j));
    return;
  }
  cur.push_back(a[i]);
  if (a[i] == b[j]) merges(a, b, i + 1, j + 1, cur, out, cap);
  merges(a, b, i + 1, j, cur, out, cap);
  cur.back() = b[j];
  merges(a, b, i, j + 1, cur, out, cap);
  cur.pop_back();
}

inline std::vector<Word> minimize(const std::set<Word>& ws) {
  std::vector<Word> sorted(ws.begin(), ws.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Word& a, const Word& b) { return a.size() < b.size(); });
  std::vector<Word> out;
  for (const auto& w : sorted) {
    bool dominated = false;
    for (const auto& o : out)
      if (is_subword(o, w)) {
        dominated = true;
        break;
      }
    if (!dominated) out.push_back(w);
  }
  return out;
}

}  // namespace detail

/// Minimal words above every constraint. Returns nullopt once more than cap
/// candidates are produced.
inline std::optional<std::vector<Word>> minimal_common_superwords(const std::vector<Word>& ws, std::size_t cap) {
  std::vector<Word> cur{Word{}};
  for (const auto& y : ws) {
    std::set<Word> next;
    for (const auto& c : cur) {
      Word buf;
      detail::merges(c, y, 0, 0, buf, next, cap);
      if (next.size() > cap) return std::nullopt;
    }
    cur = detail::minimize(next);
  }
  return cur;
}

}  // namespace flatlcm

#endif
