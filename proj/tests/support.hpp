// Test-side helpers and reference implementations written from the
// definitions, independent of the library code paths they check.
#ifndef FLATLCM_TEST_SUPPORT_HPP
#define FLATLCM_TEST_SUPPORT_HPP

#include <flatlcm/gen.hpp>
#include <flatlcm/oracle.hpp>
#include <flatlcm/solver.hpp>

#include <random>
#include <set>
#include <string>
#include <vector>

namespace ref {

using flatlcm::Action;
using flatlcm::ActionSeq;
using flatlcm::Letter;
using flatlcm::Word;

inline Word W(const std::string& s) { return Word(s.begin(), s.end()); }

/// "?ab !c" style action sequences over ASCII letters.
inline ActionSeq seq(const std::string& s) {
  ActionSeq out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == ' ') {
      ++i;
      continue;
    }
    const bool read = s[i] == '?';
    std::size_t j = i + 1;
    while (j < s.size() && s[j] != ' ' && s[j] != '?' && s[j] != '!') ++j;
    Word w = W(s.substr(i + 1, j - i - 1));
    out.push_back(read ? Action::read(w) : Action::write(w));
    i = j;
  }
  return out;
}

/// Subword by longest common subsequence.
inline bool subword(const Word& u, const Word& v) {
  std::vector<std::vector<int>> d(u.size() + 1, std::vector<int>(v.size() + 1, 0));
  for (std::size_t i = 1; i <= u.size(); ++i)
    for (std::size_t j = 1; j <= v.size(); ++j)
      d[i][j] = u[i - 1] == v[j - 1] ? d[i - 1][j - 1] + 1 : std::max(d[i - 1][j], d[i][j - 1]);
  return d[u.size()][v.size()] == static_cast<int>(u.size());
}

/// x with its longest suffix embeddable in v removed, by trying every cut.
inline Word residual(const Word& x, const Word& v) {
  for (std::size_t i = 0; i <= x.size(); ++i)
    if (subword(x.substr(i), v)) return x.substr(0, i);
  return x;
}

inline Word pr(const ActionSeq& s, Word x) {
  for (std::size_t i = s.size(); i-- > 0;) x = s[i].is_read() ? s[i].payload + x : residual(x, s[i].payload);
  return x;
}

/// Largest content after running s from x without losses forced by reads:
/// a read drops everything up to the matched letters.
inline std::optional<Word> max_post(const ActionSeq& s, Word x) {
  for (const auto& a : s) {
    if (a.is_write()) {
      x += a.payload;
      continue;
    }
    std::size_t i = 0;
    for (Letter c : a.payload) {
      while (i < x.size() && x[i] != c) ++i;
      if (i == x.size()) return std::nullopt;
      ++i;
    }
    x = x.substr(i);
  }
  return x;
}

inline bool in_pre(const ActionSeq& s, const Word& y, const Word& x) {
  auto z = max_post(s, y);
  return z && subword(x, *z);
}

inline std::vector<Word> all_words(int letters, std::size_t maxlen) {
  std::vector<Word> out{Word{}};
  for (std::size_t b = 0; b < out.size(); ++b) {
    if (out[b].size() == maxlen) continue;
    for (int c = 0; c < letters; ++c) out.push_back(out[b] + Letter('a' + c));
  }
  return out;
}

class Rand {
 public:
  explicit Rand(std::uint64_t seed) : e_(seed) {}
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(e_); }
  bool coin() { return range(0, 1) == 1; }
  Word word(int letters, int maxlen, int minlen = 0) {
    Word w;
    const int n = range(minlen, maxlen);
    for (int i = 0; i < n; ++i) w.push_back(Letter('a' + range(0, letters - 1)));
    return w;
  }
  /// Action sequence with total payload size at most maxsize.
  ActionSeq actions(int letters, int maxsize) {
    ActionSeq s;
    int left = range(0, maxsize);
    while (left > 0) {
      const int k = range(1, std::min(left, 3));
      s.push_back(coin() ? Action::read(word(letters, k, k)) : Action::write(word(letters, k, k)));
      left -= k;
    }
    return s;
  }

 private:
  std::mt19937_64 e_;
};

/// Random SLP with shared subtrees; expansion length at most maxlen.
inline flatlcm::Slp random_slp(Rand& r, int letters, std::size_t maxlen) {
  flatlcm::SlpBuilder b;
  std::vector<flatlcm::SlpBuilder::Id> pool{flatlcm::SlpBuilder::eps};
  for (int i = 0; i < 3; ++i) pool.push_back(b.plain(r.word(letters, 3, 1)));
  auto pick = [&] { return r.coin() ? pool.back() : pool[r.range(0, static_cast<int>(pool.size()) - 1)]; };
  for (int i = r.range(0, 16); i > 0; --i) {
    const auto x = pick(), y = pick();
    if (b.len(x) + b.len(y) <= maxlen) pool.push_back(b.pair(x, y));
  }
  if (r.range(0, 3) == 0) {
    const Word v = r.word(letters, 3, 1);
    const auto p = b.power(v, r.range(0, static_cast<int>(maxlen)));
    if (b.len(p) <= maxlen) pool.push_back(p);
  }
  const auto root = pool[r.range(0, static_cast<int>(pool.size()) - 1)];
  return b.build(root);
}

/// Single-field mutations of a witness: each exponent moved by one, each
/// segment dropped, and one leaf letter of each content changed.
inline std::vector<flatlcm::Witness> mutants(const flatlcm::Machine& m, const flatlcm::Witness& w) {
  using flatlcm::Witness;
  std::vector<Witness> out;
  const auto& seg = w.segments;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    Witness up = w;
    up.segments[i].n += 1;
    out.push_back(std::move(up));
    if (seg[i].n > 0) {
      Witness down = w;
      down.segments[i].n -= 1;
      out.push_back(std::move(down));
    }
    Witness drop = w;
    drop.segments.erase(drop.segments.begin() + static_cast<std::ptrdiff_t>(i));
    out.push_back(std::move(drop));
    if (!seg[i].z.empty() && m.alphabet.size() > 1) {
      std::string text = flatlcm::slp_to_text(seg[i].z);
      const auto pos = text.find(" leaf ");
      const auto end = text.find('\n', pos);
      const Letter old = static_cast<Letter>(std::stoul(text.substr(pos + 6, end - pos - 6)));
      Letter other = old;
      for (const auto& name : m.alphabet)
        if (m.letter(name) != old) {
          other = m.letter(name);
          break;
        }
      text.replace(pos + 6, end - pos - 6, std::to_string(static_cast<std::uint32_t>(other)));
      Witness leaf = w;
      leaf.segments[i].z = flatlcm::slp_from_text(text);
      out.push_back(std::move(leaf));
    }
  }
  return out;
}

inline bool satisfiable(const flatlcm::Cnf& c) {
  for (unsigned long v = 0; v < (1ul << c.num_vars); ++v) {
    bool all = true;
    for (const auto& cl : c.clauses) {
      bool sat = false;
      for (int l : cl)
        if (((v >> (std::abs(l) - 1)) & 1) == (l > 0 ? 1u : 0u)) sat = true;
      if (!sat) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace ref

#endif
