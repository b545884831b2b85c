#ifndef FLATLCM_WORDS_HPP
#define FLATLCM_WORDS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatlcm {

using Letter = char32_t;
using Word = std::u32string;

/// A single channel action: write or read of a (possibly empty) word.
struct Action {
  enum class Dir { Write, Read };
  Dir dir = Dir::Write;
  Word payload;

  static Action write(Word w) { return {Dir::Write, std::move(w)}; }
  static Action read(Word w) { return {Dir::Read, std::move(w)}; }
  bool is_write() const { return dir == Dir::Write; }
  bool is_read() const { return dir == Dir::Read; }
  friend bool operator==(const Action&, const Action&) = default;
};

using ActionSeq = std::vector<Action>;

inline ActionSeq concat(const ActionSeq& a, const ActionSeq& b) {
  ActionSeq r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

/// Concatenated write payloads.
inline Word wri(const ActionSeq& s) {
  Word r;
  for (const auto& a : s)
    if (a.is_write()) r += a.payload;
  return r;
}

/// Concatenated read payloads.
inline Word rea(const ActionSeq& s) {
  Word r;
  for (const auto& a : s)
    if (a.is_read()) r += a.payload;
  return r;
}

inline std::size_t total_size(const ActionSeq& s) {
  std::size_t n = 0;
  for (const auto& a : s) n += a.payload.size();
  return n;
}

/// Scattered subword test, greedy left to right.
inline bool is_subword(const Word& u, const Word& v) {
  std::size_t i = 0;
  for (std::size_t j = 0; i < u.size() && j < v.size(); ++j)
    if (u[i] == v[j]) ++i;
  return i == u.size();
}

/// Residual x/v: strips the longest suffix of x embedding into v.
inline Word residual(const Word& x, const Word& v) {
  std::size_t i = x.size(), j = v.size();
  while (i > 0 && j > 0) {
    if (x[i - 1] == v[j - 1]) --i;
    --j;
  }
  return x.substr(0, i);
}

/// x ⊖ u: erase letters of x from the left until u has been matched.
/// Undefined iff u is not a subword of x.
inline std::optional<Word> ominus(const Word& x, const Word& u) {
  std::size_t j = 0, i = 0;
  for (; i < x.size() && j < u.size(); ++i)
    if (x[i] == u[j]) ++j;
  if (j < u.size()) return std::nullopt;
  return x.substr(i);
}

inline Word pr(const Action& a, const Word& x) {
  return a.is_read() ? a.payload + x : residual(x, a.payload);
}

/// pr[s](x), folding the actions from the last one backwards.
inline Word pr(const ActionSeq& s, Word x) {
  for (auto it = s.rbegin(); it != s.rend(); ++it) x = pr(*it, x);
  return x;
}

/// One step of the general form ?a !b with either side possibly empty.
struct SmallStep {
  std::optional<Letter> read;
  std::optional<Letter> write;
};

/// Letter-level decomposition of s into ?a1 !b1 ... ?ar !br.
inline std::vector<SmallStep> small_steps(const ActionSeq& s) {
  std::vector<std::pair<bool, Letter>> flat;
  for (const auto& a : s)
    for (Letter c : a.payload) flat.emplace_back(a.is_read(), c);
  std::vector<SmallStep> out;
  for (std::size_t i = 0; i < flat.size();) {
    SmallStep st;
    if (flat[i].first) {
      st.read = flat[i].second;
      ++i;
      if (i < flat.size() && !flat[i].first) st.write = flat[i++].second;
    } else {
      st.write = flat[i++].second;
    }
    out.push_back(st);
  }
  return out;
}

/// Small-step sequence y_r, y'_r, ..., y'_1, y_0; the last word is pr(s, x).
inline std::vector<Word> sss(const ActionSeq& s, const Word& x) {
  auto steps = small_steps(s);
  std::vector<Word> out{x};
  Word y = x;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->write) y = residual(y, Word(1, *it->write));
    out.push_back(y);
    if (it->read) y.insert(y.begin(), *it->read);
    out.push_back(y);
  }
  return out;
}

/// All distinct subwords of x. Exponential; callers keep |x| small.
inline std::set<Word> subwords(const Word& x) {
  if (x.size() > 20) throw std::length_error("subwords: word too long");
  std::set<Word> out;
  const std::uint32_t n = static_cast<std::uint32_t>(x.size());
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Word w;
    for (std::uint32_t i = 0; i < n; ++i)
      if (mask & (1u << i)) w.push_back(x[i]);
    out.insert(std::move(w));
  }
  return out;
}

inline constexpr std::size_t lossy_step_limit = 12;

/// Successors of x under one lossy action, by enumeration.
inline std::set<Word> lossy_step(const Word& x, const Action& a) {
  if (x.size() + a.payload.size() > lossy_step_limit)
    throw std::length_error("lossy_step: |x.w| exceeds the enumeration limit");
  if (a.is_write()) return subwords(x + a.payload);
  std::set<Word> out;
  for (const auto& y : subwords(x))
    if (is_subword(a.payload + y, x)) out.insert(y);
  return out;
}

/// Alphabet of a word as a sorted set.
inline std::set<Letter> alph(const Word& w) { return {w.begin(), w.end()}; }

inline bool alph_included(const Word& x, const Word& v) {
  auto av = alph(v);
  return std::all_of(x.begin(), x.end(), [&](Letter c) { return av.count(c) > 0; });
}

inline Word repeat(const Word& u, std::size_t k) {
  Word r;
  r.reserve(u.size() * k);
  for (std::size_t i = 0; i < k; ++i) r += u;
  return r;
}

/// Rendering for diagnostics: code points below 128 as ASCII, others as <n>.
inline std::string debug_string(const Word& w) {
  std::string s;
  for (Letter c : w) {
    if (c < 128 && c >= 32) s.push_back(static_cast<char>(c));
    else s += "<" + std::to_string(static_cast<std::uint32_t>(c)) + ">";
  }
  return s.empty() ? std::string("ε") : s;
}

}  // namespace flatlcm

#endif
