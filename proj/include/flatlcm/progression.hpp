#ifndef FLATLCM_PROGRESSION_HPP
#define FLATLCM_PROGRESSION_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

namespace flatlcm {

using BigNat = boost::multiprecision::cpp_int;

namespace detail {

inline std::size_t mod_small(const BigNat& q, std::size_t m) {
  return static_cast<std::size_t>(q % m);
}

/// Exponent sequence q_{t+1} = step(q_t) of fractional powers over a base of
/// length ulen (q counts letters). The sequence is monotone; periods of equal
/// residues mod ulen are skipped arithmetically.
template <class Step>
class Progression {
 public:
  Progression(Step step, std::size_t ulen) : step_(std::move(step)), ulen_(ulen) {}

  /// q_k.
  BigNat at(BigNat q0, const BigNat& k) { return run(std::move(q0), &k).second; }

  /// Smallest index t at which the minimum of the sequence is reached, and that
  /// minimum.
  std::pair<BigNat, BigNat> minimum(BigNat q0) {
    BigNat q1 = step_(q0);
    if (q1 >= q0) return {BigNat(0), q0};
    return run(std::move(q0), nullptr);
  }

  std::size_t steps_taken() const { return steps_; }

 private:
  // With k == nullptr, runs a decreasing sequence until its fixpoint.
  std::pair<BigNat, BigNat> run(BigNat q, const BigNat* k) {
    BigNat t = 0;
    if (k && *k == 0) return {t, q};
    std::vector<BigNat> hist{q};
    std::unordered_map<std::size_t, std::size_t> last{{mod_small(q, ulen_), 0}};
    int dir = 0;
    for (;;) {
      BigNat nq = step_(q);
      ++steps_;
      if (nq == q) return {t, q};
      t += 1;
      if (dir == 0) dir = nq > q ? 1 : -1;
      q = std::move(nq);
      if (k && t == *k) return {t, q};
      hist.push_back(q);
      const std::size_t j = hist.size() - 1, res = mod_small(q, ulen_);
      auto it = last.find(res);
      if (it != last.end()) {
        const std::size_t i = it->second;
        const BigNat period = j - i;
        BigNat c = 0, delta;
        if (dir > 0 && hist[i + 1] > ulen_) {
          delta = hist[j] - hist[i];
          c = k ? (*k - t) / period : BigNat(0);
        } else if (dir < 0) {
          delta = hist[i] - hist[j];
          BigNat cmax = q > ulen_ ? BigNat((q - ulen_ - 1) / delta) : BigNat(0);
          c = k ? std::min(cmax, BigNat((*k - t) / period)) : cmax;
        }
        if (c > 0) {
          t += c * period;
          if (dir > 0) q += c * delta;
          else q -= c * delta;
          if (k && t == *k) return {t, q};
          hist.assign(1, q);
          last.clear();
          last[mod_small(q, ulen_)] = 0;
          continue;
        }
      }
      last[res] = j;
    }
  }

  Step step_;
  std::size_t ulen_;
  std::size_t steps_ = 0;
};

}  // namespace detail
}  // namespace flatlcm

#endif
