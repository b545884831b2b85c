#ifndef FLATLCM_MACHINE_HPP
#define FLATLCM_MACHINE_HPP

#include "words.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flatlcm {

struct ParseError : std::runtime_error {
  std::size_t line, column;
  ParseError(std::size_t l, std::size_t c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

struct SemanticError : std::runtime_error {
  std::string token;
  SemanticError(const std::string& tok, const std::string& msg) : std::runtime_error(msg), token(tok) {}
};

struct Rule {
  int from = 0;
  ActionSeq actions;
  int to = 0;
  bool operator==(const Rule&) const = default;
};

/// Letters named by a single ASCII character use that code point; any other
/// name gets a private-use code point after its declaration index.
inline constexpr Letter multi_char_letter_base = 0xE000;

class Machine {
 public:
  std::string name = "m";
  std::vector<std::string> alphabet;
  std::vector<std::string> locations;
  std::vector<Rule> rules;
  std::optional<int> initial;

  bool operator==(const Machine& o) const {
    return name == o.name && alphabet == o.alphabet && locations == o.locations && rules == o.rules &&
           initial == o.initial;
  }

  int add_letter(const std::string& n) {
    if (letter_ids_.count(n)) throw SemanticError(n, "duplicate letter " + n);
    check_letter_name(n);
    const int id = static_cast<int>(alphabet.size());
    alphabet.push_back(n);
    const Letter c = (n.size() == 1 && static_cast<unsigned char>(n[0]) < 128)
                         ? static_cast<Letter>(static_cast<unsigned char>(n[0]))
                         : multi_char_letter_base + static_cast<Letter>(id);
    letter_ids_[n] = c;
    letter_names_[c] = n;
    return id;
  }

  int add_location(const std::string& n) {
    if (location_ids_.count(n)) throw SemanticError(n, "duplicate location " + n);
    check_location_name(n);
    const int id = static_cast<int>(locations.size());
    locations.push_back(n);
    location_ids_[n] = id;
    return id;
  }

  int add_rule(int from, ActionSeq actions, int to) {
    std::erase_if(actions, [](const Action& a) { return a.payload.empty(); });
    Rule r{from, std::move(actions), to};
    if (from < 0 || to < 0 || from >= num_locations() || to >= num_locations())
      throw SemanticError(std::to_string(from) + "->" + std::to_string(to), "rule endpoint out of range");
    for (const auto& a : r.actions)
      for (Letter c : a.payload)
        if (!letter_names_.count(c)) throw SemanticError(std::to_string(c), "rule uses an undeclared letter");
    if (std::find(rules.begin(), rules.end(), r) != rules.end())
      throw SemanticError(locations[from] + " -> " + locations[to], "duplicate rule");
    rules.push_back(std::move(r));
    return static_cast<int>(rules.size() - 1);
  }

  int num_locations() const { return static_cast<int>(locations.size()); }

  std::optional<int> find_location(const std::string& n) const {
    auto it = location_ids_.find(n);
    if (it == location_ids_.end()) return std::nullopt;
    return it->second;
  }
  int location(const std::string& n) const {
    auto l = find_location(n);
    if (!l) throw SemanticError(n, "unknown location " + n);
    return *l;
  }

  std::optional<Letter> find_letter(const std::string& n) const {
    auto it = letter_ids_.find(n);
    if (it == letter_ids_.end()) return std::nullopt;
    return it->second;
  }
  Letter letter(const std::string& n) const {
    auto c = find_letter(n);
    if (!c) throw SemanticError(n, "unknown letter " + n);
    return *c;
  }
  const std::string& letter_name(Letter c) const {
    auto it = letter_names_.find(c);
    if (it == letter_names_.end()) throw SemanticError(std::to_string(c), "letter outside the alphabet");
    return it->second;
  }
  bool has_letter(Letter c) const { return letter_names_.count(c) > 0; }

  bool single_char_letters() const {
    return std::all_of(alphabet.begin(), alphabet.end(), [](const std::string& s) { return s.size() == 1; });
  }

  /// Word syntax: "." is the empty word; "a,b,c" separates letters
  /// explicitly; otherwise a declared letter name, or one letter per character.
  Word parse_word(std::string_view text) const {
    Word w;
    if (text == "." || text.empty()) return w;
    if (text.find(',') != std::string_view::npos) {
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = text.find(',', start);
        const std::string tok(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - start));
        if (tok.empty()) throw SemanticError(std::string(text), "empty letter in word " + std::string(text));
        w.push_back(letter(tok));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return w;
    }
    if (auto c = find_letter(std::string(text))) return Word(1, *c);
    for (char ch : text) w.push_back(letter(std::string(1, ch)));
    return w;
  }

  std::string format_word(const Word& w) const {
    if (w.empty()) return ".";
    std::string s;
    const bool sep = !single_char_letters();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (sep && i > 0) s += ",";
      s += letter_name(w[i]);
    }
    return s;
  }

  std::string format_action(const Action& a) const {
    return (a.is_write() ? "!" : "?") + format_word(a.payload);
  }

  std::string format_actions(const ActionSeq& s) const {
    if (s.empty()) return ".";
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " " : "") + format_action(s[i]);
    return out;
  }

  static void check_letter_name(const std::string& n) {
    if (n.empty() || n.find_first_of(",.!?#: \t\r\n") != std::string::npos)
      throw SemanticError(n, "invalid letter name " + n);
  }
  static void check_location_name(const std::string& n) {
    if (n.empty() || n == "->" || n.find_first_of(":# \t\r\n") != std::string::npos)
      throw SemanticError(n, "invalid location name " + n);
  }

 private:
  std::map<std::string, Letter> letter_ids_;
  std::map<Letter, std::string> letter_names_;
  std::map<std::string, int> location_ids_;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t col;
};

inline std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#') ++j;
    out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

}  // namespace detail

inline Machine parse_machine(std::string_view text) {
  Machine m;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool saw_machine = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    const std::string& kw = toks[0].text;
    auto wrap = [&](const detail::Token& t, auto&& fn) {
      try {
        return fn();
      } catch (const SemanticError& e) {
        throw SemanticError(e.token, "line " + std::to_string(lineno) + ", column " + std::to_string(t.col) +
                                         ": " + e.what());
      }
    };
    if (kw == "machine") {
      if (toks.size() != 2) throw ParseError(lineno, toks[0].col, "expected: machine <name>");
      if (saw_machine) throw ParseError(lineno, toks[0].col, "duplicate machine line");
      saw_machine = true;
      m.name = toks[1].text;
    } else if (kw == "alphabet") {
      if (toks.size() < 2) throw ParseError(lineno, toks[0].col, "alphabet needs at least one letter");
      for (std::size_t i = 1; i < toks.size(); ++i) wrap(toks[i], [&] { return m.add_letter(toks[i].text); });
    } else if (kw == "loc") {
      if (toks.size() < 2) throw ParseError(lineno, toks[0].col, "loc needs at least one location");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (toks[i].text == "init") {
          if (i == 1) throw ParseError(lineno, toks[i].col, "init must follow a location");
          if (m.initial) throw ParseError(lineno, toks[i].col, "more than one initial location");
          m.initial = m.num_locations() - 1;
          continue;
        }
        wrap(toks[i], [&] { return m.add_location(toks[i].text); });
      }
    } else if (kw == "rule") {
      if (toks.size() < 6 || toks[2].text != "->" || toks[4].text != ":")
        throw ParseError(lineno, toks[0].col, "expected: rule <loc> -> <loc> : <action>...");
      const int from = wrap(toks[1], [&] { return m.location(toks[1].text); });
      const int to = wrap(toks[3], [&] { return m.location(toks[3].text); });
      ActionSeq seq;
      for (std::size_t i = 5; i < toks.size(); ++i) {
        const std::string& t = toks[i].text;
        if (t == ".") {
          if (toks.size() != 6) throw ParseError(lineno, toks[i].col, "'.' must be the only action");
          continue;
        }
        if (t.size() < 2 || (t[0] != '!' && t[0] != '?'))
          throw ParseError(lineno, toks[i].col, "action must be !<word> or ?<word>: " + t);
        Word w = wrap(toks[i], [&] { return m.parse_word(std::string_view(t).substr(1)); });
        seq.push_back(t[0] == '!' ? Action::write(std::move(w)) : Action::read(std::move(w)));
      }
      wrap(toks[0], [&] { return m.add_rule(from, std::move(seq), to); });
    } else {
      throw ParseError(lineno, toks[0].col, "unknown keyword " + kw);
    }
  }
  if (m.alphabet.empty()) throw ParseError(lineno, 1, "machine declares no alphabet");
  return m;
}

inline std::string print_machine(const Machine& m) {
  std::ostringstream os;
  os << "machine " << m.name << "\n";
  os << "alphabet";
  for (const auto& a : m.alphabet) os << " " << a;
  os << "\nloc";
  for (int i = 0; i < m.num_locations(); ++i) {
    os << " " << m.locations[i];
    if (m.initial && *m.initial == i) os << " init";
  }
  os << "\n";
  for (const auto& r : m.rules)
    os << "rule " << m.locations[r.from] << " -> " << m.locations[r.to] << " : " << m.format_actions(r.actions)
       << "\n";
  return os.str();
}

struct FlatnessInfo {
  bool is_flat = true;
  /// sigma_q, starting with the action leaving q; empty off cycles.
  std::vector<ActionSeq> cycles;
  /// Rule ids of the cycle through q, starting at q.
  std::vector<std::vector<int>> cycle_rules;
  /// Strongly connected component per location, numbered in reverse
  /// topological order (successors first).
  std::vector<int> scc;
  /// Two distinct elementary cycles through a common location, as rule ids.
  std::optional<std::pair<std::vector<int>, std::vector<int>>> offending;

  bool on_cycle(int q) const { return !cycle_rules[q].empty(); }
  bool same_scc(int p, int q) const { return scc[p] == scc[q]; }
};

namespace detail {

inline std::vector<int> tarjan(const Machine& m) {
  const int n = m.num_locations();
  std::vector<std::vector<int>> succ(n);
  for (const auto& r : m.rules) succ[r.from].push_back(r.to);
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on(n, 0);
  int counter = 0, ncomp = 0;
  struct Frame {
    int v;
    std::size_t i;
  };
  for (int s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    std::vector<Frame> call{{s, 0}};
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on[s] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.i < succ[f.v].size()) {
        const int w = succ[f.v][f.i++];
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

// Shortest rule path from a to b inside one component (BFS).
inline std::vector<int> scc_path(const Machine& m, const std::vector<int>& comp, int a, int b) {
  if (a == b) return {};
  const int n = m.num_locations();
  std::vector<int> via(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<int> queue{a};
  seen[a] = 1;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int v = queue[h];
    for (int ri = 0; ri < static_cast<int>(m.rules.size()); ++ri) {
      const auto& r = m.rules[ri];
      if (r.from != v || comp[r.to] != comp[a] || seen[r.to]) continue;
      seen[r.to] = 1;
      via[r.to] = ri;
      queue.push_back(r.to);
    }
  }
  std::vector<int> path;
  for (int v = b; v != a; v = m.rules[via[v]].from) path.push_back(via[v]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

inline FlatnessInfo analyze_flatness(const Machine& m) {
  const int n = m.num_locations();
  FlatnessInfo f;
  f.cycles.assign(n, {});
  f.cycle_rules.assign(n, {});
  f.scc = detail::tarjan(m);
  std::vector<std::vector<int>> out(n);
  for (int ri = 0; ri < static_cast<int>(m.rules.size()); ++ri) {
    const auto& r = m.rules[ri];
    if (f.scc[r.from] == f.scc[r.to]) out[r.from].push_back(ri);
  }
  for (int v = 0; v < n && f.is_flat; ++v) {
    if (out[v].size() < 2) continue;
    f.is_flat = false;
    std::vector<int> c1{out[v][0]}, c2{out[v][1]};
    for (int ri : detail::scc_path(m, f.scc, m.rules[out[v][0]].to, v)) c1.push_back(ri);
    for (int ri : detail::scc_path(m, f.scc, m.rules[out[v][1]].to, v)) c2.push_back(ri);
    f.offending = std::make_pair(c1, c2);
  }
  if (!f.is_flat) return f;
  for (int q = 0; q < n; ++q) {
    if (out[q].empty()) continue;
    int v = q;
    do {
      const int ri = out[v][0];
      f.cycle_rules[q].push_back(ri);
      const auto& acts = m.rules[ri].actions;
      f.cycles[q].insert(f.cycles[q].end(), acts.begin(), acts.end());
      v = m.rules[ri].to;
    } while (v != q);
  }
  return f;
}

}  // namespace flatlcm

#endif
