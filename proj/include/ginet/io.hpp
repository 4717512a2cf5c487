#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ginet/error.hpp"
#include "ginet/perm_group.hpp"
#include "ginet/polynomial.hpp"

namespace ginet {

/// symmetric | alternating | cyclic | dihedral | trivial of degree n, or grid(dims).
inline PermGroup named_group(const std::string& name, int n, const std::vector<int>& dims = {}) {
  if (name == "grid") return PermGroup::grid(dims);
  if (n < 1) throw ShapeError("named group '" + name + "' needs a positive degree");
  if (name == "symmetric") return PermGroup::symmetric(n);
  if (name == "alternating") return PermGroup::alternating(n);
  if (name == "cyclic") return PermGroup::cyclic(n);
  if (name == "dihedral") return PermGroup::dihedral(n);
  if (name == "trivial") return PermGroup::trivial(n);
  throw ShapeError("unknown group name '" + name + "'");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  const auto h = s.find('#');
  return trim(h == std::string_view::npos ? s : s.substr(0, h));
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline int parse_int(std::string_view s, std::size_t line, const char* what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(std::string("expected an integer for ") + what + ", got '" + std::string(s) + "'", line);
  return v;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("expected a number, got '" + std::string(s) + "'", line);
  return v;
}

/// "(1 2 3)(4 5)" -> 0-based cycles. "()" is the identity.
inline std::vector<std::vector<int>> parse_cycles(std::string_view s, std::size_t line) {
  std::vector<std::vector<int>> cycles;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == ' ' || s[i] == '\t') {
      ++i;
      continue;
    }
    if (s[i] != '(') throw ParseError("expected '(' in cycle notation, got '" + std::string(1, s[i]) + "'", line);
    const auto close = s.find(')', i);
    if (close == std::string_view::npos) throw ParseError("unterminated cycle '" + std::string(s.substr(i)) + "'", line);
    std::vector<int> cyc;
    std::string_view body = s.substr(i + 1, close - i - 1);
    if (body.find('(') != std::string_view::npos) throw ParseError("unterminated cycle before '('", line);
    std::string spaced(body);
    for (char& c : spaced)
      if (c == ',') c = ' ';
    for (auto tok : split_ws(spaced)) cyc.push_back(parse_int(tok, line, "a cycle point") - 1);
    if (!cyc.empty()) cycles.push_back(std::move(cyc));
    i = close + 1;
  }
  return cycles;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Splits "key = value" or "key: value"; returns nullopt if neither separator occurs.
inline std::optional<std::pair<std::string_view, std::string_view>> key_value(std::string_view line) {
  const auto eq = line.find('='), colon = line.find(':');
  const auto sep = std::min(eq, colon);
  if (sep == std::string_view::npos) return std::nullopt;
  return std::pair{trim(line.substr(0, sep)), trim(line.substr(sep + 1))};
}

}  // namespace detail

/// Group file text: `n = <int>`, one `gen: <cycles>` per generator (1-based
/// cycle notation), or `name = symmetric|alternating|cyclic|dihedral|trivial`
/// with `n`, or `name = grid` with `dims = d1 d2 ...`. `#` starts a comment.
inline PermGroup parse_group_text(std::string_view text, std::size_t cap = kDefaultGroupCap) {
  std::optional<int> n;
  std::optional<std::string> name;
  std::vector<int> dims;
  std::vector<std::pair<std::string, std::size_t>> gens;
  std::size_t line_no = 0, last_line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = detail::strip_comment(raw);
    if (line.empty()) continue;
    last_line = line_no;
    const auto kv = detail::key_value(line);
    if (!kv) throw ParseError("expected 'key = value' or 'gen: cycles', got '" + std::string(line) + "'", line_no);
    const auto [key, value] = *kv;
    if (key == "n") {
      if (n) throw ParseError("degree given twice", line_no);
      n = detail::parse_int(value, line_no, "n");
      if (*n < 1) throw ParseError("degree must be positive", line_no);
    } else if (key == "gen") {
      gens.emplace_back(std::string(value), line_no);
    } else if (key == "name") {
      if (name) throw ParseError("name given twice", line_no);
      name = std::string(value);
    } else if (key == "dims") {
      for (auto tok : detail::split_ws(value)) dims.push_back(detail::parse_int(tok, line_no, "dims"));
      if (dims.empty()) throw ParseError("dims needs at least one entry", line_no);
    } else {
      throw ParseError("unknown key '" + std::string(key) + "'", line_no);
    }
  }
  if (name) {
    if (!gens.empty()) throw ParseError("a named group cannot also list generators", gens.front().second);
    if (*name == "grid") {
      if (dims.empty()) throw ParseError("name = grid requires dims", last_line);
      int prod = 1;
      for (int d : dims) prod *= d;
      if (n && *n != prod) throw ParseError("n = " + std::to_string(*n) + " disagrees with dims (product " + std::to_string(prod) + ")", last_line);
      return PermGroup::grid(dims, cap);
    }
    if (!n) throw ParseError("named group requires 'n = <int>'", last_line);
    try {
      return named_group(*name, *n);
    } catch (const ShapeError& e) {
      throw ParseError(e.what(), last_line);
    }
  }
  if (!n) throw ParseError("missing 'n = <int>'", last_line);
  std::vector<Permutation> perms;
  for (const auto& [g, ln] : gens) {
    const auto cycles = detail::parse_cycles(g, ln);
    for (const auto& c : cycles)
      for (int v : c)
        if (v < 0 || v >= *n) throw ParseError("point " + std::to_string(v + 1) + " outside [1, " + std::to_string(*n) + "]", ln);
    try {
      perms.push_back(Permutation::from_cycles(*n, cycles));
    } catch (const ShapeError& e) {
      throw ParseError(e.what(), ln);
    }
  }
  return PermGroup::generate(*n, std::move(perms), cap);
}

inline PermGroup parse_group_file(const std::string& path, std::size_t cap = kDefaultGroupCap) {
  return parse_group_text(detail::read_file(path), cap);
}

/// Degree and generators in the group file format.
inline std::string write_group(const PermGroup& G) {
  std::string out = "n = " + std::to_string(G.degree()) + "\n";
  for (const auto& g : G.generators()) out += "gen: " + g.to_cycle_string() + "\n";
  return out;
}

/// Polynomial file text over n variables: `<coeff>: e1 ... en` per term,
/// `name: vandermonde`, `name: powersum <d>`. Lines add up.
inline Polynomial parse_poly_text(std::string_view text, int n) {
  if (n < 1) throw ShapeError("parse_poly: number of variables must be positive");
  Polynomial p(n);
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = detail::strip_comment(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected '<coeff>: exponents' or 'name: ...'", line_no);
    const std::string_view head = detail::trim(line.substr(0, colon)), rest = detail::trim(line.substr(colon + 1));
    if (head == "name") {
      const auto toks = detail::split_ws(rest);
      if (toks.empty()) throw ParseError("missing polynomial name", line_no);
      try {
        if (toks[0] == "vandermonde" && toks.size() == 1) {
          p += vandermonde(n);
        } else if (toks[0] == "powersum" && toks.size() == 2) {
          const int d = detail::parse_int(toks[1], line_no, "powersum degree");
          if (d < 0) throw ParseError("powersum degree must be >= 0", line_no);
          p += power_sum(n, d);
        } else {
          throw ParseError("unknown polynomial form '" + std::string(rest) + "'", line_no);
        }
      } catch (const ShapeError& e) {
        throw ParseError(e.what(), line_no);
      } catch (const CapExceeded& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    const double c = detail::parse_double(head, line_no);
    const auto toks = detail::split_ws(rest);
    if (static_cast<int>(toks.size()) != n)
      throw ParseError("exponent vector has " + std::to_string(toks.size()) + " entries, expected " + std::to_string(n), line_no);
    Monomial m;
    for (auto t : toks) {
      m.push_back(detail::parse_int(t, line_no, "an exponent"));
      if (m.back() < 0) throw ParseError("negative exponent", line_no);
    }
    p.add_term(std::move(m), c);
  }
  return p;
}

inline Polynomial parse_poly_file(const std::string& path, int n) { return parse_poly_text(detail::read_file(path), n); }

/// One `<coeff>: exponents` line per term; coefficients round-trip exactly.
inline std::string write_poly(const Polynomial& p) {
  std::string out;
  char buf[64];
  for (const auto& [m, c] : p.terms()) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, c);
    out.append(buf, end);
    out += ":";
    for (int e : m) out += " " + std::to_string(e);
    out += "\n";
  }
  return out;
}

}  // namespace ginet
