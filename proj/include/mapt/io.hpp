#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapt/model.hpp"

namespace mapt {

namespace detail {

inline std::vector<std::string> tokenize(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> tokens;
  std::string t;
  while (is >> t) tokens.push_back(t);
  return tokens;
}

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : tokens_(tokenize(text)) {}

  bool done() const { return pos_ >= tokens_.size(); }

  const std::string& next(const char* what) {
    if (done())
      throw std::invalid_argument(std::string("unexpected end of input: expected ") + what);
    return tokens_[pos_++];
  }
  long integer(const char* what) {
    const std::string& t = next(what);
    size_t used = 0;
    long v;
    try {
      v = std::stol(t, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("expected integer for ") + what + ", got '" + t + "'");
    }
    if (used != t.size())
      throw std::invalid_argument(std::string("expected integer for ") + what + ", got '" + t + "'");
    return v;
  }
  double real(const char* what) {
    const std::string& t = next(what);
    size_t used = 0;
    double v;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("expected number for ") + what + ", got '" + t + "'");
    }
    if (used != t.size())
      throw std::invalid_argument(std::string("expected number for ") + what + ", got '" + t + "'");
    return v;
  }

 private:
  std::vector<std::string> tokens_;
  size_t pos_ = 0;
};

}  // namespace detail

// UAI MARKOV reader for unary/pairwise networks. Table values are
// potentials of a product to maximize; costs are -ln(value), with
// values <= 1e-300 clamped to cost 700.
inline Relaxation parse_uai(const std::string& text) {
  detail::TokenReader in(text);
  if (in.next("network type") != "MARKOV")
    throw std::invalid_argument("unsupported network type (expected MARKOV)");
  const int n = static_cast<int>(in.integer("variable count"));
  if (n < 1) throw std::invalid_argument("malformed variable count");
  std::vector<int> domains(n);
  for (int v = 0; v < n; ++v) {
    domains[v] = static_cast<int>(in.integer("domain size"));
    if (domains[v] < 1) throw std::invalid_argument("malformed domain size");
  }
  const int nf = static_cast<int>(in.integer("factor count"));
  if (nf < 0) throw std::invalid_argument("malformed factor count");
  std::vector<std::vector<int>> scopes(nf);
  for (int f = 0; f < nf; ++f) {
    const int arity = static_cast<int>(in.integer("factor arity"));
    if (arity < 1) throw std::invalid_argument("malformed factor arity");
    for (int k = 0; k < arity; ++k) {
      int v = static_cast<int>(in.integer("scope variable"));
      if (v < 0 || v >= n)
        throw std::invalid_argument("scope variable out of range");
      scopes[f].push_back(v);
    }
    if (arity > 2) {
      std::ostringstream os;
      os << "factor arity " << arity << " unsupported (scope";
      for (int v : scopes[f]) os << ' ' << v;
      os << ")";
      throw std::invalid_argument(os.str());
    }
    if (arity == 2 && scopes[f][0] == scopes[f][1])
      throw std::invalid_argument("pairwise factor with repeated variable");
  }
  auto to_cost = [](double value) {
    return value <= 1e-300 ? 700.0 : -std::log(value);
  };
  std::vector<std::vector<double>> unary(n);
  for (int v = 0; v < n; ++v) unary[v].assign(domains[v], 0.0);
  // keyed by (min(u,v), max(u,v)); tables stored in that order
  std::map<std::pair<int, int>, std::vector<double>> pairs;
  for (int f = 0; f < nf; ++f) {
    long size = in.integer("table size");
    long expected = 1;
    for (int v : scopes[f]) expected *= domains[v];
    if (size != expected)
      throw std::invalid_argument("table size does not match scope");
    std::vector<double> table(size);
    for (long i = 0; i < size; ++i)
      table[i] = to_cost(in.real("table value"));
    if (scopes[f].size() == 1) {
      auto& u = unary[scopes[f][0]];
      for (long i = 0; i < size; ++i) u[i] += table[i];
    } else {
      int u = scopes[f][0], v = scopes[f][1];
      if (u > v) {
        // transpose into ascending variable order
        std::vector<double> t(table.size());
        for (int a = 0; a < domains[u]; ++a)
          for (int b = 0; b < domains[v]; ++b)
            t[b * domains[u] + a] = table[a * domains[v] + b];
        table = std::move(t);
        std::swap(u, v);
      }
      auto [it, fresh] = pairs.try_emplace(std::make_pair(u, v), std::move(table));
      if (!fresh)
        for (size_t i = 0; i < it->second.size(); ++i) it->second[i] += table[i];
    }
  }
  std::vector<std::tuple<int, int, std::vector<double>>> pairwise;
  for (auto& [key, table] : pairs)
    pairwise.emplace_back(key.first, key.second, std::move(table));
  return build_model(domains, unary, pairwise);
}

// Native line format:
//   vars N
//   domains d_1 ... d_N
//   var v  c_1 ... c_{d_v}          (one line per variable)
//   edge u v                        (costs follow, d_u rows of d_v values)
inline Relaxation parse_native(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> std::invalid_argument {
    std::ostringstream os;
    os << "line " << lineno << ": " << what;
    return std::invalid_argument(os.str());
  };
  auto next_content = [&](std::istringstream& out) {
    while (std::getline(is, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (line[line.find_first_not_of(" \t\r")] == '#') continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  };
  std::istringstream ls;
  if (!next_content(ls)) throw std::invalid_argument("empty input");
  std::string kw;
  int n = 0;
  if (!(ls >> kw >> n) || kw != "vars" || n < 1)
    throw fail("expected 'vars N'");
  if (!next_content(ls)) throw fail("expected 'domains' line");
  std::vector<int> domains(n);
  if (!(ls >> kw) || kw != "domains") throw fail("expected 'domains' line");
  for (int v = 0; v < n; ++v)
    if (!(ls >> domains[v]) || domains[v] < 1) throw fail("bad domain size");
  std::vector<std::vector<double>> unary(n);
  std::vector<std::tuple<int, int, std::vector<double>>> pairwise;
  std::vector<char> have_unary(n, 0);
  while (next_content(ls)) {
    if (!(ls >> kw)) throw fail("expected 'var' or 'edge'");
    if (kw == "var") {
      int v;
      if (!(ls >> v) || v < 0 || v >= n) throw fail("bad variable id");
      if (have_unary[v]) throw fail("duplicate unary block");
      have_unary[v] = 1;
      unary[v].resize(domains[v]);
      for (int a = 0; a < domains[v]; ++a)
        if (!(ls >> unary[v][a])) throw fail("missing unary cost");
    } else if (kw == "edge") {
      int u, v;
      if (!(ls >> u >> v) || u < 0 || v < 0 || u >= n || v >= n || u == v)
        throw fail("bad edge variables");
      std::vector<double> table(static_cast<size_t>(domains[u]) * domains[v]);
      for (int a = 0; a < domains[u]; ++a) {
        std::istringstream row;
        if (!next_content(row)) throw fail("missing edge cost row");
        for (int b = 0; b < domains[v]; ++b)
          if (!(row >> table[a * domains[v] + b]))
            throw fail("missing edge cost value");
      }
      pairwise.emplace_back(u, v, std::move(table));
    } else {
      throw fail("unknown keyword '" + kw + "'");
    }
  }
  for (int v = 0; v < n; ++v)
    if (!have_unary[v]) unary[v].assign(domains[v], 0.0);
  return build_model(domains, unary, pairwise);
}

inline std::string serialize_native(const Relaxation& m) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  os << "vars " << m.num_vars() << "\n";
  os << "domains";
  for (int d : m.domain_sizes) os << ' ' << d;
  os << "\n";
  for (int v = 0; v < m.num_vars(); ++v) {
    os << "var " << v;
    for (double c : m.factors[v].costs) os << ' ' << num(c);
    os << "\n";
  }
  for (int fid : m.pair_factor_ids()) {
    const Factor& f = m.factors[fid];
    const int du = m.domain_sizes[f.scope[0]], dv = m.domain_sizes[f.scope[1]];
    os << "edge " << f.scope[0] << ' ' << f.scope[1] << "\n";
    for (int a = 0; a < du; ++a) {
      for (int b = 0; b < dv; ++b)
        os << (b ? " " : "") << num(f.costs[a * dv + b]);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace mapt
