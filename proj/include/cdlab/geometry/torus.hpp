#pragma once

#include "cdlab/geometry/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace cdlab {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// One Fourier term c * exp(2 pi i m.x) added to the matrix entry h_{j kbar} (0-based j, k).
struct MetricTerm {
  int j = 0;
  int k = 0;
  std::vector<int> mode;
  cd amplitude;
};

// Complex torus C^n / (Z + iZ)^n with h = I + sum of the Fourier terms.
struct TorusHermitianStructure {
  int n = 1;
  int band_limit = 0;
  std::vector<MetricTerm> terms;

  static TorusHermitianStructure flat(int n) {
    TorusHermitianStructure s;
    s.n = n;
    return s;
  }

  void add_term(int j, int k, std::vector<int> mode, cd amp) {
    terms.push_back({j, k, std::move(mode), amp});
  }
  // Adds c e^{2 pi i m.x} to h_{jk} together with the Hermitian partner.
  void add_hermitian_pair(int j, int k, const std::vector<int>& mode, cd amp) {
    add_term(j, k, mode, amp);
    std::vector<int> neg(mode.size());
    for (std::size_t a = 0; a < mode.size(); ++a) neg[a] = -mode[a];
    add_term(k, j, neg, std::conj(amp));
  }

  bool is_flat() const {
    for (const auto& t : terms)
      if (std::abs(t.amplitude) != 0.0) return false;
    return true;
  }

  // Throws std::invalid_argument if h is not Hermitian-valued or exceeds the declared band.
  void validate() const {
    std::map<std::tuple<int, int, std::vector<int>>, cd> acc;
    for (const auto& t : terms) {
      if (t.j < 0 || t.j >= n || t.k < 0 || t.k >= n) throw std::invalid_argument("metric term index out of range");
      if (static_cast<int>(t.mode.size()) != 2 * n) throw std::invalid_argument("metric term mode vector must have 2n entries");
      for (int m : t.mode)
        if (std::abs(m) > band_limit) throw std::invalid_argument("metric term exceeds band_limit");
      acc[{t.j, t.k, t.mode}] += t.amplitude;
    }
    for (const auto& [key, c] : acc) {
      const auto& [j, k, mode] = key;
      std::vector<int> neg(mode.size());
      for (std::size_t a = 0; a < mode.size(); ++a) neg[a] = -mode[a];
      auto it = acc.find({k, j, neg});
      const cd partner = it == acc.end() ? cd(0) : it->second;
      if (std::abs(partner - std::conj(c)) > 1e-14 * (1 + std::abs(c)))
        throw std::invalid_argument("metric Fourier data is not Hermitian-symmetric");
    }
  }

  // h(x) at an arbitrary point.
  Eigen::MatrixXcd evaluate(const std::vector<double>& x) const {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(n, n);
    for (const auto& t : terms) {
      double ph = 0;
      for (int a = 0; a < 2 * n; ++a) ph += t.mode[a] * x[a];
      h(t.j, t.k) += t.amplitude * std::polar(1.0, 2 * M_PI * ph);
    }
    return h;
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "n = " << n << "\nband_limit = " << band_limit << "\n";
    for (const auto& t : terms) {
      os << "term = " << t.j + 1 << " " << t.k + 1;
      for (int m : t.mode) os << " " << m;
      os << " " << t.amplitude.real() << " " << t.amplitude.imag() << "\n";
    }
    return os.str();
  }
};

// Strict parser: `key = value` lines, `#` comments, keys n, band_limit, term (repeatable).
inline TorusHermitianStructure parse_manifold(std::istream& in) {
  TorusHermitianStructure s;
  bool have_n = false, have_band = false;
  struct Pending {
    int line;
    std::vector<std::string> tok;
  };
  std::vector<Pending> pending;
  std::string raw;
  int lineno = 0;
  auto to_int = [](const std::string& t, int line, const std::string& what) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(t, &pos);
    } catch (...) {
      throw ParseError(line, "expected integer for " + what + ", got '" + t + "'");
    }
    if (pos != t.size()) throw ParseError(line, "expected integer for " + what + ", got '" + t + "'");
    return v;
  };
  auto to_double = [](const std::string& t, int line, const std::string& what) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(t, &pos);
    } catch (...) {
      throw ParseError(line, "expected number for " + what + ", got '" + t + "'");
    }
    if (pos != t.size() || !std::isfinite(v)) throw ParseError(line, "expected number for " + what + ", got '" + t + "'");
    return v;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    std::istringstream ks(line.substr(0, eq));
    std::string key, extra;
    ks >> key;
    if (key.empty() || (ks >> extra)) throw ParseError(lineno, "malformed key");
    std::istringstream vs(line.substr(eq + 1));
    std::vector<std::string> tok;
    for (std::string t; vs >> t;) tok.push_back(t);
    if (tok.empty()) throw ParseError(lineno, "missing value for '" + key + "'");
    if (key == "n") {
      if (have_n) throw ParseError(lineno, "duplicate key 'n'");
      if (tok.size() != 1) throw ParseError(lineno, "'n' takes one integer");
      s.n = to_int(tok[0], lineno, "n");
      if (s.n < 1 || s.n > 4) throw ParseError(lineno, "'n' must be between 1 and 4");
      have_n = true;
    } else if (key == "band_limit") {
      if (have_band) throw ParseError(lineno, "duplicate key 'band_limit'");
      if (tok.size() != 1) throw ParseError(lineno, "'band_limit' takes one integer");
      s.band_limit = to_int(tok[0], lineno, "band_limit");
      if (s.band_limit < 0) throw ParseError(lineno, "'band_limit' must be non-negative");
      have_band = true;
    } else if (key == "term") {
      pending.push_back({lineno, tok});
    } else {
      throw ParseError(lineno, "unknown key '" + key + "'");
    }
  }
  if (!have_n) throw ParseError(lineno, "missing required key 'n'");
  if (!have_band) throw ParseError(lineno, "missing required key 'band_limit'");
  for (const auto& p : pending) {
    const std::size_t want = 2 + 2 * static_cast<std::size_t>(s.n) + 2;
    if (p.tok.size() != want)
      throw ParseError(p.line, "'term' expects j k, " + std::to_string(2 * s.n) + " mode integers, re im");
    MetricTerm t;
    t.j = to_int(p.tok[0], p.line, "j") - 1;
    t.k = to_int(p.tok[1], p.line, "k") - 1;
    if (t.j < 0 || t.j >= s.n || t.k < 0 || t.k >= s.n) throw ParseError(p.line, "term index out of range 1..n");
    for (int a = 0; a < 2 * s.n; ++a) {
      t.mode.push_back(to_int(p.tok[2 + a], p.line, "mode"));
      if (std::abs(t.mode.back()) > s.band_limit) throw ParseError(p.line, "mode exceeds band_limit");
    }
    t.amplitude = cd(to_double(p.tok[2 + 2 * s.n], p.line, "re"), to_double(p.tok[3 + 2 * s.n], p.line, "im"));
    s.terms.push_back(std::move(t));
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
  return s;
}

inline TorusHermitianStructure parse_manifold_string(const std::string& text) {
  std::istringstream is(text);
  return parse_manifold(is);
}

inline TorusHermitianStructure load_manifold(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifold file '" + path + "'");
  return parse_manifold(f);
}

// Built-in examples used by tests and acceptance.
namespace examples {

// h = [[1, f], [f, 1 + f^2]] with f = a cos(2 pi x_3): unipotent Gram-Schmidt frame, constant volume, non-Kahler.
inline TorusHermitianStructure nonkahler_unipotent(double a = 0.1) {
  TorusHermitianStructure s;
  s.n = 2;
  s.band_limit = 2;
  const std::vector<int> m2{0, 0, 2, 0}, m0{0, 0, 0, 0};
  // f = a/2 (e^{2pi i x3} + e^{-2pi i x3}) in h_{12bar} and h_{21bar}
  for (int sgn : {1, -1}) {
    std::vector<int> m{0, 0, sgn, 0};
    s.add_term(0, 1, m, a / 2);
    s.add_term(1, 0, m, a / 2);
  }
  // f^2 = a^2/2 + a^2/4 (e^{4 pi i x3} + e^{-4 pi i x3})
  s.add_term(1, 1, m0, a * a / 2);
  s.add_term(1, 1, m2, a * a / 4);
  s.add_term(1, 1, {0, 0, -2, 0}, a * a / 4);
  return s;
}

// h_{1 1bar} = 1 + a cos(2 pi x_3): diagonal conformal factor depending on z_2, non-Kahler.
inline TorusHermitianStructure nonkahler_diagonal(double a = 0.1) {
  TorusHermitianStructure s;
  s.n = 2;
  s.band_limit = 1;
  s.add_term(0, 0, {0, 0, 1, 0}, a / 2);
  s.add_term(0, 0, {0, 0, -1, 0}, a / 2);
  return s;
}

// Kahler: h_{1 1bar} = 1 + a cos(2 pi x_1) on n = 2 (depends only on Re z_1).
inline TorusHermitianStructure kahler_diagonal(double a = 0.1) {
  TorusHermitianStructure s;
  s.n = 2;
  s.band_limit = 1;
  s.add_term(0, 0, {1, 0, 0, 0}, a / 2);
  s.add_term(0, 0, {-1, 0, 0, 0}, a / 2);
  return s;
}

}  // namespace examples

}  // namespace cdlab
