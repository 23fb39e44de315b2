#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/weaklimit.hpp"

namespace qwalk {

/// Asymptotic coin of one side in (a, alpha, beta, delta) coordinates, radians.
struct CoinParams {
  double a = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;

  bool operator==(const CoinParams&) const = default;
};

struct TailSpec {
  double epsilon = 1.0;
  double kappa = 2.0;
  Mat2 perturbation = Mat2::Zero();

  bool operator==(const TailSpec&) const = default;
};

/// Everything a CLI run needs. Text form, one `key = value` per line:
///
///   left.a, left.alpha, left.beta, left.delta     asymptotic coin for x < 0
///   right.a, right.alpha, right.beta, right.delta asymptotic coin for x >= 0
///   coin.*                                        shorthand setting both sides
///   override.<x> = (re,im) (re,im) (re,im) (re,im) site coin, row-major
///   tail.<side>.epsilon / .kappa / .perturbation  algebraic tail rule
///   state.<x> = (re,im) (re,im)                   initial amplitudes at site x
///   state.random = <width>                        seeded random state on [-width/2, width/2]
///   n, n_list, n_min, n_max, tol, nodes, horizon, radius, gate, mass_tol,
///   k_grid, guard_band, seed                      command parameters
///
/// `#` starts a comment. Angles are radians.
struct RunConfig {
  CoinParams left;
  CoinParams right;
  std::map<long, Mat2> overrides;
  std::map<std::string, TailSpec> tails;  ///< keyed by "left" / "right"
  std::map<long, Spinor> state;
  long random_width = 0;

  long n = 100;
  std::vector<long> n_list{250, 500, 1000, 2000};
  long n_min = 256;
  long n_max = 4096;
  double tol = 5e-2;
  std::size_t nodes = kDefaultNodesPerHalf;
  long horizon = 2048;
  long radius = 10;
  double gate = 5e-2;
  double mass_tol = 1e-2;
  std::size_t k_grid = 256;
  double guard_band = 0.02;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& text, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim_copy(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("expected a real number, got '" + text + "'", path);
}

inline long parse_integer(const std::string& text, const std::string& path) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (trim_copy(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("expected an integer, got '" + text + "'", path);
}

// Parses whitespace-separated "(re,im)" tokens.
inline std::vector<cplx> parse_complex_list(const std::string& text, const std::string& path) {
  std::vector<cplx> out;
  std::size_t pos = 0;
  while (true) {
    pos = text.find_first_not_of(" \t", pos);
    if (pos == std::string::npos) break;
    if (text[pos] != '(') throw ParseError("expected '(' in complex list '" + text + "'", path);
    const auto comma = text.find(',', pos);
    const auto close = text.find(')', pos);
    if (comma == std::string::npos || close == std::string::npos || comma > close)
      throw ParseError("malformed complex number in '" + text + "'", path);
    out.emplace_back(parse_real(text.substr(pos + 1, comma - pos - 1), path),
                     parse_real(text.substr(comma + 1, close - comma - 1), path));
    pos = close + 1;
  }
  return out;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_complex(cplx z) { return "(" + format_real(z.real()) + "," + format_real(z.imag()) + ")"; }

inline Mat2 parse_matrix(const std::string& text, const std::string& path) {
  const auto z = parse_complex_list(text, path);
  if (z.size() != 4) throw ParseError("a 2x2 matrix needs 4 complex entries", path);
  Mat2 m;
  m << z[0], z[1], z[2], z[3];
  return m;
}

inline std::string format_matrix(const Mat2& m) {
  return format_complex(m(0, 0)) + " " + format_complex(m(0, 1)) + " " + format_complex(m(1, 0)) + " " +
         format_complex(m(1, 1));
}

inline void set_coin_field(CoinParams& c, const std::string& field, const std::string& value,
                           const std::string& path) {
  const double v = parse_real(value, path);
  if (field == "a") c.a = v;
  else if (field == "alpha") c.alpha = v;
  else if (field == "beta") c.beta = v;
  else if (field == "delta") c.delta = v;
  else throw ParseError("unknown coin parameter '" + field + "'", path);
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'", "line." + std::to_string(lineno));
    const std::string key = detail::trim_copy(line.substr(0, eq));
    const std::string value = detail::trim_copy(line.substr(eq + 1));
    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    const std::string rest = dot == std::string::npos ? std::string{} : key.substr(dot + 1);

    if (head == "left" || head == "right" || head == "coin") {
      if (head != "right") detail::set_coin_field(cfg.left, rest, value, key);
      if (head != "left") detail::set_coin_field(cfg.right, rest, value, key);
    } else if (head == "override") {
      cfg.overrides[detail::parse_integer(rest, key)] = detail::parse_matrix(value, key);
    } else if (head == "tail") {
      const auto d2 = rest.find('.');
      const std::string side = rest.substr(0, d2);
      const std::string field = d2 == std::string::npos ? std::string{} : rest.substr(d2 + 1);
      if (side != "left" && side != "right") throw ParseError("tail side must be left or right", key);
      TailSpec& t = cfg.tails[side];
      if (field == "epsilon") t.epsilon = detail::parse_real(value, key);
      else if (field == "kappa") t.kappa = detail::parse_real(value, key);
      else if (field == "perturbation") t.perturbation = detail::parse_matrix(value, key);
      else throw ParseError("unknown tail parameter '" + field + "'", key);
    } else if (head == "state") {
      if (rest == "random") {
        cfg.random_width = detail::parse_integer(value, key);
      } else {
        const auto z = detail::parse_complex_list(value, key);
        if (z.size() != 2) throw ParseError("a spinor needs 2 complex entries", key);
        cfg.state[detail::parse_integer(rest, key)] = Spinor(z[0], z[1]);
      }
    } else if (key == "n") {
      cfg.n = detail::parse_integer(value, key);
    } else if (key == "n_list") {
      cfg.n_list.clear();
      std::istringstream items(value);
      std::string item;
      while (items >> item) cfg.n_list.push_back(detail::parse_integer(item, key));
    } else if (key == "n_min") {
      cfg.n_min = detail::parse_integer(value, key);
    } else if (key == "n_max") {
      cfg.n_max = detail::parse_integer(value, key);
    } else if (key == "tol") {
      cfg.tol = detail::parse_real(value, key);
    } else if (key == "nodes") {
      cfg.nodes = static_cast<std::size_t>(detail::parse_integer(value, key));
    } else if (key == "horizon") {
      cfg.horizon = detail::parse_integer(value, key);
    } else if (key == "radius") {
      cfg.radius = detail::parse_integer(value, key);
    } else if (key == "gate") {
      cfg.gate = detail::parse_real(value, key);
    } else if (key == "mass_tol") {
      cfg.mass_tol = detail::parse_real(value, key);
    } else if (key == "k_grid") {
      cfg.k_grid = static_cast<std::size_t>(detail::parse_integer(value, key));
    } else if (key == "guard_band") {
      cfg.guard_band = detail::parse_real(value, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::parse_integer(value, key));
    } else {
      throw ParseError("unknown key '" + key + "'", key);
    }
  }
  return cfg;
}

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  using detail::format_real;
  for (const auto& [name, p] : {std::pair{"left", c.left}, std::pair{"right", c.right}}) {
    os << name << ".a = " << format_real(p.a) << "\n";
    os << name << ".alpha = " << format_real(p.alpha) << "\n";
    os << name << ".beta = " << format_real(p.beta) << "\n";
    os << name << ".delta = " << format_real(p.delta) << "\n";
  }
  for (const auto& [x, m] : c.overrides) os << "override." << x << " = " << detail::format_matrix(m) << "\n";
  for (const auto& [side, t] : c.tails) {
    os << "tail." << side << ".epsilon = " << format_real(t.epsilon) << "\n";
    os << "tail." << side << ".kappa = " << format_real(t.kappa) << "\n";
    os << "tail." << side << ".perturbation = " << detail::format_matrix(t.perturbation) << "\n";
  }
  for (const auto& [x, s] : c.state)
    os << "state." << x << " = " << detail::format_complex(s(0)) << " " << detail::format_complex(s(1)) << "\n";
  if (c.random_width > 0) os << "state.random = " << c.random_width << "\n";
  os << "n = " << c.n << "\n";
  os << "n_list =";
  for (long v : c.n_list) os << " " << v;
  os << "\n";
  os << "n_min = " << c.n_min << "\n";
  os << "n_max = " << c.n_max << "\n";
  os << "tol = " << format_real(c.tol) << "\n";
  os << "nodes = " << c.nodes << "\n";
  os << "horizon = " << c.horizon << "\n";
  os << "radius = " << c.radius << "\n";
  os << "gate = " << format_real(c.gate) << "\n";
  os << "mass_tol = " << format_real(c.mass_tol) << "\n";
  os << "k_grid = " << c.k_grid << "\n";
  os << "guard_band = " << format_real(c.guard_band) << "\n";
  os << "seed = " << c.seed << "\n";
  return os.str();
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", "config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Checks ranges that the parser cannot: positive tolerances, Gauss grid sizes
/// of the form 2^k + 1, ordered schedules.
inline void validate_config(const RunConfig& c) {
  for (const auto& [path, v] : {std::pair{"tol", c.tol}, std::pair{"gate", c.gate},
                                std::pair{"mass_tol", c.mass_tol}, std::pair{"guard_band", c.guard_band}})
    if (!(v > 0.0)) throw ValidationError(std::string(path) + " must be positive", path);
  if (c.nodes < 3 || !std::has_single_bit(c.nodes - 1))
    throw ValidationError("nodes must be a power of two plus one", "nodes");
  if (c.n_min < 2 || c.n_max < c.n_min) throw ValidationError("need 2 <= n_min <= n_max", "n_max");
  if (c.n < 0) throw ValidationError("n must be nonnegative", "n");
  if (c.horizon < 2) throw ValidationError("horizon must be at least 2", "horizon");
  if (c.radius < 0) throw ValidationError("radius must be nonnegative", "radius");
  if (c.k_grid < 1) throw ValidationError("k_grid must be positive", "k_grid");
  for (std::size_t i = 0; i < c.n_list.size(); ++i)
    if (c.n_list[i] < 1 || (i > 0 && c.n_list[i] <= c.n_list[i - 1]))
      throw ValidationError("n_list must be positive and increasing", "n_list");
}

namespace detail {

inline CoinMatrix build_coin(const CoinParams& p, const std::string& side) {
  try {
    return coin_from_params(p.a, p.alpha, p.beta, p.delta);
  } catch (const DomainError& e) {
    throw DomainError(e.what(), side + ".a");
  }
}

}  // namespace detail

inline CoinField build_field(const RunConfig& c) {
  CoinField f(detail::build_coin(c.left, "left"), detail::build_coin(c.right, "right"));
  for (const auto& [x, m] : c.overrides) f = f.with_override(x, m);
  for (const auto& [side, t] : c.tails)
    f = f.with_tail(side == "left" ? Side::left : Side::right, TailRule{t.epsilon, t.kappa, t.perturbation});
  return f;
}

/// Initial state, normalized. Warns on stderr when normalization changes the
/// norm by more than 1e-8.
inline LatticeState build_state(const RunConfig& c, std::ostream& warn = std::cerr) {
  LatticeState s;
  if (c.random_width > 0) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> g;
    const long half = c.random_width / 2;
    s = LatticeState::zeros(-half, c.random_width - 1 - half);
    for (auto& v : s.amplitudes()) v = Spinor(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
  } else {
    std::vector<std::pair<long, Spinor>> entries(c.state.begin(), c.state.end());
    s = LatticeState::from_entries(entries);
  }
  const double norm = s.norm();
  if (!(norm > 0.0)) throw ValidationError("initial state is zero", "state");
  if (std::abs(norm - 1.0) > 1e-8) warn << "warning: initial state renormalized (norm was " << norm << ")\n";
  s *= cplx(1.0 / norm);
  return s;
}

inline Schedule build_schedule(const RunConfig& c) {
  Schedule s;
  s.n_min = c.n_min;
  s.n_max = c.n_max;
  s.tol = c.tol;
  return s;
}

inline LimitOptions build_limit_options(const RunConfig& c) {
  LimitOptions o;
  o.nodes_per_half = c.nodes;
  o.mass_tol = c.mass_tol;
  o.pure_point.horizon = c.horizon;
  o.pure_point.radius = c.radius;
  o.pure_point.gate = c.gate;
  o.pure_point.schedule = build_schedule(c);
  return o;
}

}  // namespace qwalk
