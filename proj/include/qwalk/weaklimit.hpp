#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/konno.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Real samples w(v) on a half grid; `grid.weight` carries f_K/2 dv.
using VelocityWeightSamples = VelocitySamples<double>;

/// mu_V = kappa_0 delta_0 + kappa_l delta_{-1} + kappa_r delta_1
///        + w_l f_K(., a_l)/2 dv on [-a_l, 0) + w_r f_K(., a_r)/2 dv on (0, a_r].
struct LimitDistribution {
  double kappa0 = 0.0;
  double kappa_l = 0.0;
  double kappa_r = 0.0;
  std::optional<VelocityWeightSamples> density_l;
  std::optional<VelocityWeightSamples> density_r;

  CoinMatrix coin_l;
  CoinMatrix coin_r;
  std::uint64_t psi_hash = 0;
  ConvergenceReport report_l;
  ConvergenceReport report_r;
  double time_average = 0.0;  ///< localized-mass cross-check of kappa0

  const std::optional<VelocityWeightSamples>& density(Side s) const {
    return s == Side::left ? density_l : density_r;
  }
  double kappa(Side s) const { return s == Side::left ? kappa_l : kappa_r; }

  double density_mass(Side s) const { return density(s) ? density(s)->integral() : 0.0; }

  double total_mass() const {
    return kappa0 + kappa_l + kappa_r + density_mass(Side::left) + density_mass(Side::right);
  }
};

/// FNV-1a over the raw amplitudes and offset; identifies the initial state in reports.
inline std::uint64_t state_hash(const LatticeState& s) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const long off = s.offset();
  mix(&off, sizeof off);
  for (const auto& v : s.amplitudes()) mix(v.data(), sizeof(cplx) * 2);
  return h;
}

struct LimitOptions {
  std::size_t nodes_per_half = kDefaultNodesPerHalf;
  PurePointOptions pure_point{};
  double mass_tol = 1e-2;
  bool require_convergence = true;
  bool check_estimators = true;
};

/// w_*(v) = sum_{j,m} |(K_{*,j,m} Phi_*)(v)|^2 on the velocity half of side s.
inline VelocityWeightSamples outgoing_density(const LatticeState& phi, const CoinMatrix& c, Side s,
                                              std::size_t nodes_per_half) {
  const VelocityGrid grid = VelocityGrid::half(c.a, s, nodes_per_half);
  VelocityWeightSamples w{grid, std::vector<double>(grid.size(), 0.0), s};
  for (Branch j : kBranches) {
    for (HalfPeriod m : kHalfPeriods) {
      const VelocityDensitySamples k = apply_K(phi, c, j, m, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) w.values[i] += std::norm(k.values[i]);
    }
  }
  return w;
}

inline LimitDistribution limit_distribution(const LatticeState& psi_in, const CoinField& field,
                                            const LimitOptions& opt = {}) {
  if (std::abs(psi_in.norm_squared() - 1.0) > 1e-10)
    throw DomainError("initial state must be normalized", "state");
  PurePointOptions ppo = opt.pure_point;
  if (!opt.check_estimators) ppo.gate = std::numeric_limits<double>::infinity();
  const PurePointReport pp = pure_point_mass(psi_in, field, ppo);

  LimitDistribution d;
  d.coin_l = field.left();
  d.coin_r = field.right();
  d.psi_hash = state_hash(psi_in);
  d.report_l = pp.reports[0];
  d.report_r = pp.reports[1];
  d.kappa0 = pp.kappa0;
  d.time_average = pp.time_average;
  for (Side s : kSides) {
    const CoinMatrix& c = field.asymptotic(s);
    const ConvergenceReport& rep = s == Side::left ? d.report_l : d.report_r;
    if (opt.require_convergence && !rep.converged) {
      std::ostringstream os;
      os << "outgoing state on the " << to_string(s) << " did not converge by n = " << rep.final_n
         << " (last increment " << rep.last_increment() << ")";
      throw ConvergenceError(os.str());
    }
    if (c.a <= kDegenerateTol) continue;
    if (c.b <= kDegenerateTol) {
      (s == Side::left ? d.kappa_l : d.kappa_r) = pp.mass(s);
      continue;
    }
    (s == Side::left ? d.density_l : d.density_r) = outgoing_density(pp.phi(s), c, s, opt.nodes_per_half);
  }
  const double total = d.total_mass();
  if (std::abs(total - 1.0) > opt.mass_tol) {
    std::ostringstream os;
    os << "limit distribution carries mass " << total << " (tolerance " << opt.mass_tol << ")";
    throw MassDefectError(os.str());
  }
  return d;
}

namespace detail {

// Integral of the density of one side over (-inf, v], linear in theta inside
// each quadrature cell.
inline double partial_density_mass(const VelocityWeightSamples& w, double v) {
  const VelocityGrid& g = w.grid;
  const std::size_t n = g.size();
  if (n == 0) return 0.0;
  const double lo = w.side == Side::left ? -0.5 * pi : 0.0;
  const double hi = lo + 0.5 * pi;
  const double t = v <= -g.a ? -0.5 * pi : v >= g.a ? 0.5 * pi : std::asin(v / g.a);
  if (t <= lo) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i == 0 ? lo : 0.5 * (g.theta[i - 1] + g.theta[i]);
    const double b = i + 1 == n ? hi : 0.5 * (g.theta[i] + g.theta[i + 1]);
    const double cell = g.weight[i] * w.values[i];
    if (t >= b) {
      acc += cell;
    } else {
      if (t > a) acc += cell * (t - a) / (b - a);
      break;
    }
  }
  return acc;
}

}  // namespace detail

/// mu_V((-inf, v]).
inline double cdf(const LimitDistribution& d, double v) {
  double s = 0.0;
  if (v >= -1.0) s += d.kappa_l;
  if (v >= 0.0) s += d.kappa0;
  if (v >= 1.0) s += d.kappa_r;
  for (Side side : kSides)
    if (d.density(side)) s += detail::partial_density_mass(*d.density(side), v);
  return s;
}

/// int v^p mu_V(dv) for 1 <= p <= 8.
inline double moment(const LimitDistribution& d, int p) {
  if (p < 1 || p > 8) throw DomainError("moment order must lie in [1, 8]", "p");
  double s = d.kappa_l * std::pow(-1.0, p) + d.kappa_r;
  for (Side side : kSides) {
    if (!d.density(side)) continue;
    const auto& w = *d.density(side);
    for (std::size_t i = 0; i < w.values.size(); ++i)
      s += w.grid.weight[i] * w.values[i] * std::pow(w.grid.upsilon[i], p);
  }
  return s;
}

/// E(exp(i xi V)).
inline cplx cf_limit(const LimitDistribution& d, double xi) {
  cplx s = d.kappa0 + d.kappa_l * std::polar(1.0, -xi) + d.kappa_r * std::polar(1.0, xi);
  for (Side side : kSides) {
    if (!d.density(side)) continue;
    const auto& w = *d.density(side);
    for (std::size_t i = 0; i < w.values.size(); ++i)
      s += w.grid.weight[i] * w.values[i] * std::polar(1.0, xi * w.grid.upsilon[i]);
  }
  return s;
}

struct ComparisonRow {
  long n = 0;
  double kolmogorov = 0.0;
  double mean_n = 0.0;
  double mean_limit = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double guard_band = 0.02;
  /// Distances do not increase (beyond `trend_slack`) over the second half of the n list.
  bool nonincreasing_tail = true;
};

struct ComparisonOptions {
  double guard_band = 0.02;
  double trend_slack = 2e-3;
  std::size_t max_window = kDefaultMaxWindow;
};

/// Uniform velocity grid on [lo, hi] with `points` nodes.
inline std::vector<double> uniform_velocity_grid(double lo = -1.1, double hi = 1.1, std::size_t points = 2201) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

/// Kolmogorov distance between the law of X_n / n and mu_V for each n,
/// measured on v_grid away from the atoms -1, 0, 1.
inline ComparisonReport compare_empirical(const LatticeState& psi_in, const CoinField& field,
                                          const LimitDistribution& dist, const std::vector<long>& n_list,
                                          const std::vector<double>& v_grid,
                                          const ComparisonOptions& opt = {}) {
  if (!std::is_sorted(n_list.begin(), n_list.end()) || (!n_list.empty() && n_list.front() < 1))
    throw DomainError("n_list must be increasing and positive", "n_list");
  ComparisonReport rep;
  rep.guard_band = opt.guard_band;
  std::vector<double> grid;
  for (double v : v_grid) {
    bool near_atom = false;
    for (double atom : {-1.0, 0.0, 1.0}) near_atom |= std::abs(v - atom) <= opt.guard_band;
    if (!near_atom) grid.push_back(v);
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> limit_cdf(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) limit_cdf[i] = cdf(dist, grid[i]);

  Walker w(field, psi_in, opt.max_window);
  for (long n : n_list) {
    w.step(n - w.time());
    const LatticeState& s = w.state();
    ComparisonRow row;
    row.n = n;
    row.mean_limit = moment(dist, 1);
    const double nd = static_cast<double>(n);
    double acc = 0.0;
    std::size_t gi = 0;
    for (long x = s.offset(); x < s.end(); ++x) {
      const double p = s(x).squaredNorm();
      const double v = static_cast<double>(x) / nd;
      while (gi < grid.size() && grid[gi] < v) {
        row.kolmogorov = std::max(row.kolmogorov, std::abs(acc - limit_cdf[gi]));
        ++gi;
      }
      acc += p;
      row.mean_n += p * v;
    }
    for (; gi < grid.size(); ++gi) row.kolmogorov = std::max(row.kolmogorov, std::abs(acc - limit_cdf[gi]));
    rep.rows.push_back(row);
  }
  for (std::size_t i = rep.rows.size() / 2; i + 1 < rep.rows.size(); ++i)
    if (rep.rows[i + 1].kolmogorov > rep.rows[i].kolmogorov + opt.trend_slack) rep.nonincreasing_tail = false;
  return rep;
}

}  // namespace qwalk
