#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// Element (Psi_l, Psi_r) of H_0 = H + H.
struct PairState {
  LatticeState left;
  LatticeState right;

  double norm_squared() const { return left.norm_squared() + right.norm_squared(); }
  double norm() const { return std::sqrt(norm_squared()); }
  const LatticeState& operator[](Side s) const { return s == Side::left ? left : right; }
  LatticeState& operator[](Side s) { return s == Side::left ? left : right; }
};

/// Geometric checkpoints n = n_min, 2 n_min, ..., n_max. The increment at a
/// checkpoint is measured against the previous one; the first checkpoint only
/// seeds the comparison.
struct Schedule {
  long n_min = 256;
  long n_max = 4096;
  double tol = 5e-2;
  std::size_t max_window = kDefaultMaxWindow;

  std::vector<long> checkpoints() const {
    if (n_min < 2 || n_max < n_min) throw DomainError("schedule needs 2 <= n_min <= n_max", "schedule");
    std::vector<long> out;
    for (long n = n_min; n <= n_max; n *= 2) out.push_back(n);
    return out;
  }
};

struct ConvergenceReport {
  /// (n, ||Phi^(n) - Phi^(previous checkpoint)||); the first entry has no predecessor and reports 0.
  std::vector<std::pair<long, double>> iterates;
  long final_n = 0;
  bool converged = false;
  double limit_norm = 0.0;

  double last_increment() const { return iterates.size() < 2 ? 0.0 : iterates.back().second; }
};

/// Indicator j_* of the half-line x < 0 (left) or x >= 0 (right).
inline bool in_region(long x, Side s) { return s == Side::right ? x >= 0 : x < 0; }

/// J(Psi_l, Psi_r) = j_l Psi_l + j_r Psi_r.
inline LatticeState apply_J(const PairState& p) {
  LatticeState out = restrict_to(p.left, Side::left);
  out += restrict_to(p.right, Side::right);
  return out;
}

/// J^* Psi = (j_l Psi, j_r Psi).
inline PairState apply_J_adjoint(const LatticeState& s) {
  return PairState{restrict_to(s, Side::left), restrict_to(s, Side::right)};
}

/// E^{U_0}(Theta) on H_0: a slot whose asymptotic coin has a = 0 carries
/// only pure point spectrum and is projected out; otherwise the slot is kept.
inline PairState project_scattering(PairState p, const CoinField& field) {
  for (Side s : kSides)
    if (field.asymptotic(s).a <= kDegenerateTol) p[s] = LatticeState{};
  return p;
}

/// U^{-n} J U_0^n p, without the spectral projection.
inline LatticeState wave_iterate(const PairState& p, const CoinField& field, long n,
                                 std::size_t max_window = kDefaultMaxWindow) {
  PairState q;
  for (Side s : kSides) {
    if (p[s].empty()) continue;
    q[s] = evolve(p[s], CoinField::homogeneous(field.asymptotic(s)), n, max_window);
  }
  return evolve(apply_J(q), field, -n, max_window);
}

/// Strong limit U^{-n} J U_0^n E^{U_0}(Theta) p, monitored on the schedule.
inline std::pair<LatticeState, ConvergenceReport> wave_forward(const PairState& pair, const CoinField& field,
                                                               const Schedule& schedule = {}) {
  const PairState p = project_scattering(pair, field);
  ConvergenceReport rep;
  LatticeState prev;
  for (long n : schedule.checkpoints()) {
    LatticeState cur = wave_iterate(p, field, n, schedule.max_window);
    rep.iterates.emplace_back(n, rep.iterates.empty() ? 0.0 : distance(cur, prev));
    rep.final_n = n;
    prev = std::move(cur);
    if (rep.iterates.size() > 1 && rep.iterates.back().second < schedule.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.limit_norm = prev.norm();
  return {std::move(prev), rep};
}

namespace detail {

// Adds j_side * src into the walker's state.
inline void add_restricted(Walker& dst, const LatticeState& src, std::pair<long, long> bounds, Side side) {
  long first = bounds.first, last = bounds.second;
  if (side == Side::right) first = std::max(first, 0L);
  else last = std::min(last, -1L);
  if (first > last) return;
  dst.widen_support(first, last);
  LatticeState& d = dst.mutable_state();
  for (long x = first; x <= last; ++x) d.at(x) += src(x);
}

// (2/N) sum_{n=N/2}^{N-1} U_*^{-n} j_* U^n Psi, given U^{N-1} Psi.
inline LatticeState block_mean(const LatticeState& last_iterate, std::pair<long, long> bounds,
                               const CoinField& field, const CoinField& free_field, Side side, long big_n,
                               std::size_t max_window) {
  Walker x(field, last_iterate, max_window);
  Walker r(free_field, LatticeState::zeros(0, 0), max_window);
  x.widen_support(bounds.first, bounds.second);
  add_restricted(r, x.state(), bounds, side);
  for (long n = big_n - 2; n >= big_n / 2; --n) {
    x.step(-1);
    r.step(-1);
    add_restricted(r, x.state(), x.support_bounds(), side);
  }
  r.step(-(big_n / 2));
  LatticeState out = std::move(r).take();
  out *= cplx(2.0 / static_cast<double>(big_n));
  out.trim();
  return out;
}

}  // namespace detail

/// Outgoing state Phi_* = W_+(U, U_*, j_*, Theta)^* Psi_in.
///
/// The raw iterates U_*^{-n} j_* U^n Psi_in keep a non-decaying oscillating
/// contribution from the pure point part of Psi_in, so the limit is taken
/// along block means Phi_N = (2/N) sum_{N/2 <= n < N} U_*^{-n} j_* U^n Psi_in,
/// which converge to the same limit on the continuous part and suppress the
/// pure point part.
inline std::pair<LatticeState, ConvergenceReport> outgoing_state(const LatticeState& psi_in, const CoinField& field,
                                                                 Side side, const Schedule& schedule = {}) {
  ConvergenceReport rep;
  const CoinMatrix& c = field.asymptotic(side);
  if (c.a <= kDegenerateTol || psi_in.empty()) {
    rep.converged = true;
    rep.final_n = 0;
    return {LatticeState{}, rep};
  }
  const CoinField free_field = CoinField::homogeneous(c);
  Walker forward(field, psi_in, schedule.max_window);
  LatticeState prev;
  for (long n : schedule.checkpoints()) {
    forward.step(n - 1 - forward.time());
    LatticeState cur = detail::block_mean(forward.state(), forward.support_bounds(), field, free_field, side, n,
                                          schedule.max_window);
    rep.iterates.emplace_back(n, rep.iterates.empty() ? 0.0 : distance(cur, prev));
    rep.final_n = n;
    prev = std::move(cur);
    if (rep.iterates.size() > 1 && rep.iterates.back().second < schedule.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.limit_norm = prev.norm();
  return {std::move(prev), rep};
}

struct PurePointOptions {
  long horizon = 2048;
  long radius = 10;
  double gate = 5e-2;
  Schedule schedule{};
};

struct PurePointReport {
  double kappa0 = 0.0;            ///< norm deficit of the outgoing states
  double time_average = 0.0;      ///< averaged mass on |x| <= radius
  double outgoing_mass[2] = {0.0, 0.0};
  LatticeState outgoing[2];
  ConvergenceReport reports[2];

  const LatticeState& phi(Side s) const { return outgoing[s == Side::left ? 0 : 1]; }
  double mass(Side s) const { return outgoing_mass[s == Side::left ? 0 : 1]; }
};

/// (1 / (horizon - horizon/2)) sum_{horizon/2 <= n < horizon} sum_{|x| <= R} P(X_n = x).
inline double localized_mass_average(const LatticeState& psi_in, const CoinField& field, long horizon, long radius,
                                     std::size_t max_window = kDefaultMaxWindow) {
  if (horizon < 2) throw DomainError("horizon must be at least 2", "horizon");
  Walker w(field, psi_in, max_window);
  w.step(horizon / 2);
  double acc = 0.0;
  for (long n = horizon / 2; n < horizon; ++n) {
    const LatticeState& s = w.state();
    for (long x = -radius; x <= radius; ++x) acc += s(x).squaredNorm();
    w.step(1);
  }
  return acc / static_cast<double>(horizon - horizon / 2);
}

/// kappa_0 = ||E_p^U Psi_in||^2, estimated as ||Psi_in||^2 - ||Phi_l||^2 - ||Phi_r||^2
/// and cross-checked against the time-averaged localized mass.
inline PurePointReport pure_point_mass(const LatticeState& psi_in, const CoinField& field,
                                       const PurePointOptions& opt = {}) {
  PurePointReport rep;
  double total = psi_in.norm_squared();
  for (Side s : kSides) {
    const int i = s == Side::left ? 0 : 1;
    auto [phi, r] = outgoing_state(psi_in, field, s, opt.schedule);
    rep.outgoing_mass[i] = phi.norm_squared();
    rep.outgoing[i] = std::move(phi);
    rep.reports[i] = std::move(r);
    total -= rep.outgoing_mass[i];
  }
  rep.kappa0 = std::max(0.0, total);
  rep.time_average = localized_mass_average(psi_in, field, opt.horizon, opt.radius, opt.schedule.max_window);
  if (std::abs(rep.kappa0 - rep.time_average) > opt.gate) {
    std::ostringstream os;
    os << "pure point mass estimators disagree: norm deficit " << rep.kappa0 << ", time average "
       << rep.time_average << " (gate " << opt.gate << ")";
    throw InconsistencyError(os.str());
  }
  return rep;
}

/// ||Phi^(n)(U_0 p) - U Phi^(n)(p)||, the intertwining defect for eta(z) = z^power.
inline double verify_intertwining(const CoinField& field, const PairState& pair, long n, long power = 1) {
  PairState p = project_scattering(pair, field);
  PairState moved;
  for (Side s : kSides)
    if (!p[s].empty()) moved[s] = evolve(p[s], CoinField::homogeneous(field.asymptotic(s)), power);
  const LatticeState lhs = wave_iterate(moved, field, n);
  const LatticeState rhs = evolve(wave_iterate(p, field, n), field, power);
  return distance(lhs, rhs);
}

struct BoundState {
  cplx eigenvalue;
  LatticeState vector;
};

/// Eigenvectors of U truncated to [first, last] with reflecting ends (the
/// component leaving the window is sent back in the other component), kept
/// when their mass within `edge` sites of either end is below `boundary_tol`.
/// The kept vectors are orthonormalised.
inline std::vector<BoundState> find_bound_states(const CoinField& field, long first, long last,
                                                 double boundary_tol = 1e-8, long edge = 8) {
  if (last - first < 2 * edge + 1) throw DomainError("window too small for bound-state search", "window");
  const long w = last - first + 1;
  const long dim = 2 * w;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  auto idx = [first](long x, int comp) { return 2 * (x - first) + comp; };
  for (long x = first; x <= last; ++x) {
    const Mat2 c = field.at(x);
    for (int in = 0; in < 2; ++in) {
      // After the coin, component 0 moves to x - 1 and component 1 to x + 1.
      const long t0 = x - 1 >= first ? idx(x - 1, 0) : idx(first, 1);
      const long t1 = x + 1 <= last ? idx(x + 1, 1) : idx(last, 0);
      u(t0, idx(x, in)) += c(0, in);
      u(t1, idx(x, in)) += c(1, in);
    }
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(u);
  std::vector<cplx> vals;
  std::vector<Eigen::VectorXcd> vecs;
  for (long i = 0; i < dim; ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(i).normalized();
    double edge_mass = 0.0;
    for (long x = 0; x < edge; ++x)
      for (int c = 0; c < 2; ++c)
        edge_mass += std::norm(v(2 * x + c)) + std::norm(v(dim - 1 - 2 * x - c));
    if (edge_mass < boundary_tol) {
      vals.push_back(es.eigenvalues()(i));
      vecs.push_back(v);
    }
  }
  std::vector<BoundState> out;
  if (vecs.empty()) return out;
  Eigen::MatrixXcd basis(dim, static_cast<long>(vecs.size()));
  for (std::size_t i = 0; i < vecs.size(); ++i) basis.col(static_cast<long>(i)) = vecs[i];
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(basis);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, basis.cols());
  for (long i = 0; i < basis.cols(); ++i) {
    std::vector<Spinor> amps(static_cast<std::size_t>(w));
    for (long x = 0; x < w; ++x) amps[static_cast<std::size_t>(x)] = Spinor(q(2 * x, i), q(2 * x + 1, i));
    out.push_back(BoundState{vals[static_cast<std::size_t>(i)], LatticeState(first, std::move(amps))});
  }
  return out;
}

/// Sum over bound states b of |<b, Psi>|^2.
inline double bound_state_overlap(const std::vector<BoundState>& states, const LatticeState& psi) {
  double s = 0.0;
  for (const auto& b : states) s += std::norm(inner(b.vector, psi));
  return s;
}

}  // namespace qwalk
