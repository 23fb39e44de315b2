#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <vector>

#include <fftw3.h>

#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

/// diag(e^{ik}, e^{-ik}) C, the Fourier symbol of U = S C for a constant coin.
inline Mat2 symbol_at(const CoinMatrix& coin, double k) {
  Mat2 d = Mat2::Zero();
  d(0, 0) = std::polar(1.0, k);
  d(1, 1) = std::polar(1.0, -k);
  return d * coin.entries;
}

/// tau(k) = a cos(k + alpha - delta/2): half the trace of the SU(2) part of the symbol.
inline double symbol_tau(const CoinMatrix& c, double k) { return c.a * std::cos(k + c.phase_shift()); }
inline double symbol_varsigma(const CoinMatrix& c, double k) { return c.a * std::sin(k + c.phase_shift()); }
inline double symbol_eta(const CoinMatrix& c, double k) {
  const double t = symbol_tau(c, k);
  return std::sqrt(std::max(0.0, 1.0 - t * t));
}

/// Eigenvalues and unit eigenvectors of the symbol; index 0 is Branch::first.
struct Eigensystem {
  std::array<cplx, 2> lambda;
  std::array<Spinor, 2> u;

  cplx eigenvalue(Branch j) const { return lambda[static_cast<std::size_t>(index(j))]; }
  const Spinor& vector(Branch j) const { return u[static_cast<std::size_t>(index(j))]; }
  Mat2 projector(Branch j) const { return vector(j) * vector(j).adjoint(); }
};

/// Closed-form eigendecomposition of the symbol.
///
/// For 0 < a < 1 the branches are lambda_1 = e^{i delta/2}(tau + i eta) and
/// lambda_2 = e^{i delta/2}(tau - i eta), so that the group velocity of
/// branch j is (-1)^j varsigma/eta. For a = 1 the symbol is diagonal and
/// branch 1 is the component-0 (left moving) eigenvector. Branches are never
/// assigned by sorting.
///
/// Gauge: for b > 0 the first component never vanishes and is taken real
/// positive for every k, which makes u_j smooth (indeed analytic) in k.
inline Eigensystem eigensystem(const CoinMatrix& c, double k) {
  const cplx phase = std::polar(1.0, 0.5 * c.delta);
  const double phi = k + c.phase_shift();
  Eigensystem es;
  if (c.b <= kDegenerateTol) {
    es.lambda = {phase * std::polar(1.0, phi), phase * std::polar(1.0, -phi)};
    es.u = {Spinor(1.0, 0.0), Spinor(0.0, 1.0)};
    return es;
  }
  const double tau = c.a * std::cos(phi);
  const double sig = c.a * std::sin(phi);
  const double eta = std::sqrt(std::max(0.0, 1.0 - tau * tau));
  es.lambda = {phase * cplx(tau, eta), phase * cplx(tau, -eta)};
  // eta^2 - varsigma^2 = b^2, so eta -/+ varsigma is formed without cancellation.
  const double b2 = c.b * c.b;
  const double r1 = sig <= 0.0 ? eta - sig : b2 / (eta + sig);
  const double r2 = sig >= 0.0 ? eta + sig : b2 / (eta - sig);
  const cplx w = std::polar(1.0, 0.5 * pi - (k + c.beta - 0.5 * c.delta));
  es.u = {Spinor(c.b, r1 * w) / std::hypot(c.b, r1), Spinor(c.b, -r2 * w) / std::hypot(c.b, r2)};
  return es;
}

/// v_j(k) = i lambda_j'(k) / lambda_j(k).
inline double velocity(const CoinMatrix& c, double k, Branch j) {
  if (c.a <= kDegenerateTol) return 0.0;
  if (c.b <= kDegenerateTol) return parity(j);
  return parity(j) * symbol_varsigma(c, k) / symbol_eta(c, k);
}

/// Sum_j v_j(k) Pi_j(k).
inline Mat2 velocity_symbol(const CoinMatrix& c, double k) {
  const Eigensystem es = eigensystem(c, k);
  return velocity(c, k, Branch::first) * es.projector(Branch::first) +
         velocity(c, k, Branch::second) * es.projector(Branch::second);
}

/// Closed arc of the unit circle, traversed counterclockwise from `start` to
/// `end` (radians, end >= start).
struct Arc {
  double start = 0.0;
  double end = 0.0;
};

struct SpectrumArcs {
  std::vector<Arc> arcs;
  std::vector<cplx> thresholds;  ///< boundary points of the spectrum
  bool full_circle = false;
};

inline SpectrumArcs spectrum_arcs(const CoinMatrix& c) {
  SpectrumArcs s;
  const double h = 0.5 * c.delta;
  if (c.b <= kDegenerateTol) {
    s.full_circle = true;
    s.arcs = {Arc{h - pi, h + pi}};
    return s;
  }
  if (c.a <= kDegenerateTol) {
    s.arcs = {Arc{h + 0.5 * pi, h + 0.5 * pi}, Arc{h - 0.5 * pi, h - 0.5 * pi}};
    s.thresholds = {std::polar(1.0, h + 0.5 * pi), std::polar(1.0, h - 0.5 * pi)};
    return s;
  }
  const double t0 = std::acos(c.a);
  s.arcs = {Arc{h + t0, h + pi - t0}, Arc{h - pi + t0, h - t0}};
  s.thresholds = {std::polar(1.0, h + t0), std::polar(1.0, h + pi - t0), std::polar(1.0, h - pi + t0),
                  std::polar(1.0, h - t0)};
  return s;
}

/// Per-momentum data of one free model U_* = S C_* on a uniform grid of [0, 2 pi).
struct FreeModel {
  CoinMatrix coin;
  std::vector<double> k;
  std::vector<Eigensystem> eigen;
  std::vector<std::array<double, 2>> velocities;
  SpectrumArcs spectrum;

  static FreeModel build(const CoinMatrix& coin, std::size_t grid_size) {
    FreeModel m;
    m.coin = coin;
    m.k.resize(grid_size);
    m.eigen.resize(grid_size);
    m.velocities.resize(grid_size);
    for (std::size_t n = 0; n < grid_size; ++n) {
      const double k = two_pi * static_cast<double>(n) / static_cast<double>(grid_size);
      m.k[n] = k;
      m.eigen[n] = eigensystem(coin, k);
      m.velocities[n] = {velocity(coin, k, Branch::first), velocity(coin, k, Branch::second)};
    }
    m.spectrum = spectrum_arcs(coin);
    return m;
  }
};

/// (F Psi)(k) = sum_x e^{-ikx} Psi(x), evaluated exactly over the window.
inline Spinor fourier_at(const LatticeState& s, double k) {
  if (s.empty()) return Spinor::Zero();
  const cplx z = std::polar(1.0, -k);
  const auto& v = s.amplitudes();
  cplx h0 = 0.0, h1 = 0.0;
  for (std::size_t i = v.size(); i-- > 0;) {
    h0 = h0 * z + v[i](0);
    h1 = h1 * z + v[i](1);
  }
  const cplx base = std::polar(1.0, -k * static_cast<double>(s.offset()));
  return Spinor(base * h0, base * h1);
}

/// Indicator of a Borel set of velocities.
using VelocitySet = std::function<bool(double)>;

namespace velocity_sets {
inline VelocitySet all() { return [](double) { return true; }; }
inline VelocitySet positive() { return [](double v) { return v > 0.0; }; }
inline VelocitySet negative() { return [](double v) { return v < 0.0; }; }
inline VelocitySet interval(double lo, double hi) {
  return [lo, hi](double v) { return v >= lo && v <= hi; };
}
inline VelocitySet complement(VelocitySet s) {
  return [s = std::move(s)](double v) { return !s(v); };
}
}  // namespace velocity_sets

struct ProjectionOptions {
  std::size_t dft_size = 0;  ///< 0: smallest power of two holding support + 2 margin
  std::size_t margin = 256;
  double alias_tol = 1e-10;
  /// Treat the input window as one period of an N-periodic state.
  bool periodic = false;
};

namespace detail {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  cplx& operator[](std::size_t i) { return reinterpret_cast<cplx*>(data)[i]; }
  fftw_complex* data;
  std::size_t size;
};

// FFTW planning is not thread-safe; transforms themselves are.
inline void fft_inplace(FftwBuffer& buf, int sign) {
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(buf.size), buf.data, buf.data, sign, FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
}

}  // namespace detail

/// chi_B(V_*) Psi computed with a size-N DFT on the shifted grid
/// k_n = k_0 + 2 pi (n + 1/2) / N, where k_0 = delta/2 - alpha is a zero of the
/// velocity. The velocity changes sign only at k_0 and k_0 + pi, which then
/// sit at cell midpoints, so sign windows B are resolved to O(N^-2) instead
/// of O(N^-1). The result lives on the N-site transform window.
inline LatticeState velocity_projection(const LatticeState& state, const CoinMatrix& coin,
                                        const VelocitySet& set, const ProjectionOptions& opt = {}) {
  long first = 0;
  std::size_t n = 0;
  if (opt.periodic) {
    first = state.offset();
    n = state.size();
  } else {
    const auto sup = state.support();
    if (!sup) return state;
    const std::size_t width = static_cast<std::size_t>(sup->second - sup->first + 1);
    n = opt.dft_size ? opt.dft_size : std::bit_ceil(width + 2 * opt.margin);
    if (n < width) throw AliasingError("DFT size is smaller than the state support");
    first = sup->first - static_cast<long>((n - width) / 2);
    double edge_mass = 0.0;
    const long m = static_cast<long>(opt.margin);
    for (long x = sup->first; x <= sup->second; ++x) {
      if (x < first + m || x >= first + static_cast<long>(n) - m) edge_mass += state(x).squaredNorm();
    }
    if (edge_mass > opt.alias_tol) {
      std::ostringstream os;
      os << "mass " << edge_mass << " within " << opt.margin << " sites of the DFT window edge";
      throw AliasingError(os.str());
    }
  }
  if (n == 0) return state;
  const double nd = static_cast<double>(n);
  const double shift = wrap_positive(0.5 * coin.delta - coin.alpha) + pi / nd;
  detail::FftwBuffer b0(n), b1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Spinor v = state(first + static_cast<long>(i));
    const cplx tw = std::polar(1.0, -shift * static_cast<double>(i));
    b0[i] = v(0) * tw;
    b1[i] = v(1) * tw;
  }
  detail::fft_inplace(b0, FFTW_FORWARD);
  detail::fft_inplace(b1, FFTW_FORWARD);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = shift + two_pi * static_cast<double>(j) / nd;
    const Eigensystem es = eigensystem(coin, k);
    Mat2 p = Mat2::Zero();
    for (Branch br : kBranches)
      if (set(velocity(coin, k, br))) p += es.projector(br);
    const Spinor out = p * Spinor(b0[j], b1[j]);
    b0[j] = out(0);
    b1[j] = out(1);
  }
  detail::fft_inplace(b0, FFTW_BACKWARD);
  detail::fft_inplace(b1, FFTW_BACKWARD);
  std::vector<Spinor> amps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx tw = std::polar(1.0 / nd, shift * static_cast<double>(i));
    amps[i] = Spinor(b0[i] * tw, b1[i] * tw);
  }
  return LatticeState(first, std::move(amps));
}

inline LatticeState velocity_projection(const LatticeState& state, const FreeModel& model,
                                        const VelocitySet& set, const ProjectionOptions& opt = {}) {
  return velocity_projection(state, model.coin, set, opt);
}

}  // namespace qwalk
