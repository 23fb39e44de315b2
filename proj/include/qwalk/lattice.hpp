#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

inline constexpr std::size_t kDefaultMaxWindow = std::size_t{1} << 20;

/// A compactly supported element of l^2(Z, C^2), stored on the contiguous
/// window [offset, offset + size). Sites outside the window are zero.
class LatticeState {
 public:
  LatticeState() = default;
  LatticeState(long offset, std::vector<Spinor> amplitudes)
      : offset_(offset), amp_(std::move(amplitudes)) {}

  /// Zero state on [first, last].
  static LatticeState zeros(long first, long last) {
    return LatticeState(first, std::vector<Spinor>(static_cast<std::size_t>(last - first + 1),
                                                   Spinor::Zero()));
  }

  static LatticeState delta(long x, const Spinor& s) { return LatticeState(x, {s}); }

  static LatticeState from_entries(const std::vector<std::pair<long, Spinor>>& entries) {
    if (entries.empty()) return {};
    auto [lo, hi] = std::minmax_element(entries.begin(), entries.end(),
                                        [](const auto& p, const auto& q) { return p.first < q.first; });
    LatticeState s = zeros(lo->first, hi->first);
    for (const auto& [x, v] : entries) s.at(x) += v;
    return s;
  }

  long offset() const { return offset_; }
  /// One past the last site of the window.
  long end() const { return offset_ + static_cast<long>(amp_.size()); }
  std::size_t size() const { return amp_.size(); }
  bool empty() const { return amp_.empty(); }

  const std::vector<Spinor>& amplitudes() const { return amp_; }
  std::vector<Spinor>& amplitudes() { return amp_; }

  bool contains(long x) const { return x >= offset_ && x < end(); }

  Spinor operator()(long x) const {
    return contains(x) ? amp_[static_cast<std::size_t>(x - offset_)] : Spinor::Zero();
  }

  /// Mutable access; the site must lie in the window.
  Spinor& at(long x) { return amp_.at(static_cast<std::size_t>(x - offset_)); }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : amp_) s += v.squaredNorm();
    return s;
  }
  double norm() const { return std::sqrt(norm_squared()); }

  /// First and last site with a nonzero amplitude; nullopt for the zero state.
  std::optional<std::pair<long, long>> support() const {
    std::size_t lo = 0;
    while (lo < amp_.size() && amp_[lo].isZero(0.0)) ++lo;
    if (lo == amp_.size()) return std::nullopt;
    std::size_t hi = amp_.size() - 1;
    while (amp_[hi].isZero(0.0)) --hi;
    return std::make_pair(offset_ + static_cast<long>(lo), offset_ + static_cast<long>(hi));
  }

  /// Grows the window so that it covers [first, last]. Existing sites are kept.
  void cover(long first, long last) {
    if (amp_.empty()) {
      *this = zeros(first, last);
      return;
    }
    if (first < offset_) {
      amp_.insert(amp_.begin(), static_cast<std::size_t>(offset_ - first), Spinor::Zero());
      offset_ = first;
    }
    if (last >= end()) amp_.resize(static_cast<std::size_t>(last - offset_ + 1), Spinor::Zero());
  }

  /// Shrinks the window to the exact support (zero amplitudes are exact zeros).
  void trim() {
    auto s = support();
    if (!s) {
      amp_.clear();
      return;
    }
    std::vector<Spinor> kept(amp_.begin() + (s->first - offset_), amp_.begin() + (s->second - offset_ + 1));
    amp_ = std::move(kept);
    offset_ = s->first;
  }

  LatticeState& operator+=(const LatticeState& o) {
    if (o.empty()) return *this;
    cover(o.offset(), o.end() - 1);
    for (std::size_t i = 0; i < o.size(); ++i)
      amp_[static_cast<std::size_t>(o.offset() - offset_) + i] += o.amp_[i];
    return *this;
  }

  LatticeState& operator-=(const LatticeState& o) {
    if (o.empty()) return *this;
    cover(o.offset(), o.end() - 1);
    for (std::size_t i = 0; i < o.size(); ++i)
      amp_[static_cast<std::size_t>(o.offset() - offset_) + i] -= o.amp_[i];
    return *this;
  }

  LatticeState& operator*=(cplx z) {
    for (auto& v : amp_) v *= z;
    return *this;
  }

  friend LatticeState operator+(LatticeState a, const LatticeState& b) { return a += b; }
  friend LatticeState operator-(LatticeState a, const LatticeState& b) { return a -= b; }
  friend LatticeState operator*(cplx z, LatticeState a) { return a *= z; }

 private:
  long offset_ = 0;
  std::vector<Spinor> amp_;
};

/// <a, b>, antilinear in the first argument.
inline cplx inner(const LatticeState& a, const LatticeState& b) {
  const long lo = std::max(a.offset(), b.offset());
  const long hi = std::min(a.end(), b.end());
  cplx s = 0.0;
  for (long x = lo; x < hi; ++x) s += a(x).dot(b(x));
  return s;
}

inline double distance(const LatticeState& a, const LatticeState& b) { return (a - b).norm(); }

/// Largest sitewise deviation max_x ||a(x) - b(x)||_inf.
inline double max_deviation(const LatticeState& a, const LatticeState& b) {
  const LatticeState d = a - b;
  double m = 0.0;
  for (const auto& v : d.amplitudes()) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

/// Restriction to sites with x >= 0 (right) or x <= -1 (left).
inline LatticeState restrict_to(const LatticeState& s, Side side) {
  LatticeState r = s;
  for (long x = r.offset(); x < r.end(); ++x) {
    if ((side == Side::right) != (x >= 0)) r.at(x) = Spinor::Zero();
  }
  return r;
}

namespace detail {

// In-place S: component 0 moves one site left, component 1 one site right.
// Requires the first site's component 0 and the last site's component 1 to vanish.
inline void shift_forward(std::vector<Spinor>& v) {
  const std::size_t n = v.size();
  if (n == 0) return;
  for (std::size_t i = 0; i + 1 < n; ++i) v[i](0) = v[i + 1](0);
  v[n - 1](0) = 0.0;
  for (std::size_t i = n - 1; i > 0; --i) v[i](1) = v[i - 1](1);
  v[0](1) = 0.0;
}

// In-place S^*.
inline void shift_backward(std::vector<Spinor>& v) {
  const std::size_t n = v.size();
  if (n == 0) return;
  for (std::size_t i = n - 1; i > 0; --i) v[i](0) = v[i - 1](0);
  v[0](0) = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) v[i](1) = v[i + 1](1);
  v[n - 1](1) = 0.0;
}

}  // namespace detail

/// Evolves a state under U = SC (forward) or U^{-1} = C^* S^* (backward).
/// The window grows by amortized doubling so that shifts never reach its
/// edges; evolution on Z is therefore exact.
class Walker {
 public:
  Walker(const CoinField& field, LatticeState state, std::size_t max_window = kDefaultMaxWindow)
      : field_(&field), homogeneous_(field.is_homogeneous()), max_window_(max_window),
        state_(std::move(state)) {
    if (auto s = state_.support()) {
      lo_ = s->first;
      hi_ = s->second;
    } else {
      lo_ = hi_ = 0;
      if (state_.empty()) state_ = LatticeState::zeros(0, 0);
    }
  }

  const LatticeState& state() const { return state_; }
  LatticeState& mutable_state() { return state_; }
  LatticeState take() && { return std::move(state_); }
  long time() const { return time_; }

  /// Conservative bounds on the support of the current state.
  std::pair<long, long> support_bounds() const { return {lo_, hi_}; }

  /// Applies U^n (n > 0) or U^{-|n|} (n < 0).
  void step(long n) {
    if (n == 0) return;
    const long count = std::abs(n);
    reserve(lo_ - count - 1, hi_ + count + 1);
    auto& v = state_.amplitudes();
    const long off = state_.offset();
    for (long t = 0; t < count; ++t) {
      auto lo = static_cast<std::size_t>(lo_ - off);
      auto hi = static_cast<std::size_t>(hi_ - off);
      if (n > 0) {
        apply_coins(v, lo, hi, false);
        for (std::size_t i = lo - 1; i <= hi; ++i) v[i](0) = v[i + 1](0);
        for (std::size_t i = hi + 1; i >= lo; --i) v[i](1) = v[i - 1](1);
      } else {
        for (std::size_t i = hi + 1; i >= lo; --i) v[i](0) = v[i - 1](0);
        for (std::size_t i = lo - 1; i <= hi; ++i) v[i](1) = v[i + 1](1);
        apply_coins(v, lo - 1, hi + 1, true);
      }
      --lo_;
      ++hi_;
    }
    time_ += n;
  }

  /// Notifies the walker that sites in [first, last] may have been written externally.
  void widen_support(long first, long last) {
    lo_ = std::min(lo_, first);
    hi_ = std::max(hi_, last);
    reserve(lo_ - 1, hi_ + 1);
  }

 private:
  void reserve(long first, long last) {
    if (first >= state_.offset() && last < state_.end()) {
      if (!homogeneous_ && (coins_offset_ != state_.offset() || coins_.size() != state_.size()))
        rebuild_coins();
      return;
    }
    const long width = static_cast<long>(state_.size());
    long new_first = std::min(state_.offset(), first);
    long new_last = std::max(state_.end() - 1, last);
    if (new_first < state_.offset()) new_first = std::min(new_first, state_.offset() - width / 2);
    if (new_last >= state_.end()) new_last = std::max(new_last, state_.end() - 1 + width / 2);
    if (static_cast<std::size_t>(new_last - new_first + 1) > max_window_) {
      new_first = std::min(state_.offset(), first);
      new_last = std::max(state_.end() - 1, last);
      if (static_cast<std::size_t>(new_last - new_first + 1) > max_window_) {
        std::ostringstream os;
        os << "lattice window of " << (new_last - new_first + 1) << " sites exceeds the maximum of "
           << max_window_;
        throw ResourceError(os.str());
      }
    }
    state_.cover(new_first, new_last);
    if (!homogeneous_) rebuild_coins();
  }

  void rebuild_coins() {
    coins_offset_ = state_.offset();
    coins_.resize(state_.size());
    adjoint_.resize(state_.size());
    for (std::size_t i = 0; i < coins_.size(); ++i) {
      coins_[i] = field_->at(coins_offset_ + static_cast<long>(i));
      adjoint_[i] = coins_[i].adjoint();
    }
  }

  void apply_coins(std::vector<Spinor>& v, std::size_t first, std::size_t last, bool adjoint) const {
    if (homogeneous_) {
      const Mat2 c = adjoint ? field_->left().entries.adjoint() : field_->left().entries;
      for (std::size_t i = first; i <= last; ++i) v[i] = c * v[i];
      return;
    }
    const auto& m = adjoint ? adjoint_ : coins_;
    for (std::size_t i = first; i <= last; ++i) v[i] = m[i] * v[i];
  }

  const CoinField* field_;
  bool homogeneous_;
  std::size_t max_window_;
  LatticeState state_;
  long lo_ = 0;
  long hi_ = 0;
  long time_ = 0;
  long coins_offset_ = 0;
  std::vector<Mat2> coins_;
  std::vector<Mat2> adjoint_;
};

inline LatticeState apply_shift(LatticeState s) {
  auto sup = s.support();
  if (!sup) return s;
  s.cover(sup->first - 1, sup->second + 1);
  detail::shift_forward(s.amplitudes());
  return s;
}

inline LatticeState apply_shift_adjoint(LatticeState s) {
  auto sup = s.support();
  if (!sup) return s;
  s.cover(sup->first - 1, sup->second + 1);
  detail::shift_backward(s.amplitudes());
  return s;
}

inline LatticeState apply_coin(LatticeState s, const CoinField& field) {
  for (long x = s.offset(); x < s.end(); ++x) s.at(x) = field.at(x) * s.at(x);
  return s;
}

inline LatticeState apply_coin_adjoint(LatticeState s, const CoinField& field) {
  for (long x = s.offset(); x < s.end(); ++x) s.at(x) = field.at(x).adjoint() * s.at(x);
  return s;
}

/// U^n state for n >= 0, U^{-|n|} state for n < 0.
inline LatticeState evolve(LatticeState s, const CoinField& field, long n,
                           std::size_t max_window = kDefaultMaxWindow) {
  Walker w(field, std::move(s), max_window);
  w.step(n);
  return std::move(w).take();
}

/// P(X = x) = ||Psi(x)||^2 over the sites carrying nonzero mass.
inline std::map<long, double> position_distribution(const LatticeState& s) {
  std::map<long, double> p;
  for (long x = s.offset(); x < s.end(); ++x) {
    const double m = s(x).squaredNorm();
    if (m > 0.0) p.emplace(x, m);
  }
  return p;
}

/// sum_x e^{i xi x / n} ||Psi(x)||^2 for an already evolved state Psi = U^n Psi_in.
inline cplx characteristic_function(const LatticeState& evolved, long n, double xi) {
  if (n < 1) throw DomainError("characteristic function needs n >= 1");
  cplx s = 0.0;
  for (long x = evolved.offset(); x < evolved.end(); ++x) {
    const double m = evolved(x).squaredNorm();
    if (m > 0.0) s += m * std::polar(1.0, xi * static_cast<double>(x) / static_cast<double>(n));
  }
  return s;
}

/// E(exp(i xi X_n / n)) for the walk started from psi_in.
inline cplx characteristic_function(const LatticeState& psi_in, const CoinField& field, long n,
                                    double xi) {
  return characteristic_function(evolve(psi_in, field, n), n, xi);
}

}  // namespace qwalk
