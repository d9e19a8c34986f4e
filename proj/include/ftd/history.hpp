#pragma once

// Dense trajectory storage on a uniform grid, linear interpolation of past
// states, and maximum-value (window supremum) evaluation over [t - pi(t), t].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftd/delay.hpp"
#include "ftd/error.hpp"

namespace ftd {

/// States recorded at t0 + k h, k = 0..size()-1, optionally with a gain row per
/// grid point. Before t0 the trajectory may be extended by a constant
/// pre-history (used for constant delays on [t0 - pi, t0]).
class History {
 public:
  History(double t0, double h, std::size_t dimension, std::size_t gain_dimension = 0)
      : t0_(t0), h_(h), dim_(dimension), gain_dim_(gain_dimension) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step size must be > 0");
    if (dimension == 0) throw std::invalid_argument("history dimension must be > 0");
  }

  void set_prehistory(std::vector<double> state) {
    if (state.size() != dim_) throw std::invalid_argument("pre-history dimension mismatch");
    prehistory_ = std::move(state);
  }
  bool has_prehistory() const noexcept { return prehistory_.has_value(); }

  void reserve(std::size_t points) {
    states_.reserve(points * dim_);
    gains_.reserve(points * gain_dim_);
  }

  void push(std::span<const double> state, std::span<const double> gains = {}) {
    if (state.size() != dim_) throw std::invalid_argument("state dimension mismatch");
    if (gains.size() != gain_dim_) throw std::invalid_argument("gain dimension mismatch");
    states_.insert(states_.end(), state.begin(), state.end());
    gains_.insert(gains_.end(), gains.begin(), gains.end());
  }

  double t0() const noexcept { return t0_; }
  double step() const noexcept { return h_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t gain_dimension() const noexcept { return gain_dim_; }
  std::size_t size() const noexcept { return states_.size() / dim_; }
  bool empty() const noexcept { return states_.empty(); }

  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * h_; }
  double current_time() const {
    if (empty()) throw HistoryError("empty history has no current time");
    return time(size() - 1);
  }

  std::span<const double> state(std::size_t k) const {
    return {states_.data() + k * dim_, dim_};
  }
  std::span<const double> gains(std::size_t k) const {
    return {gains_.data() + k * gain_dim_, gain_dim_};
  }
  std::span<const double> back() const { return state(size() - 1); }
  std::span<const double> back_gains() const { return gains(size() - 1); }

  /// Exact grid index when t lies on the grid (to 1e-9 h), otherwise nullopt.
  std::optional<std::size_t> grid_index(double t) const {
    const double r = (t - t0_) / h_;
    const double k = std::round(r);
    if (k >= 0.0 && std::abs(r - k) <= 1e-9 && k < static_cast<double>(size())) {
      return static_cast<std::size_t>(k);
    }
    return std::nullopt;
  }

  /// Smallest grid index k with time(k) >= t (t is clamped to t0).
  std::size_t first_index_at_or_after(double t) const {
    if (t <= t0_) return 0;
    auto k = static_cast<std::size_t>(std::max(0.0, std::ceil((t - t0_) / h_)));
    while (k > 0 && time(k - 1) >= t) --k;
    while (time(k) < t) ++k;
    return k;
  }

  /// Largest grid index k with time(k) <= t; t must be >= t0.
  std::size_t last_index_at_or_before(double t) const {
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor((t - t0_) / h_)));
    while (time(k + 1) <= t) ++k;
    while (k > 0 && time(k) > t) --k;
    return std::min(k, size() - 1);
  }

  /// Linear interpolation at t. Grid points are returned bitwise; times before
  /// t0 resolve to the pre-history when one is set.
  void query(double t, std::span<double> out) const {
    if (out.size() != dim_) throw std::invalid_argument("query output dimension mismatch");
    locate(t, [&](std::span<const double> a, std::span<const double> b, double w) {
      if (b.empty()) {
        std::copy(a.begin(), a.end(), out.begin());
      } else {
        for (std::size_t i = 0; i < dim_; ++i) out[i] = a[i] + w * (b[i] - a[i]);
      }
    });
  }

  std::vector<double> query(double t) const {
    std::vector<double> out(dim_);
    query(t, out);
    return out;
  }

  double query_component(double t, std::size_t i) const {
    double v = 0.0;
    locate(t, [&](std::span<const double> a, std::span<const double> b, double w) {
      v = b.empty() ? a[i] : a[i] + w * (b[i] - a[i]);
    });
    return v;
  }

  /// Interpolated gain row at t (no pre-history: gains start at t0).
  std::vector<double> query_gains(double t) const {
    std::vector<double> out(gain_dim_);
    if (gain_dim_ == 0) return out;
    if (auto k = grid_index(t)) {
      auto g = gains(*k);
      std::copy(g.begin(), g.end(), out.begin());
      return out;
    }
    check_range(t, false);
    const std::size_t k = std::min(last_index_at_or_before(t), size() - 2);
    const double w = (t - time(k)) / h_;
    for (std::size_t i = 0; i < gain_dim_; ++i) {
      out[i] = gains(k)[i] + w * (gains(k + 1)[i] - gains(k)[i]);
    }
    return out;
  }

 private:
  void check_range(double t, bool allow_pre) const {
    if (empty()) throw HistoryError("query on empty history");
    const double slack = 1e-9 * h_;
    if (t > current_time() + slack) {
      throw HistoryError("query at t=" + std::to_string(t) + " beyond stored history (" +
                         std::to_string(current_time()) + ")");
    }
    if (t < t0_ - slack && !(allow_pre && prehistory_)) {
      throw HistoryError("query at t=" + std::to_string(t) + " precedes available history");
    }
  }

  template <class Fn>
  void locate(double t, Fn&& fn) const {
    check_range(t, true);
    if (t < t0_ - 1e-9 * h_) {
      fn(std::span<const double>(*prehistory_), std::span<const double>{}, 0.0);
      return;
    }
    if (auto k = grid_index(t)) {
      fn(state(*k), std::span<const double>{}, 0.0);
      return;
    }
    if (size() == 1) {
      fn(state(0), std::span<const double>{}, 0.0);
      return;
    }
    const double tc = std::clamp(t, t0_, current_time());
    const std::size_t k = std::min(last_index_at_or_before(tc), size() - 2);
    const double w = (tc - time(k)) / h_;
    fn(state(k), state(k + 1), w);
  }

  double t0_;
  double h_;
  std::size_t dim_;
  std::size_t gain_dim_;
  std::vector<double> states_;
  std::vector<double> gains_;
  std::optional<std::vector<double>> prehistory_;
};

/// Scalar functionals of a state vector used in window suprema.
enum class WindowFunctional { SqNorm2, Norm1, NormInf, WeightedSq };

inline double sq_norm2(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}
inline double norm1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}
inline double norm_inf(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}
/// sum_i weights_i * |x_i|^2 over node blocks of size x.size() / weights.size().
inline double weighted_sq(std::span<const double> x, std::span<const double> weights) {
  if (weights.empty() || x.size() % weights.size() != 0) {
    throw std::invalid_argument("weight count must divide the state dimension");
  }
  const std::size_t block = x.size() / weights.size();
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += weights[i] * sq_norm2(x.subspan(i * block, block));
  }
  return s;
}

inline double evaluate_functional(WindowFunctional f, std::span<const double> x,
                                  std::span<const double> weights = {}) {
  switch (f) {
    case WindowFunctional::SqNorm2: return sq_norm2(x);
    case WindowFunctional::Norm1: return norm1(x);
    case WindowFunctional::NormInf: return norm_inf(x);
    case WindowFunctional::WeightedSq: return weighted_sq(x, weights);
  }
  return 0.0;
}

/// sup of value(s, x(s)) over [a, t]: every grid point inside plus the
/// interpolated states at both ends. Brute force; O(window length).
template <class ValueFn>
double window_sup_over(const History& traj, double a, double t, ValueFn&& value) {
  if (a > t) throw std::invalid_argument("window start after window end");
  if (a < traj.t0() - 1e-9 * traj.step() && !traj.has_prehistory()) {
    throw HistoryError("window [" + std::to_string(a) + ", " + std::to_string(t) +
                       "] extends before available history");
  }
  std::vector<double> buf(traj.dimension());
  traj.query(a, buf);
  double best = value(a, std::span<const double>(buf));
  traj.query(t, buf);
  best = std::max(best, value(t, std::span<const double>(buf)));
  if (t >= traj.t0()) {
    const std::size_t last = traj.last_index_at_or_before(t);
    for (std::size_t k = traj.first_index_at_or_after(a); k <= last && k < traj.size(); ++k) {
      best = std::max(best, value(traj.time(k), traj.state(k)));
    }
  }
  return best;
}

/// Maximum of a state functional over the delay window [t - pi(t), t].
inline double window_sup(const History& traj, double t, const DelayProfile& profile,
                         WindowFunctional f, std::span<const double> weights = {}) {
  return window_sup_over(traj, profile.window_start(t), t,
                         [&](double, std::span<const double> x) {
                           return evaluate_functional(f, x, weights);
                         });
}

/// Incremental window maximum for nondecreasing window starts.
///
/// Grid values enter through `advance`, the monotone deque drops indices that
/// left the window, and `max` combines the deque front with the interpolated
/// boundary values. The result equals `window_sup_over` on the same window.
class WindowMaxTracker {
 public:
  /// Feed grid values up to and including grid index `last`.
  template <class GridValue>
  void advance(std::size_t last, GridValue&& grid_value) {
    while (next_ <= last) {
      const double v = grid_value(next_);
      while (!deque_.empty() && deque_.back().second <= v) deque_.pop_back();
      deque_.emplace_back(next_, v);
      ++next_;
    }
  }

  /// Drop grid indices smaller than `first`.
  void retire_before(std::size_t first) {
    while (!deque_.empty() && deque_.front().first < first) deque_.pop_front();
  }

  /// Max over tracked grid values in the window plus the given boundary values.
  double max(double left_value, double right_value) const {
    double best = std::max(left_value, right_value);
    if (!deque_.empty()) best = std::max(best, deque_.front().second);
    return best;
  }

  std::size_t fed() const noexcept { return next_; }

 private:
  std::deque<std::pair<std::size_t, double>> deque_;
  std::size_t next_ = 0;
};

}  // namespace ftd
