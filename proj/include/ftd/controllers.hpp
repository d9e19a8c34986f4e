#pragma once

// Control laws: static sign-plus-linear feedback for the scalar model, its
// adaptive rules under the 2-, 1- and infinity-norm, pinning and full-node
// network feedback, and the adaptive network rules. Adaptive rules switch on
// the window supremum of the error over [t - pi(t), t] compared with 1 and 0.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftd/delay.hpp"
#include "ftd/history.hpp"

namespace ftd {

/// p' = c1 p + c2 p(t - pi(t)) - sgn(p) .* (c3 + c4 |p|).
struct StaticScalarGains {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;

  void validate() const {
    if (!(c3 >= 0.0)) throw std::invalid_argument("c3 must be >= 0");
    if (!(c4 >= 0.0)) throw std::invalid_argument("c4 must be >= 0");
  }
};

enum class Norm { Two, One, Inf };

inline const char* to_string(Norm n) {
  switch (n) {
    case Norm::Two: return "two";
    case Norm::One: return "one";
    case Norm::Inf: return "inf";
  }
  return "?";
}

inline double norm_value(Norm n, std::span<const double> x) {
  switch (n) {
    case Norm::Two: return std::sqrt(sq_norm2(x));
    case Norm::One: return norm1(x);
    case Norm::Inf: return norm_inf(x);
  }
  return 0.0;
}

/// Component i equals -sgn(p_i) (c3 + c4 |p_i|), and 0 where p_i = 0.
inline std::vector<double> static_scalar_control(std::span<const double> p,
                                                 const StaticScalarGains& gains) {
  std::vector<double> u(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) u[i] = -(gains.c3 + gains.c4 * p[i]);
    if (p[i] < 0.0) u[i] = gains.c3 - gains.c4 * p[i];
  }
  return u;
}

/// Switching branch of an adaptive rule.
enum class GainMode { AboveOne, InUnitBall, AtOrigin };

inline const char* to_string(GainMode m) {
  switch (m) {
    case GainMode::AboveOne: return "above_one";
    case GainMode::InUnitBall: return "in_unit_ball";
    case GainMode::AtOrigin: return "at_origin";
  }
  return "?";
}

/// Branch for a window supremum. The tie at exactly 1 belongs to the unit
/// ball; the origin is declared below zero_tol (zero_tol^2 for squared sups).
inline GainMode classify_window(double window_sup, bool squared, double zero_tol) {
  const double origin = squared ? zero_tol * zero_tol : zero_tol;
  if (window_sup <= origin) return GainMode::AtOrigin;
  if (window_sup > 1.0) return GainMode::AboveOne;
  return GainMode::InUnitBall;
}

/// Positive adaptation rates d1, d2, d3.
struct AdaptiveRates {
  double d1 = 0.1;
  double d2 = 0.1;
  double d3 = 0.1;

  void validate() const {
    if (!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0)) {
      throw std::invalid_argument("adaptive rates d1, d2, d3 must be > 0");
    }
  }
};

/// Time-varying gains of an adaptive scalar controller.
///
/// `sign_gain` is c3 and `linear_gain` is c4. The sign gain switches on the
/// squared 2-norm window for every norm variant; the linear gain switches on
/// the window of the variant's own norm, so the two modes are kept apart.
struct AdaptiveGainState {
  double sign_gain = 0.0;
  double linear_gain = 0.0;
  AdaptiveRates rates;
  GainMode sign_mode = GainMode::AboveOne;
  GainMode linear_mode = GainMode::AboveOne;
};

struct GainRates {
  double sign_gain = 0.0;
  double linear_gain = 0.0;
};

/// Rule arithmetic of the scalar adaptive laws.
///
///   c3' = 0 above one, d1 in the unit ball, 0 at the origin
///   c4' = d2 mu(t) phi(p) above one, d3 |p| in the unit ball, 0 at the origin
///
/// with phi(p) = p^T p for the 2-norm rule and |p| in the matching norm for
/// the 1- and infinity-norm rules.
inline GainRates scalar_gain_rates(Norm norm, const AdaptiveRates& rates, GainMode sign_mode,
                                   GainMode linear_mode, double mu, std::span<const double> p) {
  GainRates r;
  if (sign_mode == GainMode::InUnitBall) r.sign_gain = rates.d1;
  switch (linear_mode) {
    case GainMode::AboveOne:
      r.linear_gain = rates.d2 * mu * (norm == Norm::Two ? sq_norm2(p) : norm_value(norm, p));
      break;
    case GainMode::InUnitBall:
      r.linear_gain = rates.d3 * norm_value(norm, p);
      break;
    case GainMode::AtOrigin:
      break;
  }
  return r;
}

inline WindowFunctional switching_functional(Norm norm) {
  switch (norm) {
    case Norm::Two: return WindowFunctional::SqNorm2;
    case Norm::One: return WindowFunctional::Norm1;
    case Norm::Inf: return WindowFunctional::NormInf;
  }
  return WindowFunctional::SqNorm2;
}

/// One explicit Euler step of the scalar adaptive rules at time t, reading the
/// window suprema straight off the trajectory.
inline AdaptiveGainState adaptive_scalar_update(const AdaptiveGainState& state,
                                                const History& traj, double t,
                                                const RateFunction& rate,
                                                const DelayProfile& profile, Norm norm,
                                                double zero_tol = 1e-9) {
  AdaptiveGainState next = state;
  const double sq_sup = window_sup(traj, t, profile, WindowFunctional::SqNorm2);
  next.sign_mode = classify_window(sq_sup, true, zero_tol);
  if (norm == Norm::Two) {
    next.linear_mode = next.sign_mode;
  } else {
    next.linear_mode =
        classify_window(window_sup(traj, t, profile, switching_functional(norm)), false, zero_tol);
  }
  const auto p = traj.query(t);
  const GainRates r =
      scalar_gain_rates(norm, state.rates, next.sign_mode, next.linear_mode, rate.mu(t), p);
  next.sign_gain += traj.step() * r.sign_gain;
  next.linear_gain += traj.step() * r.linear_gain;
  return next;
}

/// Integrator gain hook for the scalar adaptive rules. Gains are (c3, c4),
/// both starting at 0. Window suprema come from incremental trackers.
class ScalarAdaptiveLaw {
 public:
  ScalarAdaptiveLaw(Norm norm, AdaptiveRates rates, RateFunction rate, DelayProfile profile,
                    double zero_tol = 1e-9)
      : norm_(norm), rates_(rates), rate_(rate), profile_(std::move(profile)),
        zero_tol_(zero_tol) {
    rates_.validate();
  }

  std::size_t gain_count() const { return 2; }
  std::vector<double> initial_gains() const { return {0.0, 0.0}; }
  static std::vector<std::string> gain_names() { return {"c3", "c4"}; }

  void rates(double t, const History& hist, std::span<const double>, std::span<double> out) {
    const double a = profile_.window_start(t);
    const std::size_t last = hist.size() - 1;
    const std::size_t first = hist.first_index_at_or_after(a);
    std::vector<double> left(hist.dimension());
    hist.query(a, left);
    const auto p = hist.state(last);

    sq_.advance(last, [&](std::size_t k) { return sq_norm2(hist.state(k)); });
    sq_.retire_before(first);
    const double sq_sup = sq_.max(sq_norm2(left), sq_norm2(p));
    sign_mode_ = classify_window(sq_sup, true, zero_tol_);

    if (norm_ == Norm::Two) {
      linear_mode_ = sign_mode_;
    } else {
      const auto f = switching_functional(norm_);
      own_.advance(last, [&](std::size_t k) { return evaluate_functional(f, hist.state(k)); });
      own_.retire_before(first);
      const double sup = own_.max(evaluate_functional(f, left), evaluate_functional(f, p));
      linear_mode_ = classify_window(sup, false, zero_tol_);
    }
    const GainRates r = scalar_gain_rates(norm_, rates_, sign_mode_, linear_mode_, rate_.mu(t), p);
    out[0] = r.sign_gain;
    out[1] = r.linear_gain;
  }

  GainMode sign_mode() const noexcept { return sign_mode_; }
  GainMode linear_mode() const noexcept { return linear_mode_; }

 private:
  Norm norm_;
  AdaptiveRates rates_;
  RateFunction rate_;
  DelayProfile profile_;
  double zero_tol_;
  WindowMaxTracker sq_;
  WindowMaxTracker own_;
  GainMode sign_mode_ = GainMode::AboveOne;
  GainMode linear_mode_ = GainMode::AboveOne;
};

// ---------------------------------------------------------------------------
// Network control
// ---------------------------------------------------------------------------

enum class NetworkControlKind { None, Pinning, FullNode };

/// Which pair of network gains adapts.
enum class NetworkAdaptVariant {
  /// theta1 (coupling, on the pinned error system) and theta3.
  Theta1Theta3,
  /// theta3 and theta4 on the full-node controller.
  Theta3Theta4,
};

struct NetworkAdaptive {
  NetworkAdaptVariant variant = NetworkAdaptVariant::Theta3Theta4;
  AdaptiveRates rates{0.05, 0.05, 0.02};
};

struct NetworkControlSpec {
  NetworkControlKind kind = NetworkControlKind::None;
  /// Pinning strength on node 1.
  double sigma = 1.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
  std::optional<NetworkAdaptive> adaptive;

  void validate() const {
    if (kind == NetworkControlKind::Pinning && !(sigma > 0.0)) {
      throw std::invalid_argument("pinning sigma must be > 0");
    }
    if (!(theta3 >= 0.0)) throw std::invalid_argument("theta3 must be >= 0");
    if (!(theta4 >= 0.0)) throw std::invalid_argument("theta4 must be >= 0");
    if (adaptive) {
      adaptive->rates.validate();
      if (adaptive->variant == NetworkAdaptVariant::Theta1Theta3 &&
          kind != NetworkControlKind::Pinning) {
        throw std::invalid_argument("theta1 adaptation requires pinning control");
      }
      if (adaptive->variant == NetworkAdaptVariant::Theta3Theta4 &&
          kind != NetworkControlKind::FullNode) {
        throw std::invalid_argument("theta4 adaptation requires full-node control");
      }
    }
  }
};

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// u_1 = -theta1 sigma e_1 - theta3 sgn(e_1); u_i = -theta3 sgn(e_i) for i >= 2.
/// `e` holds N blocks of n components.
inline std::vector<double> pinning_control(std::span<const double> e, std::size_t n,
                                           double sigma, double theta1, double theta3) {
  if (n == 0 || e.size() % n != 0) throw std::invalid_argument("node dimension mismatch");
  std::vector<double> u(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    u[k] = -theta3 * sign_of(e[k]);
    if (k < n) u[k] -= theta1 * sigma * e[k];
  }
  return u;
}

/// u_i = -theta3 sgn(e_i) - theta4 e_i on every node.
inline std::vector<double> full_node_control(std::span<const double> e, double theta3,
                                             double theta4) {
  std::vector<double> u(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) u[k] = -theta3 * sign_of(e[k]) - theta4 * e[k];
  return u;
}

/// Rates of (coupling-or-linear gain, sign gain) for the adaptive network rules.
struct NetworkGainRates {
  /// theta1' or theta4'.
  double linear_gain = 0.0;
  /// theta3'.
  double sign_gain = 0.0;
};

/// Rule arithmetic of the adaptive network laws with S(t) = sum_i e_i^T e_i:
///
///   linear' = d1 mu(t) S(t) above one, d2 S(t)^(1/2) in the unit ball, 0 at the origin
///   theta3' = 0 above one, d3 in the unit ball, 0 at the origin
inline NetworkGainRates network_gain_rates(const AdaptiveRates& rates, GainMode mode, double mu,
                                           double sum_sq) {
  NetworkGainRates r;
  switch (mode) {
    case GainMode::AboveOne:
      r.linear_gain = rates.d1 * mu * sum_sq;
      break;
    case GainMode::InUnitBall:
      r.linear_gain = rates.d2 * std::sqrt(sum_sq);
      r.sign_gain = rates.d3;
      break;
    case GainMode::AtOrigin:
      break;
  }
  return r;
}

/// Network adaptive gains: `linear_gain` is theta1 or theta4 depending on the variant.
struct NetworkGainState {
  double linear_gain = 0.0;
  double sign_gain = 0.0;
  AdaptiveRates rates{0.05, 0.05, 0.02};
  GainMode mode = GainMode::AboveOne;
};

/// One Euler step of the adaptive network rules at time t on the error trajectory.
inline NetworkGainState adaptive_network_update(const NetworkGainState& state,
                                                const History& error_traj, double t,
                                                const RateFunction& rate,
                                                const DelayProfile& profile,
                                                double zero_tol = 1e-9) {
  NetworkGainState next = state;
  next.mode = classify_window(window_sup(error_traj, t, profile, WindowFunctional::SqNorm2), true,
                              zero_tol);
  const auto e = error_traj.query(t);
  const auto r = network_gain_rates(state.rates, next.mode, rate.mu(t), sq_norm2(e));
  next.linear_gain += error_traj.step() * r.linear_gain;
  next.sign_gain += error_traj.step() * r.sign_gain;
  return next;
}

/// Integrator gain hook for the adaptive network rules. Gains are stored as
/// (theta3, theta4) or (theta1, theta3) per the variant, all starting at 0.
class NetworkAdaptiveLaw {
 public:
  NetworkAdaptiveLaw(NetworkAdaptive config, RateFunction rate, DelayProfile profile,
                     double zero_tol = 1e-9)
      : config_(config), rate_(rate), profile_(std::move(profile)), zero_tol_(zero_tol) {
    config_.rates.validate();
  }

  std::size_t gain_count() const { return 2; }
  std::vector<double> initial_gains() const { return {0.0, 0.0}; }
  std::vector<std::string> gain_names() const {
    if (config_.variant == NetworkAdaptVariant::Theta3Theta4) return {"theta3", "theta4"};
    return {"theta1", "theta3"};
  }
  /// Column of the sign gain theta3 and of the adapted linear/coupling gain.
  std::size_t sign_column() const {
    return config_.variant == NetworkAdaptVariant::Theta3Theta4 ? 0 : 1;
  }
  std::size_t linear_column() const { return 1 - sign_column(); }

  void rates(double t, const History& hist, std::span<const double>, std::span<double> out) {
    const double a = profile_.window_start(t);
    const std::size_t last = hist.size() - 1;
    std::vector<double> left(hist.dimension());
    hist.query(a, left);
    const auto e = hist.state(last);
    tracker_.advance(last, [&](std::size_t k) { return sq_norm2(hist.state(k)); });
    tracker_.retire_before(hist.first_index_at_or_after(a));
    const double sum_sq = sq_norm2(e);
    mode_ = classify_window(tracker_.max(sq_norm2(left), sum_sq), true, zero_tol_);
    const auto r = network_gain_rates(config_.rates, mode_, rate_.mu(t), sum_sq);
    out[sign_column()] = r.sign_gain;
    out[linear_column()] = r.linear_gain;
  }

  GainMode mode() const noexcept { return mode_; }

 private:
  NetworkAdaptive config_;
  RateFunction rate_;
  DelayProfile profile_;
  double zero_tol_;
  WindowMaxTracker tracker_;
  GainMode mode_ = GainMode::AboveOne;
};

}  // namespace ftd
