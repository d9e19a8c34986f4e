#pragma once

// Lyapunov and maximum-value functionals along computed trajectories, contact
// point checks, and phase/settling detection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftd/controllers.hpp"
#include "ftd/delay.hpp"
#include "ftd/error.hpp"
#include "ftd/history.hpp"

namespace ftd {

enum class Functional {
  V1, V2, V3, V4, V5, V6, V7, V8,
  Vbar1, Vbar2, Vbar3, Vbar4, Vbar5, Vbar6, Vbar7, Vbar8,
};

inline const char* to_string(Functional f) {
  static constexpr const char* names[] = {"V1",    "V2",    "V3",    "V4",    "V5",    "V6",
                                          "V7",    "V8",    "Vbar1", "Vbar2", "Vbar3", "Vbar4",
                                          "Vbar5", "Vbar6", "Vbar7", "Vbar8"};
  return names[static_cast<int>(f)];
}

inline Functional functional_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Functional::Vbar8); ++i) {
    if (s == to_string(static_cast<Functional>(i))) return static_cast<Functional>(i);
  }
  throw std::invalid_argument("unknown functional '" + s + "'");
}

/// Inputs of the functionals. Gain columns refer to the trajectory's gain rows:
/// for scalar runs (c3, c4); for network runs the sign gain theta3 and the
/// adapted coupling gain theta1.
struct FunctionalParams {
  RateFunction rate = RateFunction::power(0.1);
  /// Node weights for the network functionals.
  std::vector<double> xi;
  /// Linear decay slope of the Phase II functionals.
  std::optional<double> eps2;
  /// Targets of the adapted gains (c3*, c4*) or (theta3*, theta1*).
  std::optional<double> sign_star;
  std::optional<double> linear_star;
  AdaptiveRates rates;
  /// |lambda_max| weight on the coupling-gain term of Vbar3/Vbar4.
  double lambda_weight = 1.0;
  std::size_t sign_column = 0;
  std::size_t linear_column = 1;
  /// Start of the trace; defaults to the rate function's monitor start.
  std::optional<double> start_time;
  std::optional<double> end_time;
  /// States with 2-norm at or below this are not contact points.
  double zero_tol = 1e-9;
  double trace_tol = 1e-9;
};

namespace detail {

inline bool uses_xi(Functional f) {
  return f == Functional::Vbar1 || f == Functional::Vbar2 || f == Functional::Vbar3 ||
         f == Functional::Vbar4;
}

inline bool uses_eps2(Functional f) {
  switch (f) {
    case Functional::V2: case Functional::V4: case Functional::V6: case Functional::V8:
    case Functional::Vbar2: case Functional::Vbar4: case Functional::Vbar6: case Functional::Vbar8:
      return true;
    default:
      return false;
  }
}

inline bool uses_sign_star(Functional f) {
  return f == Functional::V4 || f == Functional::Vbar4 || f == Functional::Vbar6 ||
         f == Functional::Vbar8;
}

inline bool uses_linear_star(Functional f) {
  return f == Functional::V3 || f == Functional::V4 || f == Functional::Vbar3 ||
         f == Functional::Vbar4 || f == Functional::Vbar5 || f == Functional::Vbar6 ||
         f == Functional::Vbar7 || f == Functional::Vbar8;
}

}  // namespace detail

/// Value of functional `f` at time t for state x and gain row g.
inline double functional_value(Functional f, const FunctionalParams& p, double t,
                               std::span<const double> x, std::span<const double> g) {
  auto gain_term = [&](bool sign, double weight) {
    const std::size_t col = sign ? p.sign_column : p.linear_column;
    if (col >= g.size()) throw std::invalid_argument("functional needs adaptive gains");
    const double d = g[col] - (sign ? *p.sign_star : *p.linear_star);
    return weight * d * d;
  };
  const double mu = p.rate.mu(t);
  const double e2 = p.eps2.value_or(0.0);
  const auto& r = p.rates;
  switch (f) {
    case Functional::V1: return mu * sq_norm2(x);
    case Functional::V2: return std::sqrt(sq_norm2(x)) + e2 * t;
    case Functional::V3: return mu * sq_norm2(x) + gain_term(false, 1.0 / r.d2);
    case Functional::V4:
      return std::sqrt(sq_norm2(x)) + gain_term(true, 0.5 / r.d1) + gain_term(false, 0.5 / r.d3) +
             e2 * t;
    case Functional::V5: return mu * norm1(x);
    case Functional::V6: return norm1(x) + e2 * t;
    case Functional::V7: return mu * norm_inf(x);
    case Functional::V8: return norm_inf(x) + e2 * t;
    case Functional::Vbar1: return mu * weighted_sq(x, p.xi);
    case Functional::Vbar2: return std::sqrt(weighted_sq(x, p.xi)) + e2 * t;
    case Functional::Vbar3:
      return mu * weighted_sq(x, p.xi) + gain_term(false, p.lambda_weight / r.d1);
    case Functional::Vbar4:
      return std::sqrt(weighted_sq(x, p.xi)) + gain_term(false, 0.5 * p.lambda_weight / r.d2) +
             gain_term(true, 0.5 / r.d3) + e2 * t;
    case Functional::Vbar5: return mu * norm1(x) + gain_term(false, 0.5 / r.d2);
    case Functional::Vbar6:
      return norm1(x) + gain_term(true, 0.5 / r.d1) + gain_term(false, 0.5 / r.d3) + e2 * t;
    case Functional::Vbar7: return mu * norm_inf(x) + gain_term(false, 0.5 / r.d2);
    case Functional::Vbar8:
      return norm_inf(x) + gain_term(true, 0.5 / r.d1) + gain_term(false, 0.5 / r.d3) + e2 * t;
  }
  return 0.0;
}

struct LyapunovTrace {
  Functional id = Functional::V1;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> window_sups;
  std::vector<double> contact_times;
  /// Positions of contact_times within `times`.
  std::vector<std::size_t> contact_indices;
};

/// Value of the functional on the trajectory at an arbitrary time (the left
/// window end may fall between grid points or before t0).
inline double functional_on_traj(Functional f, const FunctionalParams& p, const History& traj,
                                 double t) {
  const auto x = traj.query(t);
  std::vector<double> g;
  if (traj.gain_dimension() > 0) {
    g = t <= traj.t0() ? std::vector<double>(traj.gains(0).begin(), traj.gains(0).end())
                       : traj.query_gains(t);
  }
  return functional_value(f, p, t, x, g);
}

/// V and W = sup over [t - pi(t), t] of V on the grid from the start time.
/// Window maxima come from the incremental tracker.
inline LyapunovTrace trace_functional(const History& traj, Functional f,
                                      const FunctionalParams& p, const DelayProfile& profile) {
  if (detail::uses_xi(f)) {
    if (p.xi.empty()) throw std::invalid_argument(std::string(to_string(f)) + " requires xi");
    if (traj.dimension() % p.xi.size() != 0) {
      throw std::invalid_argument("xi size must divide the state dimension");
    }
  }
  if (detail::uses_eps2(f) && !p.eps2) {
    throw std::invalid_argument(std::string(to_string(f)) + " requires eps2");
  }
  if (detail::uses_sign_star(f) && !p.sign_star) {
    throw std::invalid_argument(std::string(to_string(f)) + " requires sign_star");
  }
  if (detail::uses_linear_star(f) && !p.linear_star) {
    throw std::invalid_argument(std::string(to_string(f)) + " requires linear_star");
  }
  if (traj.empty()) throw std::invalid_argument("empty trajectory");

  LyapunovTrace tr;
  tr.id = f;
  const double start = std::max(p.start_time.value_or(p.rate.default_monitor_start()), traj.t0());
  const double end = std::min(p.end_time.value_or(traj.current_time()), traj.current_time());
  if (start > end) return tr;

  auto grid_value = [&](std::size_t k) {
    return functional_value(f, p, traj.time(k), traj.state(k),
                            traj.gain_dimension() ? traj.gains(k) : std::span<const double>{});
  };

  WindowMaxTracker tracker;
  const std::size_t k0 = traj.first_index_at_or_after(start);
  const std::size_t k1 = traj.last_index_at_or_before(end);
  // Skip grid points that can never re-enter a window.
  const std::size_t skip = traj.first_index_at_or_after(profile.window_start(traj.time(k0)));
  tracker.advance(skip == 0 ? 0 : skip - 1, [&](std::size_t) { return 0.0; });
  tracker.retire_before(skip);

  for (std::size_t k = k0; k <= k1; ++k) {
    const double t = traj.time(k);
    const double a = profile.window_start(t);
    tracker.advance(k, grid_value);
    tracker.retire_before(traj.first_index_at_or_after(a));
    const double v = grid_value(k);
    const double w = tracker.max(functional_on_traj(f, p, traj, a), v);
    tr.times.push_back(t);
    tr.values.push_back(v);
    tr.window_sups.push_back(w);
    if (std::abs(v - w) <= p.trace_tol * std::abs(w) &&
        std::sqrt(sq_norm2(traj.state(k))) > p.zero_tol) {
      tr.contact_times.push_back(t);
      tr.contact_indices.push_back(tr.times.size() - 1);
    }
  }
  return tr;
}

/// Brute-force W at time t (oracle for the incremental tracker).
inline double window_sup_brute(const History& traj, Functional f, const FunctionalParams& p,
                               const DelayProfile& profile, double t) {
  return window_sup_over(traj, profile.window_start(t), t,
                         [&](double s, std::span<const double>) {
                           return functional_on_traj(f, p, traj, s);
                         });
}

struct ContactCheck {
  double time;
  double derivative;
  bool pass;
};

/// Central-difference dV/dt at each contact point; pass iff dV/dt < deriv_tol.
/// Contacts at the ends of the trace use one-sided differences.
inline std::vector<ContactCheck> contact_point_decrease(const LyapunovTrace& trace,
                                                        double deriv_tol = 1e-6) {
  std::vector<ContactCheck> out;
  const auto& v = trace.values;
  const auto& t = trace.times;
  for (std::size_t idx : trace.contact_indices) {
    double d = 0.0;
    if (v.size() < 2) {
      d = 0.0;
    } else if (idx == 0) {
      d = (v[1] - v[0]) / (t[1] - t[0]);
    } else if (idx + 1 == v.size()) {
      d = (v[idx] - v[idx - 1]) / (t[idx] - t[idx - 1]);
    } else {
      d = (v[idx + 1] - v[idx - 1]) / (t[idx + 1] - t[idx - 1]);
    }
    out.push_back({t[idx], d, d < deriv_tol});
  }
  return out;
}

inline std::size_t count_failures(const std::vector<ContactCheck>& checks) {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const ContactCheck& c) { return !c.pass; }));
}

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct PhaseReport {
  /// First grid time where the Phase I window supremum is <= 1; +inf if never.
  double t1 = kNever;
  /// First grid time after which the norm stays <= zero_tol; +inf if never.
  double t_settle = kNever;
  std::size_t envelope_violations = 0;
  double eps2 = 0.0;
};

/// Phase boundary, settling time and Phase II envelope check.
///
/// T1 uses the window sup of p^T p for the 2-norm and of the plain norm
/// otherwise. Envelope violations are grid points in (T1, T_settle] where the
/// norm exceeds 1 - eps2 (t - T1) + envelope_tol.
inline PhaseReport detect_phases(const History& traj, const DelayProfile& profile, Norm norm,
                                 double eps2, double zero_tol = 1e-9,
                                 double envelope_tol = 1e-9) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  PhaseReport r;
  r.eps2 = eps2;
  const auto fn = switching_functional(norm);
  const std::size_t n = traj.size();

  WindowMaxTracker tracker;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = traj.time(k);
    const double a = profile.window_start(t);
    if (a < traj.t0() - 1e-9 * traj.step() && !traj.has_prehistory()) continue;
    tracker.advance(k, [&](std::size_t j) { return evaluate_functional(fn, traj.state(j)); });
    tracker.retire_before(traj.first_index_at_or_after(a));
    const double left = evaluate_functional(fn, traj.query(a));
    if (tracker.max(left, evaluate_functional(fn, traj.state(k))) <= 1.0) {
      r.t1 = t;
      break;
    }
  }

  std::size_t settle = n;
  for (std::size_t k = n; k-- > 0;) {
    if (norm_value(norm, traj.state(k)) > zero_tol) break;
    settle = k;
  }
  if (settle < n) r.t_settle = traj.time(settle);

  if (std::isfinite(r.t1)) {
    const double last = std::isfinite(r.t_settle) ? r.t_settle : traj.current_time();
    for (std::size_t k = traj.first_index_at_or_after(r.t1); k < n; ++k) {
      const double t = traj.time(k);
      if (t <= r.t1) continue;
      if (t > last) break;
      if (norm_value(norm, traj.state(k)) > 1.0 - eps2 * (t - r.t1) + envelope_tol) {
        ++r.envelope_violations;
      }
    }
  }
  return r;
}

}  // namespace ftd
