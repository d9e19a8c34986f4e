#pragma once

// Fixed-step integration of delayed systems with discontinuous sign feedback
//
//   x'(t) = drift(t, x(t), past states) - K(t) .* sgn(x(t))
//
// The drift and the switching gains K are supplied by the system; past states
// are read from the dense history. Sign discontinuities are handled with the
// one-step sliding band: a component that crosses zero within a step and lands
// inside the band is projected to exactly zero, and a component sitting at
// zero stays there while its drift is dominated by the switching gain.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftd/error.hpp"
#include "ftd/history.hpp"

namespace ftd {

enum class Method { Euler, Rk4FrozenDelay };

inline const char* to_string(Method m) {
  return m == Method::Euler ? "euler" : "rk4_frozen_delay";
}

struct IntegratorConfig {
  double t0 = 0.0;
  double h = 1e-3;
  double horizon = 30.0;
  Method method = Method::Euler;
  /// Projection band; when unset each component uses K_i h (one sliding step).
  std::optional<double> zero_band;
  /// Norm below which the state counts as having reached the origin.
  double zero_tol = 1e-9;
  /// Extend the initial state backwards as a constant (needed for constant delays).
  bool constant_prehistory = true;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("integrator.h must be > 0");
    if (!(horizon > t0)) throw std::invalid_argument("integrator.horizon must exceed t0");
    if (zero_band && !(*zero_band >= 0.0)) {
      throw std::invalid_argument("integrator.zero_band must be >= 0");
    }
    if (!(zero_tol > 0.0)) throw std::invalid_argument("integrator.zero_tol must be > 0");
  }

  std::size_t steps() const {
    return static_cast<std::size_t>(std::llround((horizon - t0) / h));
  }
};

/// What a system sees when asked for its right-hand side.
struct StepContext {
  /// Stage time.
  double time;
  /// Time at which delays are resolved (equals `time` for Euler, the step
  /// start for frozen-delay RK4).
  double delay_time;
  /// Stored trajectory up to the current step start.
  const History& history;
  /// Adaptive gains at the step start (empty for static systems).
  std::span<const double> gains;
};

template <class S>
concept SwitchedDelaySystem =
    requires(const S& s, const StepContext& ctx, std::span<const double> x, std::span<double> out) {
      { s.dimension() } -> std::convertible_to<std::size_t>;
      s.evaluate(ctx, x, out, out);
    };

/// Adaptive gain law advanced alongside the state.
template <class H>
concept GainHook = requires(H& hook, double t, const History& hist, std::span<const double> g,
                            std::span<double> out) {
  { hook.gain_count() } -> std::convertible_to<std::size_t>;
  { hook.initial_gains() } -> std::convertible_to<std::vector<double>>;
  hook.rates(t, hist, g, out);
};

/// Gain hook for static systems.
struct NoGains {
  std::size_t gain_count() const { return 0; }
  std::vector<double> initial_gains() const { return {}; }
  void rates(double, const History&, std::span<const double>, std::span<double>) {}
};

namespace detail {

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Combine drift and switching gain into a derivative. At an exact zero the
/// component keeps still while |drift| <= K and otherwise leaves along the
/// reduced drift.
inline void switched_derivative(std::span<const double> x, std::span<const double> drift,
                                std::span<const double> gain, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      out[i] = drift[i] - gain[i] * sign_of(x[i]);
    } else if (std::abs(drift[i]) <= gain[i]) {
      out[i] = 0.0;
    } else {
      out[i] = drift[i] - gain[i] * sign_of(drift[i]);
    }
  }
}

}  // namespace detail

/// Integrate `system` from `initial_state` over [config.t0, config.horizon].
///
/// The returned history holds one row per grid point and, when the hook
/// carries gains, the gain trajectory alongside. Throws DivergenceError if a
/// state component becomes non-finite.
template <SwitchedDelaySystem S, GainHook H = NoGains>
History integrate(const S& system, std::span<const double> initial_state,
                  const IntegratorConfig& config, H&& hook = H{}) {
  config.validate();
  const std::size_t dim = system.dimension();
  if (initial_state.size() != dim) {
    throw std::invalid_argument("initial state has dimension " +
                                std::to_string(initial_state.size()) + ", expected " +
                                std::to_string(dim));
  }
  const std::size_t gdim = hook.gain_count();
  const std::size_t steps = config.steps();

  History hist(config.t0, config.h, dim, gdim);
  hist.reserve(steps + 1);
  if (config.constant_prehistory) {
    hist.set_prehistory(std::vector<double>(initial_state.begin(), initial_state.end()));
  }
  std::vector<double> gains = hook.initial_gains();
  if (gains.size() != gdim) throw std::logic_error("gain hook returned wrong initial size");
  hist.push(initial_state, gains);

  std::vector<double> x(initial_state.begin(), initial_state.end());
  std::vector<double> next(dim), drift(dim), gain(dim), deriv(dim), stage(dim), acc(dim);
  std::vector<double> step_gain(dim);
  std::vector<double> gain_rates(gdim);
  const double h = config.h;

  auto eval = [&](double t, double delay_t, std::span<const double> state,
                  std::span<double> out, std::span<double> k_out) {
    const StepContext ctx{t, delay_t, hist, gains};
    system.evaluate(ctx, state, drift, k_out);
    detail::switched_derivative(state, drift, k_out, out);
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = hist.time(k);
    if (config.method == Method::Euler) {
      eval(t, t, x, deriv, step_gain);
      for (std::size_t i = 0; i < dim; ++i) next[i] = x[i] + h * deriv[i];
    } else {
      eval(t, t, x, deriv, step_gain);
      for (std::size_t i = 0; i < dim; ++i) {
        acc[i] = deriv[i];
        stage[i] = x[i] + 0.5 * h * deriv[i];
      }
      eval(t + 0.5 * h, t, stage, deriv, gain);
      for (std::size_t i = 0; i < dim; ++i) {
        acc[i] += 2.0 * deriv[i];
        stage[i] = x[i] + 0.5 * h * deriv[i];
      }
      eval(t + 0.5 * h, t, stage, deriv, gain);
      for (std::size_t i = 0; i < dim; ++i) {
        acc[i] += 2.0 * deriv[i];
        stage[i] = x[i] + h * deriv[i];
      }
      eval(t + h, t, stage, deriv, gain);
      for (std::size_t i = 0; i < dim; ++i) {
        acc[i] += deriv[i];
        next[i] = x[i] + h * acc[i] / 6.0;
      }
    }

    if (gdim > 0) {
      hook.rates(t, hist, gains, gain_rates);
      for (std::size_t j = 0; j < gdim; ++j) gains[j] += h * gain_rates[j];
    }

    for (std::size_t i = 0; i < dim; ++i) {
      if (!std::isfinite(next[i])) {
        throw DivergenceError(t + h, "state diverged at t=" + std::to_string(t + h));
      }
      if (x[i] == 0.0 || next[i] == 0.0) continue;
      const bool crossed = std::signbit(next[i]) != std::signbit(x[i]);
      const double band = config.zero_band.value_or(step_gain[i] * h);
      if (crossed && std::abs(next[i]) <= band) next[i] = 0.0;
    }
    x.swap(next);
    hist.push(x, gains);
  }
  return hist;
}

}  // namespace ftd
