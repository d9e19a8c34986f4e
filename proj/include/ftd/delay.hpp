#pragma once

// Delay profiles pi_i(t) with a common envelope pi(t), and the rate functions
// mu(t) whose asymptotic constants (beta, eta) feed every feasibility check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ftd/error.hpp"

namespace ftd {

enum class DelayKind { Proportional, Constant, PerComponentSin, CustomGrid, Custom };

inline const char* to_string(DelayKind kind) {
  switch (kind) {
    case DelayKind::Proportional: return "proportional";
    case DelayKind::Constant: return "constant";
    case DelayKind::PerComponentSin: return "per_component_sin";
    case DelayKind::CustomGrid: return "custom_grid";
    case DelayKind::Custom: return "custom";
  }
  return "unknown";
}

/// Per-component delays pi_i(t) bounded by an envelope pi(t).
///
/// Components are indexed by a flat index. Scalar systems use one component
/// per state coordinate; networks use the pair index i*N + j (0-based), so
/// pi_ij lives at component i*N + j.
class DelayProfile {
 public:
  using EnvelopeFn = std::function<double(double)>;
  using ComponentFn = std::function<double(std::size_t, double)>;

  /// pi_i(t) = q t for every component, 0 < q < 1.
  static DelayProfile proportional(double q, std::size_t components = 1) {
    if (!(q > 0.0 && q < 1.0)) {
      throw std::invalid_argument("proportional delay ratio must lie in (0, 1)");
    }
    return DelayProfile(Proportional{q}, components);
  }

  /// pi_i(t) = delay for every component, delay >= 0.
  static DelayProfile constant(double delay, std::size_t components = 1) {
    if (!(delay >= 0.0) || !std::isfinite(delay)) {
      throw std::invalid_argument("constant delay must be finite and >= 0");
    }
    return DelayProfile(Constant{delay}, components);
  }

  /// Network family pi_ij(t) = scale (1 - amplitude |sin(i + 2j)|) t with
  /// 1-based node indices i, j and envelope scale * t.
  static DelayProfile per_component_sin(std::size_t nodes, double scale = 0.5,
                                        double amplitude = 0.1) {
    if (nodes == 0) throw std::invalid_argument("per_component_sin needs at least one node");
    if (!(scale > 0.0 && scale < 1.0)) {
      throw std::invalid_argument("per_component_sin scale must lie in (0, 1)");
    }
    if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
      throw std::invalid_argument("per_component_sin amplitude must lie in [0, 1]");
    }
    return DelayProfile(PerComponentSin{nodes, scale, amplitude}, nodes * nodes);
  }

  /// Piecewise-linear delays sampled on a time grid. `values[i][k]` is the
  /// delay of component i at `times[k]`; values are held constant outside the
  /// grid. The envelope is the pointwise maximum over components.
  static DelayProfile custom_grid(std::vector<double> times,
                                  std::vector<std::vector<double>> values) {
    if (times.size() < 2) throw std::invalid_argument("custom_grid needs at least two times");
    if (!std::is_sorted(times.begin(), times.end()) ||
        std::adjacent_find(times.begin(), times.end()) != times.end()) {
      throw std::invalid_argument("custom_grid times must be strictly increasing");
    }
    if (values.empty()) throw std::invalid_argument("custom_grid needs at least one component");
    for (const auto& row : values) {
      if (row.size() != times.size()) {
        throw std::invalid_argument("custom_grid component length differs from times");
      }
      for (double v : row) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument("custom_grid delays must be finite and >= 0");
        }
      }
    }
    const std::size_t count = values.size();
    return DelayProfile(
        CustomGrid{std::make_shared<const GridData>(GridData{std::move(times), std::move(values)})},
        count);
  }

  /// Arbitrary callables. Supported for simulation only; `asymptotics` rejects it.
  static DelayProfile custom(std::size_t components, EnvelopeFn envelope, ComponentFn delays) {
    if (!envelope || !delays) throw std::invalid_argument("custom delay needs both callables");
    return DelayProfile(Custom{std::move(envelope), std::move(delays)}, components);
  }

  DelayKind kind() const {
    return std::visit([](const auto& k) { return k.kind; }, impl_);
  }

  std::size_t component_count() const noexcept { return components_; }

  double envelope(double t) const {
    return std::visit([t](const auto& k) { return k.envelope(t); }, impl_);
  }

  /// pi_i(t). Throws std::out_of_range for a bad index and std::invalid_argument for t < 0.
  double eval(std::size_t i, double t) const {
    if (i >= components_) throw std::out_of_range("delay component index out of range");
    if (t < 0.0) throw std::invalid_argument("delay evaluated at negative time");
    return eval_unchecked(i, t);
  }

  double eval_unchecked(std::size_t i, double t) const {
    return std::visit([i, t](const auto& k) { return k.component(i, t); }, impl_);
  }

  /// Left end t - pi(t) of the maximum-value window at time t.
  double window_start(double t) const { return t - envelope(t); }

  /// Ratio q when the envelope is q t (proportional and per-component-sin kinds).
  bool has_proportional_envelope() const {
    return kind() == DelayKind::Proportional || kind() == DelayKind::PerComponentSin;
  }
  double envelope_ratio() const {
    if (const auto* p = std::get_if<Proportional>(&impl_)) return p->q;
    if (const auto* s = std::get_if<PerComponentSin>(&impl_)) return s->scale;
    throw std::logic_error("delay profile has no proportional envelope");
  }
  double constant_value() const {
    if (const auto* c = std::get_if<Constant>(&impl_)) return c->delay;
    throw std::logic_error("delay profile is not constant");
  }

  /// Checks 0 <= pi_i(t) <= pi(t) and that t - pi(t) is nondecreasing and
  /// (unless `allow_prehistory`) >= t0 on the grid t0 + k h, k h <= horizon - t0.
  /// Returns an empty string when valid, otherwise a description of the first failure.
  std::string validate_on_grid(double t0, double horizon, double h,
                               bool allow_prehistory = false) const {
    const auto steps = static_cast<std::size_t>(std::floor((horizon - t0) / h + 1e-9));
    double previous_start = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = t0 + static_cast<double>(k) * h;
      const double env = envelope(t);
      for (std::size_t i = 0; i < components_; ++i) {
        const double d = eval_unchecked(i, t);
        if (d < 0.0 || d > env * (1.0 + 1e-12) + 1e-15) {
          return "component " + std::to_string(i) + " violates 0 <= pi_i <= pi at t=" +
                 std::to_string(t);
        }
      }
      const double start = t - env;
      if (start < previous_start - 1e-12) {
        return "t - pi(t) decreases at t=" + std::to_string(t);
      }
      if (!allow_prehistory && start < t0 - 1e-12) {
        return "t - pi(t) precedes the start time at t=" + std::to_string(t);
      }
      previous_start = start;
    }
    return {};
  }

 private:
  struct Proportional {
    static constexpr DelayKind kind = DelayKind::Proportional;
    double q;
    double envelope(double t) const { return q * t; }
    double component(std::size_t, double t) const { return q * t; }
  };
  struct Constant {
    static constexpr DelayKind kind = DelayKind::Constant;
    double delay;
    double envelope(double) const { return delay; }
    double component(std::size_t, double) const { return delay; }
  };
  struct PerComponentSin {
    static constexpr DelayKind kind = DelayKind::PerComponentSin;
    std::size_t nodes;
    double scale;
    double amplitude;
    double envelope(double t) const { return scale * t; }
    double component(std::size_t index, double t) const {
      const auto i = static_cast<double>(index / nodes + 1);
      const auto j = static_cast<double>(index % nodes + 1);
      return scale * (1.0 - amplitude * std::abs(std::sin(i + 2.0 * j))) * t;
    }
  };
  struct GridData {
    std::vector<double> times;
    std::vector<std::vector<double>> values;
  };
  struct CustomGrid {
    static constexpr DelayKind kind = DelayKind::CustomGrid;
    std::shared_ptr<const GridData> data;
    double component(std::size_t i, double t) const {
      const auto& ts = data->times;
      const auto& vs = data->values[i];
      if (t <= ts.front()) return vs.front();
      if (t >= ts.back()) return vs.back();
      const auto it = std::upper_bound(ts.begin(), ts.end(), t);
      const auto k = static_cast<std::size_t>(it - ts.begin()) - 1;
      const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
      return vs[k] + w * (vs[k + 1] - vs[k]);
    }
    double envelope(double t) const {
      double m = 0.0;
      for (std::size_t i = 0; i < data->values.size(); ++i) m = std::max(m, component(i, t));
      return m;
    }
  };
  struct Custom {
    static constexpr DelayKind kind = DelayKind::Custom;
    EnvelopeFn env;
    ComponentFn delays;
    double envelope(double t) const { return env(t); }
    double component(std::size_t i, double t) const { return delays(i, t); }
  };

  using Impl = std::variant<Proportional, Constant, PerComponentSin, CustomGrid, Custom>;

  DelayProfile(Impl impl, std::size_t components) : impl_(std::move(impl)), components_(components) {
    if (components_ == 0) throw std::invalid_argument("delay profile needs at least one component");
  }

  Impl impl_;
  std::size_t components_;
};

enum class RateKind { Power, Exponential };

/// Nondecreasing weight mu(t): t^rho (power) or e^(w t) (exponential).
class RateFunction {
 public:
  static RateFunction power(double exponent) {
    if (!(exponent > 0.0) || !std::isfinite(exponent)) {
      throw std::invalid_argument("power rate exponent must be > 0");
    }
    return RateFunction(RateKind::Power, exponent);
  }
  static RateFunction exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      throw std::invalid_argument("exponential rate must be > 0");
    }
    return RateFunction(RateKind::Exponential, rate);
  }

  RateKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double mu(double t) const {
    if (kind_ == RateKind::Power) return t <= 0.0 ? 0.0 : std::pow(t, param_);
    return std::exp(param_ * t);
  }

  double mu_dot(double t) const {
    if (kind_ == RateKind::Power) return t <= 0.0 ? 0.0 : param_ * std::pow(t, param_ - 1.0);
    return param_ * std::exp(param_ * t);
  }

  /// Time from which mu-weighted functionals are evaluated (mu(0) = 0 for powers).
  double default_monitor_start() const { return kind_ == RateKind::Power ? 1.0 : 0.0; }

 private:
  RateFunction(RateKind kind, double param) : kind_(kind), param_(param) {}

  RateKind kind_;
  double param_;
};

/// beta = limsup mu'/mu and 1 + eta = limsup mu(t)/mu(t - pi(t)).
struct Asymptotics {
  double beta;
  double eta;
};

/// Closed-form asymptotics for the two families with known limits:
/// power rates over proportional envelopes and exponential rates over constant delays.
inline Asymptotics asymptotics(const RateFunction& rate, const DelayProfile& profile) {
  if (rate.kind() == RateKind::Power && profile.has_proportional_envelope()) {
    const double q = profile.envelope_ratio();
    return {0.0, std::pow(1.0 - q, -rate.parameter()) - 1.0};
  }
  if (rate.kind() == RateKind::Exponential && profile.kind() == DelayKind::Constant) {
    return {rate.parameter(), std::expm1(rate.parameter() * profile.constant_value())};
  }
  throw IncompatibleAsymptotics(std::string("no closed-form asymptotics for ") +
                                (rate.kind() == RateKind::Power ? "power" : "exponential") +
                                " rate with " + to_string(profile.kind()) +
                                " delay; supply beta and eta manually");
}

}  // namespace ftd
