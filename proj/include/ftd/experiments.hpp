#pragma once

// Scalar closed loops, the two reference experiments, and the analysis bundle
// (condition report, phases, contact checks) shared by the CLI and the tests.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftd/conditions.hpp"
#include "ftd/controllers.hpp"
#include "ftd/delay.hpp"
#include "ftd/history.hpp"
#include "ftd/integrator.hpp"
#include "ftd/monitors.hpp"
#include "ftd/network.hpp"

namespace ftd {

/// p_i' = c1 p_i + c2 p_i(t - pi_i(t)) - sgn(p_i)(c3 + c4 |p_i|).
///
/// With `adaptive` set, c3 and c4 are read from the gain row (columns 0, 1).
class ScalarSystem {
 public:
  ScalarSystem(StaticScalarGains gains, DelayProfile delay, std::size_t dimension,
               bool adaptive = false)
      : g_(gains), delay_(std::move(delay)), dim_(dimension), adaptive_(adaptive) {
    if (dim_ == 0) throw std::invalid_argument("system dimension must be > 0");
    if (delay_.component_count() != 1 && delay_.component_count() != dim_) {
      throw std::invalid_argument("delay needs one component per state or one shared component");
    }
  }

  std::size_t dimension() const { return dim_; }

  void evaluate(const StepContext& ctx, std::span<const double> p, std::span<double> drift,
                std::span<double> gain) const {
    const double c3 = adaptive_ ? ctx.gains[0] : g_.c3;
    const double c4 = adaptive_ ? ctx.gains[1] : g_.c4;
    const bool shared = delay_.component_count() == 1;
    for (std::size_t i = 0; i < dim_; ++i) {
      double delayed = 0.0;
      if (g_.c2 != 0.0) {
        const double s = ctx.delay_time - delay_.eval_unchecked(shared ? 0 : i, ctx.delay_time);
        delayed = ctx.history.query_component(s, i);
      }
      drift[i] = (g_.c1 - c4) * p[i] + g_.c2 * delayed;
      gain[i] = c3;
    }
  }

 private:
  StaticScalarGains g_;
  DelayProfile delay_;
  std::size_t dim_;
  bool adaptive_;
};

struct ScalarExperiment {
  StaticScalarGains gains;
  std::vector<double> initial;
  DelayProfile delay = DelayProfile::proportional(0.5);
  RateFunction rate = RateFunction::power(0.1);
  IntegratorConfig integrator;
  Norm norm = Norm::Two;
  /// Adaptive rules replace c3 and c4 (both start at 0).
  std::optional<AdaptiveRates> adaptive;
  std::optional<double> eps1;
  double kappa = 0.9;
  std::optional<double> monitor_start;

  void validate() const {
    gains.validate();
    integrator.validate();
    if (initial.empty()) throw std::invalid_argument("initial state must be non-empty");
    if (adaptive) adaptive->validate();
    if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0, 1]");
    const auto err = delay.validate_on_grid(integrator.t0, integrator.horizon, integrator.h,
                                            integrator.constant_prehistory);
    if (!err.empty()) throw std::invalid_argument("delay profile: " + err);
  }
};

inline History simulate_scalar(const ScalarExperiment& exp) {
  exp.validate();
  const ScalarSystem sys(exp.gains, exp.delay, exp.initial.size(), exp.adaptive.has_value());
  if (exp.adaptive) {
    return integrate(sys, exp.initial, exp.integrator,
                     ScalarAdaptiveLaw(exp.norm, *exp.adaptive, exp.rate, exp.delay,
                                       exp.integrator.zero_tol));
  }
  return integrate(sys, exp.initial, exp.integrator);
}

/// Condition report for the experiment's norm, with (beta, eta) from the
/// closed-form asymptotics. Adaptive runs are checked at their final gains.
inline ConditionReport scalar_condition(const ScalarExperiment& exp,
                                        std::optional<std::span<const double>> final_gains = {}) {
  StaticScalarGains g = exp.gains;
  if (final_gains && final_gains->size() >= 2) {
    g.c3 = (*final_gains)[0];
    g.c4 = (*final_gains)[1];
  }
  const auto [beta, eta] = asymptotics(exp.rate, exp.delay);
  return check_scalar_theorem(g, exp.initial.size(), beta, eta, exp.norm, exp.eps1);
}

inline Functional phase_one_functional(Norm n) {
  switch (n) {
    case Norm::Two: return Functional::V1;
    case Norm::One: return Functional::V5;
    case Norm::Inf: return Functional::V7;
  }
  return Functional::V1;
}

inline Functional phase_two_functional(Norm n) {
  switch (n) {
    case Norm::Two: return Functional::V2;
    case Norm::One: return Functional::V6;
    case Norm::Inf: return Functional::V8;
  }
  return Functional::V2;
}

struct ContactSummary {
  Functional functional = Functional::V1;
  std::size_t contacts = 0;
  std::size_t failures = 0;
  double worst_derivative = -std::numeric_limits<double>::infinity();
};

inline ContactSummary summarize(const LyapunovTrace& trace, double deriv_tol = 1e-6) {
  ContactSummary s;
  s.functional = trace.id;
  const auto checks = contact_point_decrease(trace, deriv_tol);
  s.contacts = checks.size();
  s.failures = count_failures(checks);
  for (const auto& c : checks) s.worst_derivative = std::max(s.worst_derivative, c.derivative);
  return s;
}

/// Adaptive counterparts: V3 / V4 for the 2-norm, Vbar5 / Vbar6 and Vbar7 / Vbar8
/// for the 1- and infinity-norm rules.
inline Functional adaptive_phase_one_functional(Norm n) {
  switch (n) {
    case Norm::Two: return Functional::V3;
    case Norm::One: return Functional::Vbar5;
    case Norm::Inf: return Functional::Vbar7;
  }
  return Functional::V3;
}

inline Functional adaptive_phase_two_functional(Norm n) {
  switch (n) {
    case Norm::Two: return Functional::V4;
    case Norm::One: return Functional::Vbar6;
    case Norm::Inf: return Functional::Vbar8;
  }
  return Functional::V4;
}

struct ScalarAnalysis {
  ConditionReport report;
  PhaseReport phases;
  /// T1 + 1 / (kappa eps2max); NaN when the report is infeasible, T1 is never
  /// reached, or the run is adaptive.
  double settling_bound = std::numeric_limits<double>::quiet_NaN();
  ContactSummary phase_one;
  ContactSummary phase_two;
  std::vector<double> final_gains;
};

/// Monitors on a scalar run: Phase I functional from the monitor start to T1,
/// Phase II functional (eps2 = kappa eps2max) from T1 to T_settle.
///
/// Adaptive runs are checked at their final gains, which also serve as the
/// targets c3*, c4* of the gain terms. Their Phase II slope uses the sign
/// margin c3* - s |c2| with s = sqrt(m), m, 1 for the 2-, 1- and inf-norm, and
/// no envelope is counted (the adaptive decay is not linear in the norm).
inline ScalarAnalysis analyze_scalar(const ScalarExperiment& exp, const History& traj) {
  ScalarAnalysis a;
  const bool adaptive = traj.gain_dimension() >= 2;
  if (adaptive) {
    const auto g = traj.back_gains();
    a.final_gains.assign(g.begin(), g.end());
    a.report = scalar_condition(exp, std::span<const double>(a.final_gains));
  } else {
    a.report = scalar_condition(exp);
  }

  double eps2 = a.report.epsilon2_max > 0.0 ? exp.kappa * a.report.epsilon2_max : 0.0;
  if (adaptive) {
    const auto m = static_cast<double>(exp.initial.size());
    const double s = exp.norm == Norm::Two ? std::sqrt(m) : (exp.norm == Norm::One ? m : 1.0);
    eps2 = std::max(0.0, exp.kappa * (a.final_gains[0] - s * std::abs(exp.gains.c2)));
  }
  a.phases = detect_phases(traj, exp.delay, exp.norm, adaptive ? 0.0 : eps2,
                           exp.integrator.zero_tol);
  if (adaptive) a.phases.envelope_violations = 0;
  if (!adaptive && a.report.feasible && std::isfinite(a.phases.t1)) {
    a.settling_bound = settling_bound(a.report, a.phases.t1, exp.kappa);
  }

  FunctionalParams p;
  p.rate = exp.rate;
  p.zero_tol = exp.integrator.zero_tol;
  p.start_time = exp.monitor_start;
  p.end_time = a.phases.t1;
  if (adaptive) {
    p.rates = *exp.adaptive;
    p.sign_star = a.final_gains[0];
    p.linear_star = a.final_gains[1];
  }
  const Functional f1 =
      adaptive ? adaptive_phase_one_functional(exp.norm) : phase_one_functional(exp.norm);
  const Functional f2 =
      adaptive ? adaptive_phase_two_functional(exp.norm) : phase_two_functional(exp.norm);
  a.phase_one = summarize(trace_functional(traj, f1, p, exp.delay));
  a.phase_one.functional = f1;
  a.phase_two.functional = f2;
  if (std::isfinite(a.phases.t1) && eps2 > 0.0) {
    FunctionalParams q = p;
    q.eps2 = eps2;
    q.start_time = a.phases.t1;
    q.end_time = a.phases.t_settle;
    a.phase_two = summarize(trace_functional(traj, f2, q, exp.delay));
  }
  return a;
}

/// p' = p + 2 p(t/2) - c3 sgn(p) - c4 p, p(0) = 2, mu = t^0.1.
inline ScalarExperiment example1(double c3 = 2.1, double c4 = 3.5) {
  ScalarExperiment e;
  e.gains = {1.0, 2.0, c3, c4};
  e.initial = {2.0};
  e.delay = DelayProfile::proportional(0.5);
  e.rate = RateFunction::power(0.1);
  e.integrator.h = 1e-3;
  e.integrator.horizon = 30.0;
  e.eps1 = std::pow(2.0, 0.05);
  return e;
}

inline ScalarExperiment example1_adaptive(AdaptiveRates rates = {}, Norm norm = Norm::Two) {
  ScalarExperiment e = example1(0.0, 0.0);
  e.adaptive = rates;
  e.norm = norm;
  return e;
}

// ---------------------------------------------------------------------------
// Network analysis
// ---------------------------------------------------------------------------

inline NetworkConditionParams network_condition_params(const SyncExperiment& exp,
                                                       double theta3, double theta4,
                                                       double theta1) {
  const auto& m = exp.model;
  NetworkConditionParams p;
  p.lipschitz_f = m.lipschitz_f;
  p.lipschitz_g = m.lipschitz_g;
  p.theta1 = theta1;
  p.theta2 = m.theta2;
  p.theta3 = theta3;
  p.theta4 = theta4;
  p.sigma = exp.control.sigma;
  p.nodes = m.nodes;
  p.node_dim = m.node_dim;
  p.a = m.a;
  p.b = m.b;
  p.xi = left_eigenvector(m.a);
  const auto [beta, eta] = asymptotics(exp.rate, m.delays);
  p.beta = beta;
  p.eta = eta;
  p.synchronous_delays = m.delays.component_count() == 1;
  return p;
}

struct NetworkAnalysis {
  ConditionReport report;
  PhaseReport phases;
  Vector xi;
  ContactSummary phase_one;
  ContactSummary phase_two;
  std::vector<double> final_gains;
  double final_error = 0.0;
  double min_error = 0.0;
};

/// Condition report at the final gains, phases on the stacked error and the
/// xi-weighted contact checks (Vbar1 up to T1, Vbar2 from T1 with slope eps2).
inline NetworkAnalysis analyze_network(const SyncExperiment& exp, const SyncResult& run,
                                       double eps2 = 0.0, double kappa = 0.9) {
  NetworkAnalysis a;
  const auto& m = exp.model;
  a.xi = left_eigenvector(m.a);
  double theta1 = m.theta1, theta3 = exp.control.theta3, theta4 = exp.control.theta4;
  if (run.error.gain_dimension() > 0) {
    const auto g = run.error.back_gains();
    a.final_gains.assign(g.begin(), g.end());
    if (exp.control.adaptive->variant == NetworkAdaptVariant::Theta3Theta4) {
      theta3 = g[0];
      theta4 = g[1];
    } else {
      theta1 = g[0];
      theta3 = g[1];
    }
  }
  if (exp.control.kind != NetworkControlKind::None) {
    a.report = check_network_theorem(network_condition_params(exp, theta3, theta4, theta1),
                                     exp.control.kind);
  }
  if (eps2 <= 0.0 && a.report.epsilon2_max > 0.0) eps2 = kappa * a.report.epsilon2_max;
  a.phases = detect_phases(run.error, m.delays, Norm::Two, eps2, exp.integrator.zero_tol);

  a.min_error = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < run.error.size(); ++k) {
    a.min_error = std::min(a.min_error, std::sqrt(sq_norm2(run.error.state(k))));
  }
  a.final_error = std::sqrt(sq_norm2(run.error.back()));

  FunctionalParams p;
  p.rate = exp.rate;
  p.xi.assign(a.xi.data(), a.xi.data() + a.xi.size());
  p.zero_tol = exp.integrator.zero_tol;
  p.end_time = a.phases.t1;
  a.phase_one = summarize(trace_functional(run.error, Functional::Vbar1, p, m.delays));
  a.phase_one.functional = Functional::Vbar1;
  a.phase_two.functional = Functional::Vbar2;
  if (std::isfinite(a.phases.t1) && eps2 > 0.0) {
    FunctionalParams q = p;
    q.eps2 = eps2;
    q.start_time = a.phases.t1;
    q.end_time = a.phases.t_settle;
    a.phase_two = summarize(trace_functional(run.error, Functional::Vbar2, q, m.delays));
  }
  return a;
}

/// Example 2 with adaptive full-node control: theta3 rate d3, theta4 rates d1 = d2.
inline SyncExperiment example2_adaptive(double d_theta3 = 0.02, double d_theta4 = 0.05) {
  SyncExperiment e = lorenz_preset();
  e.control.kind = NetworkControlKind::FullNode;
  e.control.adaptive = NetworkAdaptive{NetworkAdaptVariant::Theta3Theta4,
                                       AdaptiveRates{d_theta4, d_theta4, d_theta3}};
  return e;
}

}  // namespace ftd
