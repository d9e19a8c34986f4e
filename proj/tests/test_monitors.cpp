#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ftd/experiments.hpp"
#include "ftd/monitors.hpp"

using namespace ftd;

namespace {

History zeros(double horizon, double h) {
  History traj(0.0, h, 2);
  const auto n = static_cast<std::size_t>(std::llround(horizon / h));
  for (std::size_t k = 0; k <= n; ++k) traj.push(std::vector<double>{0.0, 0.0});
  return traj;
}

/// Sign-only system p' = -sgn(p) from p(0) = 2: |p| = 2 - t until t = 2.
History pure_sign(double horizon = 4.0, double h = 1e-3) {
  ScalarExperiment e;
  e.gains = {0.0, 0.0, 1.0, 0.0};
  e.initial = {2.0};
  e.integrator.h = h;
  e.integrator.horizon = horizon;
  return simulate_scalar(e);
}

}  // namespace

TEST(Functional, NamesRoundTrip) {
  for (int i = 0; i <= static_cast<int>(Functional::Vbar8); ++i) {
    const auto f = static_cast<Functional>(i);
    EXPECT_EQ(functional_from_string(to_string(f)), f);
  }
  EXPECT_THROW(functional_from_string("V9"), std::invalid_argument);
}

TEST(Functional, ValuesMatchDefinitions) {
  FunctionalParams p;
  p.rate = RateFunction::power(0.5);
  p.eps2 = 0.3;
  p.sign_star = 2.0;
  p.linear_star = 5.0;
  p.rates = {0.1, 0.2, 0.4};
  p.xi = {0.25, 0.75};
  const std::vector<double> x{3.0, -4.0};
  const std::vector<double> g{1.0, 4.0};
  const double t = 4.0;
  EXPECT_DOUBLE_EQ(functional_value(Functional::V1, p, t, x, g), 2.0 * 25.0);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V2, p, t, x, g), 5.0 + 1.2);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V3, p, t, x, g), 50.0 + 1.0 / 0.2);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V4, p, t, x, g),
                   5.0 + 1.0 / 0.2 + 1.0 / 0.8 + 1.2);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V5, p, t, x, g), 14.0);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V6, p, t, x, g), 7.0 + 1.2);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V7, p, t, x, g), 8.0);
  EXPECT_DOUBLE_EQ(functional_value(Functional::V8, p, t, x, g), 4.0 + 1.2);
  const double wsq = 0.25 * 9.0 + 0.75 * 16.0;
  EXPECT_DOUBLE_EQ(functional_value(Functional::Vbar1, p, t, x, g), 2.0 * wsq);
  EXPECT_DOUBLE_EQ(functional_value(Functional::Vbar2, p, t, x, g), std::sqrt(wsq) + 1.2);
  EXPECT_DOUBLE_EQ(functional_value(Functional::Vbar5, p, t, x, g), 14.0 + 1.0 / 0.4);
  EXPECT_DOUBLE_EQ(functional_value(Functional::Vbar8, p, t, x, g),
                   4.0 + 1.0 / 0.2 + 1.0 / 0.8 + 1.2);
  EXPECT_THROW(functional_value(Functional::V3, p, t, x, std::vector<double>{}),
               std::invalid_argument);
}

TEST(Trace, ZeroTrajectoryHasNoContacts) {
  const auto traj = zeros(3.0, 1e-2);
  FunctionalParams p;
  p.eps2 = 0.0;
  for (Functional f : {Functional::V1, Functional::V2, Functional::V5, Functional::V7}) {
    const auto tr = trace_functional(traj, f, p, DelayProfile::proportional(0.5));
    ASSERT_FALSE(tr.values.empty());
    for (std::size_t k = 0; k < tr.values.size(); ++k) {
      EXPECT_EQ(tr.values[k], 0.0);
      EXPECT_EQ(tr.window_sups[k], 0.0);
    }
    EXPECT_TRUE(tr.contact_times.empty());
  }
}

TEST(Trace, MissingParametersThrow) {
  const auto traj = zeros(2.0, 1e-2);
  const auto d = DelayProfile::proportional(0.5);
  FunctionalParams p;
  EXPECT_THROW(trace_functional(traj, Functional::V2, p, d), std::invalid_argument);
  EXPECT_THROW(trace_functional(traj, Functional::V3, p, d), std::invalid_argument);
  EXPECT_THROW(trace_functional(traj, Functional::Vbar1, p, d), std::invalid_argument);
  p.eps2 = 0.1;
  p.linear_star = 1.0;
  EXPECT_THROW(trace_functional(traj, Functional::V4, p, d), std::invalid_argument);
  p.xi = {0.3, 0.3, 0.4};
  EXPECT_THROW(trace_functional(traj, Functional::Vbar1, p, d), std::invalid_argument);
}

// Property: the incremental W equals the brute-force window scan.
TEST(Trace, WindowSupMatchesBruteForce) {
  const auto e = example1();
  const auto traj = simulate_scalar(e);
  FunctionalParams p;
  p.eps2 = 0.09;
  p.start_time = 0.5;
  std::mt19937_64 rng(11);
  for (Functional f : {Functional::V1, Functional::V2, Functional::V5}) {
    const auto tr = trace_functional(traj, f, p, e.delay);
    std::uniform_int_distribution<std::size_t> pick(0, tr.times.size() - 1);
    for (int s = 0; s < 50; ++s) {
      const std::size_t k = pick(rng);
      const double brute = window_sup_brute(traj, f, p, e.delay, tr.times[k]);
      ASSERT_NEAR(tr.window_sups[k], brute, 1e-12 * (1.0 + std::abs(brute)))
          << to_string(f) << " t=" << tr.times[k];
    }
  }
}

// Oracle: contacts are exactly the grid points with |V - W| <= 1e-9 |W| and a nonzero state.
TEST(Trace, ContactsMatchDirectScan) {
  const auto e = example1();
  const auto traj = simulate_scalar(e);
  FunctionalParams p;
  p.start_time = 0.2;
  p.end_time = 4.0;
  const auto tr = trace_functional(traj, Functional::V1, p, e.delay);
  std::vector<double> expected;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    const double v = e.rate.mu(t) * traj.query_component(t, 0) * traj.query_component(t, 0);
    const double w = window_sup_brute(traj, Functional::V1, p, e.delay, t);
    if (std::abs(v - w) <= 1e-9 * std::abs(w) && std::abs(traj.query_component(t, 0)) > 1e-9) {
      expected.push_back(t);
    }
  }
  EXPECT_EQ(tr.contact_times, expected);
}

TEST(Trace, SettledStateGivesLinearV2) {
  const auto traj = zeros(3.0, 1e-2);
  FunctionalParams p;
  p.eps2 = 0.25;
  const auto tr = trace_functional(traj, Functional::V2, p, DelayProfile::proportional(0.5));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    EXPECT_NEAR(tr.values[k], 0.25 * tr.times[k], 1e-15);
    EXPECT_EQ(tr.window_sups[k], tr.values[k]);
  }
  EXPECT_TRUE(tr.contact_times.empty());
}

TEST(Contacts, DerivativeSigns) {
  LyapunovTrace tr;
  tr.times = {0.0, 1.0, 2.0, 3.0};
  tr.values = {1.0, 2.0, 2.5, 2.0};
  tr.contact_indices = {0, 1, 3};
  tr.contact_times = {0.0, 1.0, 3.0};
  const auto c = contact_point_decrease(tr, 1e-6);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c[0].derivative, 1.0);
  EXPECT_DOUBLE_EQ(c[1].derivative, 0.75);
  EXPECT_DOUBLE_EQ(c[2].derivative, -0.5);
  EXPECT_EQ(count_failures(c), 2u);
}

TEST(Phases, PureSignSystem) {
  const auto traj = pure_sign();
  const auto ph = detect_phases(traj, DelayProfile::proportional(0.5), Norm::Two, 0.9);
  // Window sup of p^2 over [t/2, t] is (2 - t/2)^2 <= 1 first at t = 2: then the state is 0.
  EXPECT_NEAR(ph.t1, 2.0, 2e-3);
  EXPECT_NEAR(ph.t_settle, 2.0, 2e-3);
  EXPECT_EQ(ph.envelope_violations, 0u);
}

TEST(Phases, ConstantDelayWindow) {
  const auto traj = pure_sign();
  const auto ph = detect_phases(traj, DelayProfile::constant(0.5), Norm::One, 0.9);
  // sup |p| over [t - 0.5, t] = 2 - (t - 0.5) <= 1 at t = 1.5.
  EXPECT_NEAR(ph.t1, 1.5, 2e-3);
  EXPECT_NEAR(ph.t_settle, 2.0, 2e-3);
  EXPECT_EQ(ph.envelope_violations, 0u);
  const auto tight = detect_phases(traj, DelayProfile::constant(0.5), Norm::One, 3.0);
  EXPECT_GT(tight.envelope_violations, 0u);
}

TEST(Phases, NeverSettles) {
  const auto traj = zeros(1.0, 0.1);
  const auto ph = detect_phases(traj, DelayProfile::proportional(0.5), Norm::Two, 0.0);
  EXPECT_DOUBLE_EQ(ph.t1, 0.0);
  EXPECT_DOUBLE_EQ(ph.t_settle, 0.0);
  auto e = example1(2.1, 1.0);
  e.integrator.horizon = 10.0;
  const auto bad = detect_phases(simulate_scalar(e), e.delay, Norm::Two, 0.0);
  EXPECT_EQ(bad.t1, kNever);
  EXPECT_EQ(bad.t_settle, kNever);
}

// Below the gain threshold the maximum-value functional has contacts where V grows.
TEST(Monitors, SubThresholdGainShowsGrowth) {
  auto e = example1(2.1, 1.0);
  e.integrator.horizon = 10.0;
  const auto traj = simulate_scalar(e);
  FunctionalParams p;
  const auto s = summarize(trace_functional(traj, Functional::V1, p, e.delay));
  EXPECT_GT(s.contacts, 0u);
  EXPECT_GT(s.failures, 0u);
  EXPECT_GT(s.worst_derivative, 0.0);
}

TEST(Monitors, WindowSupNonincreasingForFeasibleGains) {
  const auto e = example1();
  const auto traj = simulate_scalar(e);
  FunctionalParams p;
  const auto tr = trace_functional(traj, Functional::V1, p, e.delay);
  for (std::size_t k = 1; k < tr.window_sups.size(); ++k) {
    ASSERT_LE(tr.window_sups[k], tr.window_sups[k - 1] + 1e-9) << "t=" << tr.times[k];
  }
}

TEST(Analysis, ReferenceExampleSettlesWithinBound) {
  const auto e = example1();
  const auto a = analyze_scalar(e, simulate_scalar(e));
  EXPECT_TRUE(a.report.feasible);
  EXPECT_TRUE(std::isfinite(a.phases.t1));
  EXPECT_LE(a.phases.t_settle, a.settling_bound);
  EXPECT_EQ(a.phases.envelope_violations, 0u);
  EXPECT_EQ(a.phase_one.failures, 0u);
  EXPECT_EQ(a.phase_two.failures, 0u);
  EXPECT_EQ(a.phase_one.functional, Functional::V1);
  EXPECT_EQ(a.phase_two.functional, Functional::V2);
}
