#pragma once

// Drive/response networks with asynchronous delayed coupling
//
//   x_i' = f(x_i) + theta1 sum_j a_ij x_j + theta2 sum_j b_ij g(x_j(t - pi_ij(t)))
//
// and their synchronization error e_i = y_i - x_i (outer mode) or
// e_i = y_i - phi (inner mode, phi' = f(phi)). The drive (or reference) is
// integrated once and then read through its interpolated history while the
// controlled error system is integrated.

#include <cmath>
#include <cstddef>
#include <functional>
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

namespace ftd {

using NodeFunction = std::function<void(std::span<const double>, std::span<double>)>;

/// Lorenz field with (10, 28, 8/3).
inline void lorenz(std::span<const double> x, std::span<double> out) {
  out[0] = 10.0 * (x[1] - x[0]);
  out[1] = 28.0 * x[0] - x[1] - x[0] * x[2];
  out[2] = x[0] * x[1] - 8.0 * x[2] / 3.0;
}

/// Componentwise sin(x) + 2x; Lipschitz constant 3.
inline void sin_plus_linear(std::span<const double> x, std::span<double> out) {
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::sin(x[k]) + 2.0 * x[k];
}

struct NetworkModel {
  std::size_t nodes = 0;
  std::size_t node_dim = 0;
  Matrix a;
  Matrix b;
  double theta1 = 0.0;
  double theta2 = 0.0;
  NodeFunction f;
  NodeFunction g;
  double lipschitz_f = 0.0;
  double lipschitz_g = 0.0;
  /// Either one component per ordered pair (index i*N + j) or one shared component.
  DelayProfile delays = DelayProfile::constant(0.0);

  std::size_t state_dim() const { return nodes * node_dim; }

  double pair_delay(std::size_t i, std::size_t j, double t) const {
    return delays.component_count() == 1 ? delays.eval_unchecked(0, t)
                                         : delays.eval_unchecked(i * nodes + j, t);
  }

  void validate() const {
    if (nodes == 0 || node_dim == 0) throw std::invalid_argument("network size must be > 0");
    const auto n = static_cast<Eigen::Index>(nodes);
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("matrix A must be N x N");
    if (b.rows() != n || b.cols() != n) throw std::invalid_argument("matrix B must be N x N");
    validate_coupling_matrix(a);
    if (!f || !g) throw std::invalid_argument("node functions f and g are required");
    if (delays.component_count() != 1 && delays.component_count() != nodes * nodes) {
      throw std::invalid_argument("network delays need N^2 pair components or one shared component");
    }
  }
};

enum class SyncMode { Outer, Inner };

struct SyncExperiment {
  NetworkModel model;
  SyncMode mode = SyncMode::Outer;
  /// Drive states (outer mode), N blocks of n.
  std::vector<double> drive_initial;
  /// Response states, N blocks of n.
  std::vector<double> response_initial;
  /// phi(0) for inner mode.
  std::vector<double> reference_initial;
  NetworkControlSpec control;
  IntegratorConfig integrator;
  /// mu(t) used by the adaptive rules.
  RateFunction rate = RateFunction::power(0.1);

  void validate() const {
    model.validate();
    control.validate();
    integrator.validate();
    if (response_initial.size() != model.state_dim()) {
      throw std::invalid_argument("response initial state must have N*n components");
    }
    if (mode == SyncMode::Outer && drive_initial.size() != model.state_dim()) {
      throw std::invalid_argument("drive initial state must have N*n components");
    }
    if (mode == SyncMode::Inner && reference_initial.size() != model.node_dim) {
      throw std::invalid_argument("reference initial state must have n components");
    }
  }
};

/// Uncontrolled drive network; no switching terms.
class DriveSystem {
 public:
  explicit DriveSystem(const NetworkModel& model) : m_(model) {}

  std::size_t dimension() const { return m_.state_dim(); }

  void evaluate(const StepContext& ctx, std::span<const double> x, std::span<double> drift,
                std::span<double> gain) const {
    const std::size_t n = m_.node_dim;
    std::vector<double> past(m_.state_dim()), buf(n);
    std::fill(gain.begin(), gain.end(), 0.0);
    for (std::size_t i = 0; i < m_.nodes; ++i) {
      auto out = drift.subspan(i * n, n);
      m_.f(x.subspan(i * n, n), out);
      for (std::size_t j = 0; j < m_.nodes; ++j) {
        const double aij = m_.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        for (std::size_t c = 0; c < n; ++c) out[c] += m_.theta1 * aij * x[j * n + c];
        const double bij = m_.b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (bij == 0.0 || m_.theta2 == 0.0) continue;
        const double s = ctx.delay_time - m_.pair_delay(i, j, ctx.delay_time);
        for (std::size_t c = 0; c < n; ++c) past[c] = ctx.history.query_component(s, j * n + c);
        m_.g(std::span<const double>(past.data(), n), buf);
        for (std::size_t c = 0; c < n; ++c) out[c] += m_.theta2 * bij * buf[c];
      }
    }
  }

 private:
  const NetworkModel& m_;
};

/// Isolated node phi' = f(phi).
class ReferenceSystem {
 public:
  explicit ReferenceSystem(const NetworkModel& model) : m_(model) {}
  std::size_t dimension() const { return m_.node_dim; }
  void evaluate(const StepContext&, std::span<const double> x, std::span<double> drift,
                std::span<double> gain) const {
    m_.f(x, drift);
    std::fill(gain.begin(), gain.end(), 0.0);
  }

 private:
  const NetworkModel& m_;
};

/// Controlled error dynamics. The state is e (N blocks of n); the reference
/// state of node i at time s comes from the frozen drive (outer) or phi (inner).
class ErrorSystem {
 public:
  ErrorSystem(const NetworkModel& model, SyncMode mode, const History& reference,
              NetworkControlSpec control)
      : m_(model), mode_(mode), ref_(reference), control_(std::move(control)) {}

  std::size_t dimension() const { return m_.state_dim(); }

  void evaluate(const StepContext& ctx, std::span<const double> e, std::span<double> drift,
                std::span<double> gain) const {
    const std::size_t n = m_.node_dim;
    const std::size_t nn = m_.nodes;
    double theta1 = m_.theta1;
    double theta3 = control_.theta3;
    double theta4 = control_.theta4;
    if (control_.adaptive && !ctx.gains.empty()) {
      if (control_.adaptive->variant == NetworkAdaptVariant::Theta3Theta4) {
        theta3 = ctx.gains[0];
        theta4 = ctx.gains[1];
      } else {
        theta1 = ctx.gains[0];
        theta3 = ctx.gains[1];
      }
    }
    if (control_.kind == NetworkControlKind::None) {
      theta3 = 0.0;
      theta4 = 0.0;
    }
    if (control_.kind == NetworkControlKind::Pinning) theta4 = 0.0;

    std::vector<double> xr(n), y(n), fx(n), fy(n), past_ref(n), past_y(n), gx(n), gy(n);
    for (std::size_t i = 0; i < nn; ++i) {
      reference_at(i, ctx.time, xr);
      for (std::size_t c = 0; c < n; ++c) y[c] = xr[c] + e[i * n + c];
      m_.f(xr, fx);
      m_.f(y, fy);
      auto out = drift.subspan(i * n, n);
      for (std::size_t c = 0; c < n; ++c) out[c] = fy[c] - fx[c] - theta4 * e[i * n + c];
      for (std::size_t j = 0; j < nn; ++j) {
        const double aij = m_.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        for (std::size_t c = 0; c < n; ++c) out[c] += theta1 * aij * e[j * n + c];
        const double bij = m_.b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (bij == 0.0 || m_.theta2 == 0.0) continue;
        const double s = ctx.delay_time - m_.pair_delay(i, j, ctx.delay_time);
        reference_at(j, s, past_ref);
        for (std::size_t c = 0; c < n; ++c) {
          past_y[c] = past_ref[c] + ctx.history.query_component(s, j * n + c);
        }
        m_.g(past_ref, gx);
        m_.g(past_y, gy);
        for (std::size_t c = 0; c < n; ++c) out[c] += m_.theta2 * bij * (gy[c] - gx[c]);
      }
      if (i == 0 && control_.kind == NetworkControlKind::Pinning) {
        for (std::size_t c = 0; c < n; ++c) out[c] -= theta1 * control_.sigma * e[c];
      }
    }
    std::fill(gain.begin(), gain.end(), theta3);
  }

 private:
  void reference_at(std::size_t node, double t, std::span<double> out) const {
    const std::size_t n = m_.node_dim;
    const std::size_t offset = mode_ == SyncMode::Outer ? node * n : 0;
    for (std::size_t c = 0; c < n; ++c) out[c] = ref_.query_component(t, offset + c);
  }

  const NetworkModel& m_;
  SyncMode mode_;
  const History& ref_;
  NetworkControlSpec control_;
};

/// Response network integrated directly against the frozen drive, with the
/// static controller applied to e = y - x through a plain sign (no sliding
/// projection). Used to cross-check the error-system route.
class ResponseSystem {
 public:
  ResponseSystem(const NetworkModel& model, const History& drive, NetworkControlSpec control)
      : m_(model), drive_(drive), control_(std::move(control)) {
    if (control_.adaptive) throw std::invalid_argument("direct response route takes static control");
  }

  std::size_t dimension() const { return m_.state_dim(); }

  void evaluate(const StepContext& ctx, std::span<const double> y, std::span<double> drift,
                std::span<double> gain) const {
    DriveSystem(m_).evaluate(ctx, y, drift, gain);
    std::vector<double> e(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) e[k] = y[k] - drive_.query_component(ctx.time, k);
    std::vector<double> u;
    switch (control_.kind) {
      case NetworkControlKind::None: u.assign(e.size(), 0.0); break;
      case NetworkControlKind::Pinning:
        u = pinning_control(e, m_.node_dim, control_.sigma, m_.theta1, control_.theta3);
        break;
      case NetworkControlKind::FullNode:
        u = full_node_control(e, control_.theta3, control_.theta4);
        break;
    }
    for (std::size_t k = 0; k < y.size(); ++k) drift[k] += u[k];
  }

 private:
  const NetworkModel& m_;
  const History& drive_;
  NetworkControlSpec control_;
};

/// Residuals of sum b_ij g(phi(t - pi_ij(t))) for inner synchronization,
/// summed over i (per column j) and over j (per row i). Max 2-norm over the run.
struct InnerResidual {
  double max_column = 0.0;
  double max_row = 0.0;
};

struct SyncResult {
  /// Drive states (outer) or phi (inner).
  History reference;
  /// Response states reconstructed as reference + error on the grid.
  History response;
  /// Error states with the gain trajectory (if adaptive).
  History error;
  std::vector<std::string> gain_names;
  std::optional<InnerResidual> inner_residual;
};

inline InnerResidual inner_residual(const NetworkModel& m, const History& phi,
                                    std::size_t stride = 10) {
  const std::size_t n = m.node_dim;
  InnerResidual r;
  std::vector<double> past(n), gv(n);
  for (std::size_t k = 0; k < phi.size(); k += std::max<std::size_t>(stride, 1)) {
    const double t = phi.time(k);
    std::vector<double> col(m.nodes * n, 0.0), row(m.nodes * n, 0.0);
    for (std::size_t i = 0; i < m.nodes; ++i) {
      for (std::size_t j = 0; j < m.nodes; ++j) {
        phi.query(t - m.pair_delay(i, j, t), past);
        m.g(past, gv);
        const double bij = m.b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        for (std::size_t c = 0; c < n; ++c) {
          col[j * n + c] += bij * gv[c];
          row[i * n + c] += bij * gv[c];
        }
      }
    }
    for (std::size_t i = 0; i < m.nodes; ++i) {
      r.max_column = std::max(r.max_column,
                              std::sqrt(sq_norm2(std::span<const double>(col).subspan(i * n, n))));
      r.max_row = std::max(r.max_row,
                           std::sqrt(sq_norm2(std::span<const double>(row).subspan(i * n, n))));
    }
  }
  return r;
}

/// Integrate drive (or reference) then the controlled error system.
inline SyncResult simulate_sync(const SyncExperiment& exp) {
  exp.validate();
  const auto& m = exp.model;
  const std::size_t n = m.node_dim;

  History reference = exp.mode == SyncMode::Outer
                          ? integrate(DriveSystem(m), exp.drive_initial, exp.integrator)
                          : integrate(ReferenceSystem(m), exp.reference_initial, exp.integrator);

  std::vector<double> e0(m.state_dim());
  for (std::size_t i = 0; i < m.nodes; ++i) {
    for (std::size_t c = 0; c < n; ++c) {
      const double r0 = exp.mode == SyncMode::Outer ? exp.drive_initial[i * n + c]
                                                    : exp.reference_initial[c];
      e0[i * n + c] = exp.response_initial[i * n + c] - r0;
    }
  }

  ErrorSystem system(m, exp.mode, reference, exp.control);
  std::vector<std::string> gain_names;
  History error = [&] {
    if (exp.control.adaptive && exp.control.kind != NetworkControlKind::None) {
      NetworkAdaptiveLaw law(*exp.control.adaptive, exp.rate, m.delays, exp.integrator.zero_tol);
      gain_names = law.gain_names();
      return integrate(system, e0, exp.integrator, law);
    }
    return integrate(system, e0, exp.integrator);
  }();

  History response(exp.integrator.t0, exp.integrator.h, m.state_dim());
  response.reserve(error.size());
  std::vector<double> y(m.state_dim());
  for (std::size_t k = 0; k < error.size(); ++k) {
    const auto ek = error.state(k);
    const auto rk = reference.state(k);
    for (std::size_t i = 0; i < m.nodes; ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        const double r = exp.mode == SyncMode::Outer ? rk[i * n + c] : rk[c];
        y[i * n + c] = r + ek[i * n + c];
      }
    }
    response.push(y);
  }

  SyncResult result{std::move(reference), std::move(response), std::move(error),
                    std::move(gain_names), std::nullopt};
  if (exp.mode == SyncMode::Inner) result.inner_residual = inner_residual(m, result.reference);
  return result;
}

/// E1 = sum_{i>=2} |x_i - x_1|, E2 the same for the response, and
/// |E| = sqrt(sum_i |y_i - x_i|^2), all in the Euclidean norm.
struct ErrorIndices {
  double e1 = 0.0;
  double e2 = 0.0;
  double e_norm = 0.0;
};

inline ErrorIndices error_indices(const History& drive, const History& response,
                                  std::size_t node_dim, double t) {
  if (drive.dimension() != response.dimension() || node_dim == 0 ||
      drive.dimension() % node_dim != 0) {
    throw std::invalid_argument("error_indices: dimension mismatch");
  }
  const auto x = drive.query(t);
  const auto y = response.query(t);
  const std::size_t nodes = x.size() / node_dim;
  auto spread = [&](const std::vector<double>& s) {
    double total = 0.0;
    for (std::size_t i = 1; i < nodes; ++i) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < node_dim; ++c) {
        const double d = s[i * node_dim + c] - s[c];
        d2 += d * d;
      }
      total += std::sqrt(d2);
    }
    return total;
  };
  ErrorIndices r;
  r.e1 = spread(x);
  r.e2 = spread(y);
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d2 += (y[k] - x[k]) * (y[k] - x[k]);
  r.e_norm = std::sqrt(d2);
  return r;
}

/// Bounding box used for the Lorenz preset's Lipschitz constant.
inline constexpr double kLorenzBoxLower[3] = {-30.0, -40.0, -10.0};
inline constexpr double kLorenzBoxUpper[3] = {30.0, 40.0, 70.0};

/// Three coupled Lorenz oscillators with delayed sin(x) + 2x coupling.
inline SyncExperiment lorenz_preset() {
  SyncExperiment exp;
  auto& m = exp.model;
  m.nodes = 3;
  m.node_dim = 3;
  m.a.resize(3, 3);
  m.a << -5, 2, 3, 1, -4, 3, 1, 2, -3;
  m.b.resize(3, 3);
  m.b << 1, -1, 1, 1, 1, -1, -1, 1, 1;
  m.theta1 = 0.1;
  m.theta2 = 1.0;
  m.f = lorenz;
  m.g = sin_plus_linear;
  m.lipschitz_f = lorenz_lipschitz_on_box(kLorenzBoxLower, kLorenzBoxUpper);
  m.lipschitz_g = 3.0;
  m.delays = DelayProfile::per_component_sin(3, 0.5, 0.1);

  exp.mode = SyncMode::Outer;
  exp.drive_initial = {-1.5771, 0.5080, 0.2820, 0.0335, -1.3337, 1.1275, 0.3502, -0.2991, 0.0229};
  exp.response_initial = {-0.8479, -1.1201, 2.5260, 1.6555, 0.3075,
                          -1.2571, -0.8655, -0.1765, 0.7914};
  exp.control.kind = NetworkControlKind::None;
  exp.integrator.h = 5e-4;
  exp.integrator.horizon = 20.0;
  exp.rate = RateFunction::power(0.1);
  return exp;
}

}  // namespace ftd
