#pragma once

// Sufficient-condition checks for finite-time stabilization and
// synchronization, the closed-form epsilon_1 trade-off, the spectral data of
// the coupling matrix and the settling-time bounds.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftd/controllers.hpp"
#include "ftd/delay.hpp"
#include "ftd/error.hpp"

namespace ftd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class TheoremId {
  ScalarTwoNorm,
  ScalarOneNorm,
  ScalarInfNorm,
  NetworkPinning,
  NetworkFullNode,
};

inline const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::ScalarTwoNorm: return "scalar-2-norm";
    case TheoremId::ScalarOneNorm: return "scalar-1-norm";
    case TheoremId::ScalarInfNorm: return "scalar-inf-norm";
    case TheoremId::NetworkPinning: return "network-pinning";
    case TheoremId::NetworkFullNode: return "network-full-node";
  }
  return "?";
}

/// Verdict of one sufficient condition.
///
/// `lhs` is the decay condition's left-hand side (feasible needs lhs < 0) and
/// `epsilon2_max` the slack of the sign-gain condition (feasible needs > 0).
/// Epsilon fields are NaN when the condition has no epsilon_1 trade-off.
struct ConditionReport {
  TheoremId theorem = TheoremId::ScalarTwoNorm;
  double lhs = 0.0;
  bool feasible = false;
  double eps1_used = std::numeric_limits<double>::quiet_NaN();
  double eps1_optimal = std::numeric_limits<double>::quiet_NaN();
  double margin = 0.0;
  double epsilon2_max = 0.0;
  /// Linear gain (c4, theta1 or theta4) at which lhs crosses zero for the used epsilon_1.
  double linear_gain_threshold = std::numeric_limits<double>::quiet_NaN();
  /// Sign gain (c3 or theta3) the sign condition has to exceed.
  double sign_gain_threshold = 0.0;
};

/// Minimizer of a eps + b / eps over eps > 0: eps* = sqrt(b / a), value 2 sqrt(a b).
struct EpsilonOptimum {
  double eps1;
  double value;
};

inline EpsilonOptimum optimal_eps1(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("optimal_eps1 needs positive coefficients");
  }
  return {std::sqrt(b / a), 2.0 * std::sqrt(a * b)};
}

/// Scalar-model conditions.
///
///   2-norm:   beta + 2(c1 - c4) + |c2| eps1 + |c2| m (1 + eta) / eps1 < 0,  |c2| < c3
///   1-norm:   beta + (c1 - c4) + |c2| m (1 + eta) < 0,                    |c2| < c3
///   inf-norm: beta + (c1 - c4) + |c2| (1 + eta) < 0,                      |c2| < c3
///
/// With `synchronous_delays` the factor m of the 2-norm condition drops to 1.
/// For the 1-norm, epsilon2_max is the phase-two slack m (c3 - |c2|).
inline ConditionReport check_scalar_theorem(const StaticScalarGains& g, std::size_t m,
                                            double beta, double eta, Norm norm,
                                            std::optional<double> eps1 = std::nullopt,
                                            bool synchronous_delays = false) {
  if (m < 1) throw std::invalid_argument("dimension m must be >= 1");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  if (eps1 && !(*eps1 > 0.0)) throw std::invalid_argument("eps1 must be > 0");
  const double c2 = std::abs(g.c2);
  const auto md = static_cast<double>(m);
  ConditionReport r;
  r.sign_gain_threshold = c2;
  r.epsilon2_max = g.c3 - c2;

  switch (norm) {
    case Norm::Two: {
      r.theorem = TheoremId::ScalarTwoNorm;
      const double mm = synchronous_delays ? 1.0 : md;
      double tradeoff = 0.0;
      if (c2 > 0.0) {
        const double a = c2;
        const double b = c2 * mm * (1.0 + eta);
        r.eps1_optimal = optimal_eps1(a, b).eps1;
        r.eps1_used = eps1.value_or(r.eps1_optimal);
        tradeoff = a * r.eps1_used + b / r.eps1_used;
      } else if (eps1) {
        r.eps1_used = *eps1;
      }
      r.lhs = beta + 2.0 * (g.c1 - g.c4) + tradeoff;
      r.linear_gain_threshold = g.c1 + 0.5 * (beta + tradeoff);
      break;
    }
    case Norm::One:
      r.theorem = TheoremId::ScalarOneNorm;
      r.lhs = beta + (g.c1 - g.c4) + c2 * md * (1.0 + eta);
      r.linear_gain_threshold = beta + g.c1 + c2 * md * (1.0 + eta);
      r.epsilon2_max = md * (g.c3 - c2);
      break;
    case Norm::Inf:
      r.theorem = TheoremId::ScalarInfNorm;
      r.lhs = beta + (g.c1 - g.c4) + c2 * (1.0 + eta);
      r.linear_gain_threshold = beta + g.c1 + c2 * (1.0 + eta);
      break;
  }
  r.margin = -r.lhs;
  r.feasible = r.lhs < 0.0 && r.epsilon2_max > 0.0;
  return r;
}

/// Delay-class corollaries: (beta, eta) from the closed-form asymptotics, then
/// the 2-norm theorem.
inline ConditionReport check_corollary(const StaticScalarGains& g, std::size_t m,
                                       const DelayProfile& delay, const RateFunction& rate,
                                       std::optional<double> eps1 = std::nullopt) {
  const auto [beta, eta] = asymptotics(rate, delay);
  return check_scalar_theorem(g, m, beta, eta, Norm::Two, eps1);
}

// ---------------------------------------------------------------------------
// Spectral utilities
// ---------------------------------------------------------------------------

/// Throws std::invalid_argument unless A is square, Metzler and has zero row sums (tol 1e-12).
inline void validate_coupling_matrix(const Matrix& a, double tol = 1e-12) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("coupling matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) < -tol * scale) {
        throw std::invalid_argument("coupling matrix is not Metzler (a_" + std::to_string(i + 1) +
                                    std::to_string(j + 1) + " < 0)");
      }
    }
    if (std::abs(a.row(i).sum()) > tol * scale) {
      throw std::invalid_argument("coupling matrix row " + std::to_string(i + 1) +
                                  " does not sum to zero");
    }
  }
}

/// Strong connectivity of the digraph with an edge i -> j whenever a_ij != 0 (i != j).
inline bool is_irreducible(const Matrix& a) {
  const auto n = a.rows();
  auto reach_all = [&](bool transpose) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = transpose ? a(j, i) : a(i, j);
        if (j != i && w != 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  };
  return reach_all(false) && reach_all(true);
}

/// Normalized left null vector: xi^T A = 0, xi_i > 0, sum xi = 1.
///
/// Solved as the linear system A^T xi = 0 with one equation replaced by the
/// normalization.
inline Vector left_eigenvector(const Matrix& a) {
  validate_coupling_matrix(a);
  const auto n = a.rows();
  if (n == 1) return Vector::Ones(1);
  if (!is_irreducible(a)) throw std::invalid_argument("coupling matrix is reducible");
  Matrix sys = a.transpose();
  Vector rhs = Vector::Zero(n);
  sys.row(n - 1).setOnes();
  rhs(n - 1) = 1.0;
  Vector xi = sys.fullPivLu().solve(rhs);
  if ((xi.array() <= 0.0).any()) {
    throw std::invalid_argument("left eigenvector has a non-positive component (reducible matrix)");
  }
  return xi;
}

inline double lambda_max_symmetric_part(const Matrix& m) {
  const Matrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

enum class SpectralKind {
  /// {Xi (A - diag(sigma, 0, ..., 0))}^s
  Tilde,
  /// {Xi (theta1 A + theta4 I)}^s
  Hat,
};

/// Largest eigenvalue of the symmetric part of Xi times the modified coupling matrix.
inline double lambda_max_sym(const Matrix& a, const Vector& xi, double sigma, double theta1,
                             double theta4, SpectralKind which) {
  if (a.rows() != a.cols() || xi.size() != a.rows()) {
    throw std::invalid_argument("lambda_max_sym: dimension mismatch");
  }
  const Matrix big_xi = xi.asDiagonal();
  Matrix m;
  if (which == SpectralKind::Tilde) {
    if (sigma < 0.0) throw std::invalid_argument("pinning sigma must be >= 0");
    m = a;
    m(0, 0) -= sigma;
  } else {
    m = theta1 * a + theta4 * Matrix::Identity(a.rows(), a.cols());
  }
  return lambda_max_symmetric_part(big_xi * m);
}

/// Inputs of the network conditions.
struct NetworkConditionParams {
  double lipschitz_f = 0.0;
  double lipschitz_g = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
  double sigma = 1.0;
  std::size_t nodes = 0;
  std::size_t node_dim = 0;
  Matrix a;
  Matrix b;
  Vector xi;
  double beta = 0.0;
  double eta = 0.0;
  std::optional<double> eps1;
  /// All pair delays equal: the N^2 n factor of the delayed term drops to 1.
  bool synchronous_delays = false;
};

/// Network synchronization conditions.
///
///   beta + 2 L_f + theta2 bmax N eps1 + 2 Lambda
///     + theta2 bmax N^2 n L_g^2 (1 + eta) / (eps1 min xi) < 0
///   theta2 bmax N L_g < theta3
///
/// Lambda is theta1 lambda_max({Xi A~}^s) for pinning control and
/// lambda_max({Xi (theta1 A - theta4 I)}^s) for full-node control, where the
/// linear feedback -theta4 e_i enters the closed loop with a negative sign.
inline ConditionReport check_network_theorem(const NetworkConditionParams& p,
                                             NetworkControlKind variant) {
  if (variant == NetworkControlKind::None) {
    throw std::invalid_argument("network condition needs pinning or full-node control");
  }
  if (p.nodes == 0 || p.node_dim == 0) throw std::invalid_argument("network size must be > 0");
  const auto n_nodes = static_cast<Eigen::Index>(p.nodes);
  if (p.a.rows() != n_nodes || p.b.rows() != n_nodes || p.b.cols() != n_nodes ||
      p.xi.size() != n_nodes) {
    throw std::invalid_argument("network condition: dimension mismatch");
  }
  const double bmax = p.b.cwiseAbs().maxCoeff();
  const auto nn = static_cast<double>(p.nodes);
  const auto nd = static_cast<double>(p.node_dim);
  const double min_xi = p.xi.minCoeff();

  ConditionReport r;
  double lambda_term = 0.0;
  if (variant == NetworkControlKind::Pinning) {
    r.theorem = TheoremId::NetworkPinning;
    lambda_term = 2.0 * p.theta1 * lambda_max_sym(p.a, p.xi, p.sigma, 0, 0, SpectralKind::Tilde);
  } else {
    r.theorem = TheoremId::NetworkFullNode;
    lambda_term = 2.0 * lambda_max_sym(p.a, p.xi, 0.0, p.theta1, -p.theta4, SpectralKind::Hat);
  }

  const double delayed = p.theta2 * bmax;
  double tradeoff = 0.0;
  if (delayed > 0.0) {
    const double factor = p.synchronous_delays ? 1.0 : nn * nn * nd;
    const double a = delayed * nn;
    const double b = delayed * factor * p.lipschitz_g * p.lipschitz_g * (1.0 + p.eta) / min_xi;
    if (b > 0.0) {
      r.eps1_optimal = optimal_eps1(a, b).eps1;
      r.eps1_used = p.eps1.value_or(r.eps1_optimal);
      tradeoff = a * r.eps1_used + b / r.eps1_used;
    } else {
      r.eps1_used = p.eps1.value_or(std::numeric_limits<double>::quiet_NaN());
      if (p.eps1) tradeoff = a * *p.eps1;
    }
  }
  r.lhs = p.beta + 2.0 * p.lipschitz_f + tradeoff + lambda_term;
  r.margin = -r.lhs;
  r.sign_gain_threshold = delayed * nn * p.lipschitz_g;
  r.epsilon2_max = p.theta3 - r.sign_gain_threshold;
  r.feasible = r.lhs < 0.0 && r.epsilon2_max > 0.0;

  if (variant == NetworkControlKind::Pinning) {
    const double lam = lambda_max_sym(p.a, p.xi, p.sigma, 0, 0, SpectralKind::Tilde);
    r.linear_gain_threshold = (p.beta + 2.0 * p.lipschitz_f + tradeoff) / (-2.0 * lam);
  } else {
    // lambda_max({Xi(theta1 A - theta4 I)}^s) is strictly decreasing in theta4: bisect.
    const double rest = p.beta + 2.0 * p.lipschitz_f + tradeoff;
    auto lhs_at = [&](double t4) {
      return rest + 2.0 * lambda_max_sym(p.a, p.xi, 0.0, p.theta1, -t4, SpectralKind::Hat);
    };
    double lo = 0.0;
    double hi = 1.0;
    if (lhs_at(lo) < 0.0) {
      r.linear_gain_threshold = 0.0;
    } else {
      while (lhs_at(hi) >= 0.0 && hi < 1e12) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lhs_at(mid) < 0.0 ? hi : lo) = mid;
      }
      r.linear_gain_threshold = hi;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Settling-time bounds
// ---------------------------------------------------------------------------

/// T2 = T1 + 1 / eps2 with eps2 = kappa * epsilon2_max.
inline double settling_bound(const ConditionReport& report, double t1, double kappa = 0.9) {
  if (!report.feasible) throw InfeasibleError("settling bound requested for an infeasible report");
  if (!std::isfinite(t1)) throw std::invalid_argument("phase boundary T1 must be finite");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0, 1]");
  return t1 + 1.0 / (kappa * report.epsilon2_max);
}

/// Adaptive bound T4 = (1 + c3*^2/(2 d1) + c4*^2/(2 d3)) / eps2* + T3.
inline double adaptive_settling_bound(double eps2_star, double c3_star, double c4_star,
                                      const AdaptiveRates& rates, double t3) {
  if (!(eps2_star > 0.0)) throw InfeasibleError("eps2* must be > 0");
  return (1.0 + c3_star * c3_star / (2.0 * rates.d1) + c4_star * c4_star / (2.0 * rates.d3)) /
             eps2_star +
         t3;
}

// ---------------------------------------------------------------------------
// Lipschitz constants
// ---------------------------------------------------------------------------

/// Sampled lower estimate of the Lipschitz constant of `fn` on a box: the
/// largest difference quotient over random nearby pairs. Deterministic for a seed.
template <class Fn>
double estimate_lipschitz(Fn&& fn, std::span<const double> lower, std::span<const double> upper,
                          std::size_t samples = 20000, std::uint64_t seed = 1) {
  if (lower.size() != upper.size() || lower.empty()) {
    throw std::invalid_argument("box bounds dimension mismatch");
  }
  const std::size_t d = lower.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(d), y(d), fx(d), fy(d);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double dist2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double width = upper[i] - lower[i];
      x[i] = lower[i] + width * unit(rng);
      y[i] = std::clamp(x[i] + 1e-3 * width * (unit(rng) - 0.5), lower[i], upper[i]);
      dist2 += (y[i] - x[i]) * (y[i] - x[i]);
    }
    if (dist2 == 0.0) continue;
    fn(std::span<const double>(x), std::span<double>(fx));
    fn(std::span<const double>(y), std::span<double>(fy));
    double diff2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) diff2 += (fy[i] - fx[i]) * (fy[i] - fx[i]);
    best = std::max(best, std::sqrt(diff2 / dist2));
  }
  return best;
}

/// Exact Lipschitz constant (2-norm) of the Lorenz field with parameters
/// (10, 28, 8/3) on a box: the Jacobian is affine in the state, so the
/// largest spectral norm over the box sits at a vertex.
inline double lorenz_lipschitz_on_box(std::span<const double> lower, std::span<const double> upper) {
  if (lower.size() != 3 || upper.size() != 3) throw std::invalid_argument("Lorenz box must be 3-D");
  double best = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const double x1 = (corner & 1) ? upper[0] : lower[0];
    const double x2 = (corner & 2) ? upper[1] : lower[1];
    const double x3 = (corner & 4) ? upper[2] : lower[2];
    Eigen::Matrix3d j;
    j << -10.0, 10.0, 0.0, 28.0 - x3, -1.0, -x1, x2, x1, -8.0 / 3.0;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(j);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

}  // namespace ftd
