#pragma once

#include "linops.hpp"
#include "regularizers.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace spectralpath {

struct SingularCheck {
  bool ok = false;
  double violation = 0.0;
  Vec subgradient;  // lambda A^* A u
};

// Is lambda A^* A u a subgradient of J at u?
inline SingularCheck verify_singular_vector(const Operator& A, const Regularizer& J, const Vec& u, double lambda,
                                            double tol = 1e-8) {
  if (!(lambda > 0.0)) throw InputError("singular value must be positive");
  SingularCheck c;
  c.subgradient = lambda * A.apply_adjoint(A.apply(u));
  const MembershipReport m = J.dual_ball_membership(c.subgradient, tol);
  const double j = J.evaluate(u);
  c.violation = std::max(m.distance, std::abs(c.subgradient.dot(u) - j) / (1.0 + j));
  c.ok = c.violation <= tol;
  return c;
}

struct PeakSingular {
  double lambda = 0.0;
  bool valid = false;
  double worst_ratio = 0.0;  // max_{lag != 0} |autocorrelation| / sum a^2
};

// A unit peak under convolution with `kernel` and the L1 regularizer.
inline PeakSingular peak_singular_value(const Vec& kernel) {
  PeakSingular p;
  const double energy = kernel.squaredNorm();
  if (!(energy > 0.0)) throw InputError("kernel has no energy");
  p.lambda = 1.0 / energy;
  const Eigen::Index k = kernel.size();
  for (Eigen::Index lag = 1; lag < k; ++lag) {
    const double r = kernel.head(k - lag).dot(kernel.tail(k - lag));
    p.worst_ratio = std::max(p.worst_ratio, std::abs(r) / energy);
  }
  p.valid = p.worst_ratio <= 1.0;
  return p;
}

struct Component {
  Vec u;
  double gamma = 0.0;
  double lambda = 1.0;
  double ratio() const { return std::abs(gamma) / lambda; }
};

struct Sub0Report {
  bool ok = true;
  std::optional<std::size_t> failing_index;  // 1-based k of the first p_k outside K
  double distance = 0.0;
  std::optional<double> gauge;
};

// p_k = sum_{i >= k} sgn(gamma_i) lambda_i A^* A u_i must lie in K for every k.
// Components are expected in increasing order of |gamma| / lambda.
inline Sub0Report verify_sub0(const Operator& A, const Regularizer& J, const std::vector<Component>& comps,
                              double tol = 1e-8) {
  Sub0Report rep;
  Vec p = Vec::Zero(J.size());
  std::vector<Vec> partial(comps.size());
  for (std::size_t i = comps.size(); i-- > 0;) {
    const Component& c = comps[i];
    p += (c.gamma >= 0.0 ? 1.0 : -1.0) * c.lambda * A.apply_adjoint(A.apply(c.u));
    partial[i] = p;
  }
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const MembershipReport m = J.dual_ball_membership(partial[k], tol);
    if (!m.inside) {
      rep.ok = false;
      rep.failing_index = k + 1;
      rep.distance = m.distance;
      rep.gauge = m.gauge;
      return rep;
    }
  }
  return rep;
}

enum class EqualRatios { Reject, Merge };

// A-orthogonal singular vectors with coefficients, sorted by |gamma| / lambda.
struct Decomposition {
  std::vector<Component> components;
  std::vector<Vec> images;  // A u_i
  Vec data;                 // f = sum gamma_i A u_i
  Vec solution;             // sum gamma_i u_i
  Sub0Report sub0;

  std::vector<double> critical_taus() const {
    std::vector<double> t;
    for (const auto& c : components) t.push_back(c.ratio());
    return t;
  }
};

inline Decomposition make_decomposition(const Operator& A, const Regularizer& J, std::vector<Component> comps,
                                        double tol = 1e-8, EqualRatios policy = EqualRatios::Reject) {
  if (comps.empty()) throw InputError("decomposition needs at least one component");
  for (const auto& c : comps) {
    if (c.u.size() != J.size()) throw InputError("component has the wrong size");
    if (!(c.lambda > 0.0) || c.gamma == 0.0 || !std::isfinite(c.gamma))
      throw InputError("components need lambda > 0 and a finite non-zero coefficient");
  }
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) { return a.ratio() < b.ratio(); });

  std::vector<Component> merged;
  for (const auto& c : comps) {
    if (!merged.empty() && std::abs(c.ratio() - merged.back().ratio()) <= 1e-12 * c.ratio()) {
      if (policy == EqualRatios::Reject)
        throw InputError("components share the ratio |gamma|/lambda = " + std::to_string(c.ratio()) +
                         "; the ordering must be strict");
      Component& m = merged.back();
      if (std::abs(m.lambda - c.lambda) > 1e-12 * c.lambda)
        throw InputError("components with equal ratios but different singular values cannot be merged");
      const double g = m.ratio() * m.lambda;
      m.u = (m.gamma * m.u + c.gamma * c.u) / g;
      m.gamma = g;
      continue;
    }
    merged.push_back(c);
  }

  Decomposition d;
  for (const auto& c : merged) {
    const SingularCheck s = verify_singular_vector(A, J, c.u, c.lambda, tol);
    if (!s.ok) throw InputError("component is not a singular vector (violation " + std::to_string(s.violation) + ")");
    d.images.push_back(A.apply(c.u));
  }
  for (std::size_t i = 0; i < merged.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double ip = d.images[i].dot(d.images[j]);
      if (std::abs(ip) > tol * d.images[i].norm() * d.images[j].norm())
        throw InputError("components are not A-orthogonal");
    }
  d.components = std::move(merged);
  d.data = Vec::Zero(static_cast<Eigen::Index>(A.output_shape().size()));
  d.solution = Vec::Zero(J.size());
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    d.data += d.components[i].gamma * d.images[i];
    d.solution += d.components[i].gamma * d.components[i].u;
  }
  d.sub0 = verify_sub0(A, J, d.components, tol);
  return d;
}

// The (2,1) minimizer v_tau = sum sgn(gamma_i) (|gamma_i| - tau lambda_i)_+ u_i.
inline Vec combination_path(const Decomposition& d, double tau) {
  if (!d.sub0.ok) throw ConfigurationError("the nested subgradient condition is not verified for this decomposition");
  if (!(tau >= 0.0)) throw InputError("tau must be non-negative");
  Vec v = Vec::Zero(d.solution.size());
  for (const auto& c : d.components) {
    const double a = positive_part(std::abs(c.gamma) - tau * c.lambda);
    if (a > 0.0) v += std::copysign(a, c.gamma) * c.u;
  }
  return v;
}

// ||A v_tau - f|| along the closed form.
inline double combination_residual(const Decomposition& d, double tau) {
  Vec r = -d.data;
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    const auto& c = d.components[i];
    const double a = positive_part(std::abs(c.gamma) - tau * c.lambda);
    r += std::copysign(a, c.gamma) * d.images[i];
  }
  return r.norm();
}

namespace detail {
// a^2 = sum_{i<k} gamma_i^2 ||A u_i||^2, b = || sum_{i>=k} sgn(gamma_i) lambda_i A u_i ||
inline std::pair<double, double> branch_constants(const Decomposition& d, std::size_t k) {
  double a2 = 0.0;
  Vec q = Vec::Zero(d.data.size());
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    const auto& c = d.components[i];
    if (i < k) a2 += c.gamma * c.gamma * d.images[i].squaredNorm();
    else q += (c.gamma >= 0.0 ? 1.0 : -1.0) * c.lambda * d.images[i];
  }
  return {std::sqrt(a2), q.norm()};
}
}  // namespace detail

// t_k = tau_k / R(tau_k): breakpoints of the (1,1) parametrization.
inline std::vector<double> combination_breakpoints(const Decomposition& d) {
  std::vector<double> t;
  for (const auto& c : d.components) {
    const double tau = c.ratio();
    t.push_back(tau / combination_residual(d, tau));
  }
  return t;
}

// tau = S(t) for the (1,1) model: 0 up to t_1, then t a / sqrt(1 - t^2 b^2) on (t_{k-1}, t_k].
inline double combination_reparam_S(const Decomposition& d, double t) {
  if (!d.sub0.ok) throw ConfigurationError("the nested subgradient condition is not verified for this decomposition");
  if (!(t >= 0.0)) throw InputError("t must be non-negative");
  const std::vector<double> bp = combination_breakpoints(d);
  if (t <= bp.front()) return 0.0;
  std::size_t k = 1;
  while (k < bp.size() && t > bp[k]) ++k;
  if (k == bp.size()) return d.components.back().ratio();
  const auto [a, b] = detail::branch_constants(d, k);
  return t * a / std::sqrt(1.0 - t * t * b * b);
}

// Coefficient c(t) with u_t = c(t) u for data f = A u and a singular vector u.
inline double singular_path_coefficient(double alpha, int beta, double lambda, double fnorm, double t) {
  if (!(lambda > 0.0) || !(fnorm > 0.0) || !(t >= 0.0)) throw InputError("need lambda > 0, ||f|| > 0, t >= 0");
  if (beta == 1) {
    if (alpha == 1.0) return t < 1.0 / (lambda * fnorm) ? 1.0 : 0.0;
    if (alpha < 1.0) throw InputError("alpha must be >= 1");
    return positive_part(1.0 - std::pow(t * lambda, 1.0 / (alpha - 1.0)) *
                                   std::pow(fnorm, (2.0 - alpha) / (alpha - 1.0)));
  }
  if (beta == 2 && alpha == 2.0) return 1.0 / (1.0 + t * lambda * lambda * fnorm * fnorm);
  throw NotSupported("closed-form singular path is available for beta = 1 and for (alpha, beta) = (2, 2)");
}

}  // namespace spectralpath
