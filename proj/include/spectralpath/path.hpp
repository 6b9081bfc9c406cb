#pragma once

#include "solver.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <vector>

namespace spectralpath {

struct PathEntry {
  double t = 0.0;
  Vec u;
  Vec forward;  // A u
  double residual = 0.0;
  double reg_value = 0.0;
  double violation = 0.0;
  bool converged = false;
  int iterations = 0;
  DualState dual;
};

// Minimizers sampled on an increasing grid, plus the two ends of the path:
// the unregularized solution at t = 0 and the A-projection reached at extinction.
struct PathTable {
  Problem problem;
  SolveOptions options;
  std::vector<PathEntry> entries;
  Vec origin, origin_forward;  // least-squares solution and its image
  Vec limit, limit_forward;    // P f and A P f

  double alpha() const { return problem.alpha(); }
  int beta() const { return problem.beta(); }
  std::size_t size() const { return entries.size(); }
  std::vector<double> grid() const {
    std::vector<double> g;
    for (const auto& e : entries) g.push_back(e.t);
    return g;
  }
  bool all_converged() const {
    return std::all_of(entries.begin(), entries.end(), [](const PathEntry& e) { return e.converged; });
  }
  double max_violation() const {
    double v = 0.0;
    for (const auto& e : entries) v = std::max(v, e.violation);
    return v;
  }
};

inline void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("time grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] <= 0.0) throw InputError("time grid values must be finite and positive");
    if (i && grid[i] <= grid[i - 1]) throw InputError("time grid must be strictly increasing");
  }
}

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InputError("geometric grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double r = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(r * static_cast<double>(i));
  g.back() = hi;
  return g;
}

// t_i = i * hi / n, i = 1..n: uniform including the implicit origin.
inline std::vector<double> uniform_grid(double hi, std::size_t n) {
  if (!(hi > 0.0) || n < 1) throw InputError("uniform grid needs hi > 0 and n >= 1");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = hi * static_cast<double>(i + 1) / static_cast<double>(n);
  return g;
}

inline std::vector<double> default_grid(double scale_hint, double extinction_bound, std::size_t n = 100) {
  return geometric_grid(1e-3 * scale_hint, 1.5 * extinction_bound, n);
}

namespace detail {

inline PathEntry to_entry(const Problem& pr, double t, const SolveResult& r) {
  PathEntry e;
  e.t = t;
  e.u = r.u.values();
  e.forward = pr.op().apply(e.u);
  e.residual = r.residual;
  e.reg_value = r.reg_value;
  e.violation = r.violation;
  e.converged = r.converged;
  e.iterations = r.iterations;
  e.dual = r.dual;
  return e;
}

inline SolveResult solve_from(const Problem& pr, double t, SolveOptions opts, const PathEntry* warm) {
  if (warm) {
    opts.warm_u = warm->u;
    opts.warm_dual = warm->dual;
  }
  return solve(pr, t, opts);
}

}  // namespace detail

// Solves along an increasing grid, each solve warm-started from its predecessor.
inline PathTable sample_path(const Problem& pr, const std::vector<double>& grid, const SolveOptions& opts = {}) {
  validate_grid(grid);
  PathTable table{pr, opts, {}, {}, {}, {}, {}};
  table.origin = pr.least_squares(pr.f());
  table.origin_forward = pr.op().apply(table.origin);
  table.limit = pr.projection().project(pr.f());
  table.limit_forward = pr.op().apply(table.limit);
  table.entries.reserve(grid.size());
  for (double t : grid) {
    const PathEntry* warm = table.entries.empty() ? nullptr : &table.entries.back();
    table.entries.push_back(detail::to_entry(pr, t, detail::solve_from(pr, t, opts, warm)));
  }
  return table;
}

// Same table with extra samples; only the new times are solved.
inline PathTable insert_samples(const PathTable& table, std::vector<double> times) {
  PathTable out = table;
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("inserted times must be positive");
    auto it = std::lower_bound(out.entries.begin(), out.entries.end(), t,
                               [](const PathEntry& e, double v) { return e.t < v; });
    if (it != out.entries.end() && it->t == t) continue;
    const PathEntry* warm = it == out.entries.begin() ? nullptr : &*(it - 1);
    PathEntry e = detail::to_entry(out.problem, t, detail::solve_from(out.problem, t, out.options, warm));
    out.entries.insert(it, std::move(e));
  }
  return out;
}

namespace detail {

// Boundary of a monotone predicate between two grid times by bisection with fresh solves.
template <class Pred>
double bisect_boundary(const PathTable& table, std::size_t lo_idx, std::size_t hi_idx, Pred&& holds_high,
                       int steps) {
  double lo = table.entries[lo_idx].t, hi = table.entries[hi_idx].t;
  PathEntry warm = table.entries[lo_idx];
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const SolveResult r = solve_from(table.problem, mid, table.options, &warm);
    PathEntry e = to_entry(table.problem, mid, r);
    if (holds_high(e)) {
      hi = mid;
    } else {
      lo = mid;
      warm = std::move(e);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Smallest time with A u_t = A P f, refined between grid neighbours.
inline std::optional<double> detect_extinction(const PathTable& table, double tol = 1e-7, int steps = 40) {
  const double scale = tol * (1.0 + table.problem.f().norm());
  auto extinct = [&](const PathEntry& e) { return (e.forward - table.limit_forward).norm() <= scale; };
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!extinct(table.entries[i])) continue;
    if (i == 0) return table.entries[0].t;
    return detail::bisect_boundary(table, i - 1, i, extinct, steps);
  }
  return std::nullopt;
}

// Largest time with an exact data fit; only meaningful for alpha = 1.
inline std::optional<double> detect_exact_penalization(const PathTable& table, double tol = 1e-7, int steps = 40) {
  if (table.alpha() != 1.0) return std::nullopt;
  const double scale = tol * (1.0 + table.problem.f().norm());
  auto fits = [&](const PathEntry& e) { return e.residual <= scale; };
  if (table.entries.empty() || !fits(table.entries[0])) return std::nullopt;
  std::size_t last = 0;
  while (last + 1 < table.size() && fits(table.entries[last + 1])) ++last;
  if (last + 1 == table.size()) return table.entries[last].t;
  return detail::bisect_boundary(table, last, last + 1, [&](const PathEntry& e) { return !fits(e); }, steps);
}

// S(f) / ||f - A P f||^(2 - alpha), with S(f) the dual norm of A^*(f - A P f).
inline double extinction_bound(const Problem& pr) {
  if (pr.beta() != 1) throw NotSupported("extinction bound is available for beta = 1 only");
  const Vec resid = pr.f() - pr.projection().project_forward(pr.f());
  const Vec g = pr.op().apply_adjoint(resid);
  double s = 0.0;
  switch (pr.reg().kind()) {
    case Regularizer::Kind::L1:
    case Regularizer::Kind::Linf:
    case Regularizer::Kind::QuadraticForm:
    case Regularizer::Kind::TV1D: {
      Vec gg = g;
      if (pr.reg().kind() == Regularizer::Kind::TV1D) gg.array() -= gg.mean();
      s = *pr.reg().gauge(gg);
      break;
    }
    case Regularizer::Kind::TV2D: throw NotSupported("extinction bound is not available for TV2D");
  }
  const double r = resid.norm();
  if (r == 0.0) return 0.0;
  return s / std::pow(r, 2.0 - pr.alpha());
}

struct CriticalTimes {
  std::optional<double> exact_penalization;
  std::optional<double> extinction;
  std::optional<double> extinction_bound;
};

inline CriticalTimes detect_critical_times(const PathTable& table, double tol = 1e-7) {
  CriticalTimes c;
  c.exact_penalization = detect_exact_penalization(table, tol);
  c.extinction = detect_extinction(table, tol);
  try {
    c.extinction_bound = extinction_bound(table.problem);
  } catch (const NotSupported&) {
  }
  return c;
}

struct Reparam {
  double value = 0.0;
  bool degenerate = false;  // a zero base met a negative exponent
};

namespace detail {
inline Reparam power_product(double scale, double r, double re, double j, double je) {
  Reparam out;
  auto term = [&](double base, double e) {
    if (e == 0.0) return 1.0;
    if (base == 0.0) {
      if (e < 0.0) out.degenerate = true;
      return e < 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return std::pow(base, e);
  };
  const double a = term(r, re), b = term(j, je);
  out.value = scale * a * b;
  if (std::isnan(out.value)) {
    out.degenerate = true;
    out.value = std::numeric_limits<double>::infinity();
  }
  return out;
}
}  // namespace detail

// tau of the (2,1) model -> t of the (alpha, beta) model, from R and J at v_tau.
inline Reparam reparam_T(double r, double j, double tau, double alpha, int beta) {
  return detail::power_product(tau, r, alpha - 2.0, j, 1.0 - beta);
}

// t of the (alpha, beta) model -> tau of the (2,1) model, from R and J at u_t.
inline Reparam reparam_S(double r, double j, double t, double alpha, int beta) {
  return detail::power_product(t, r, 2.0 - alpha, j, beta - 1.0);
}

// Largest u-space deviation between warm-started samples and cold re-solves.
inline double cold_start_deviation(const PathTable& table, std::size_t count = 5, std::uint64_t seed = 7) {
  if (table.entries.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, table.size() - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const PathEntry& e = table.entries[pick(rng)];
    SolveOptions opts = table.options;
    opts.warm_u.reset();
    opts.warm_dual.reset();
    const SolveResult r = solve(table.problem, e.t, opts);
    worst = std::max(worst, (r.u.values() - e.u).norm());
  }
  return worst;
}

// max over consecutive samples of R decreasing or J increasing (0 if monotone).
inline double monotonicity_violation(const PathTable& table) {
  double worst = 0.0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    worst = std::max(worst, table.entries[i - 1].residual - table.entries[i].residual);
    worst = std::max(worst, table.entries[i].reg_value - table.entries[i - 1].reg_value);
  }
  return worst;
}

// max over pairs s < t of ||A u_t - A u_s|| - (t - s)/t R(t); the bound holds for alpha >= 2.
inline double lipschitz_violation(const PathTable& table) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < table.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const auto& s = table.entries[i];
      const auto& t = table.entries[j];
      const double d = (t.forward - s.forward).norm();
      worst = std::max(worst, d - (t.t - s.t) / t.t * t.residual);
    }
  return worst;
}

// max_i R(t_i) - t_i^(1/alpha) Jmin^(beta/alpha)
inline double residual_growth_violation(const PathTable& table, double jmin) {
  double worst = -std::numeric_limits<double>::infinity();
  const double a = table.alpha();
  for (const auto& e : table.entries)
    worst = std::max(worst, e.residual - std::pow(e.t, 1.0 / a) * std::pow(jmin, table.beta() / a));
  return worst;
}

inline double path_variation(const PathTable& table) {
  double v = 0.0;
  for (std::size_t i = 1; i < table.size(); ++i) v += (table.entries[i].forward - table.entries[i - 1].forward).norm();
  return v;
}

// Cosine between two residual vectors; 1 when either vanishes.
inline double residual_cosine(const Vec& a, const Vec& b, double zero = 1e-12) {
  const double na = a.norm(), nb = b.norm();
  if (na <= zero || nb <= zero) return 1.0;
  return a.dot(b) / (na * nb);
}

inline void write_path_csv(std::ostream& os, const PathTable& table) {
  const auto old = os.precision(17);
  os << "t,R,J,violation\n";
  for (const auto& e : table.entries) os << e.t << ',' << e.residual << ',' << e.reg_value << ',' << e.violation << '\n';
  os.precision(old);
}

// One row per grid time: t followed by the entries of u_t.
inline void write_solutions_csv(std::ostream& os, const PathTable& table) {
  const auto old = os.precision(17);
  for (const auto& e : table.entries) {
    os << e.t;
    for (Eigen::Index i = 0; i < e.u.size(); ++i) os << ',' << e.u[i];
    os << '\n';
  }
  os.precision(old);
}

}  // namespace spectralpath
