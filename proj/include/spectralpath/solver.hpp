#pragma once

#include "aproj.hpp"
#include "linops.hpp"
#include "regularizers.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace spectralpath {

// Minimizer of 0.5 ||v - w||^2 + (s / alpha) ||v - f||^alpha.
inline Vec fidelity_prox(const Vec& w, const Vec& f, double alpha, double s) {
  if (!(alpha >= 1.0)) throw InputError("fidelity exponent must be >= 1");
  if (!(s >= 0.0)) throw InputError("fidelity prox step must be non-negative");
  const Vec diff = w - f;
  const double d = diff.norm();
  if (d == 0.0 || s == 0.0) return w;
  double rho;
  if (alpha == 1.0) {
    rho = positive_part(d - s);
  } else if (alpha == 2.0) {
    rho = d / (1.0 + s);
  } else {
    // rho + s rho^(alpha-1) = d on [0, d]
    double lo = 0.0, hi = d;
    rho = alpha > 2.0 ? d : d / (1.0 + s);
    for (int it = 0; it < 200; ++it) {
      const double g = rho + s * std::pow(rho, alpha - 1.0) - d;
      if (g > 0.0) hi = rho; else lo = rho;
      if (std::abs(g) <= 1e-15 * d || hi - lo <= 1e-13 * d) break;
      const double dg = 1.0 + s * (alpha - 1.0) * std::pow(rho, alpha - 2.0);
      double next = rho - g / dg;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      rho = next;
    }
  }
  return f + (rho / d) * diff;
}

inline Signal fidelity_prox(const Signal& w, const Signal& f, double alpha, double s) {
  if (w.shape() != f.shape()) throw InputError("fidelity prox arguments differ in shape");
  return like(w, fidelity_prox(w.values(), f.values(), alpha, s));
}

// Everything needed to pose min (1/alpha)||Au - f||^alpha + (t/beta) J(u)^beta.
class Problem {
 public:
  Problem(Operator op, Regularizer reg, Signal data, double alpha, int beta = 1)
      : op_(std::move(op)), reg_(std::move(reg)), data_(std::move(data)), alpha_(alpha), beta_(beta),
        cache_(std::make_shared<Cache>()) {
    if (op_.input_shape() != reg_.domain())
      throw InputError("operator input " + op_.input_shape().str() + " does not match regularizer domain " +
                       reg_.domain().str());
    if (op_.output_shape() != data_.shape())
      throw InputError("data shape " + data_.shape().str() + " does not match operator output " +
                       op_.output_shape().str());
    if (!(alpha_ >= 1.0) || !std::isfinite(alpha_)) throw InputError("alpha must be a finite number >= 1");
    if (beta_ != 1 && beta_ != 2) throw InputError("beta must be 1 or 2");
  }

  const Operator& op() const { return op_; }
  const Regularizer& reg() const { return reg_; }
  const Signal& data() const { return data_; }
  const Vec& f() const { return data_.values(); }
  double alpha() const { return alpha_; }
  int beta() const { return beta_; }
  bool two_dimensional() const { return reg_.domain().dims == 2; }

  Problem with_model(double alpha, int beta) const {
    Problem p(*this);
    p.alpha_ = alpha;
    p.beta_ = beta;
    if (!(alpha >= 1.0) || (beta != 1 && beta != 2)) throw InputError("invalid model exponents");
    return p;
  }

  double op_norm() const {
    if (!cache_->op_norm) cache_->op_norm = operator_norm(op_) * (1.0 + 1e-9);
    return *cache_->op_norm;
  }

  double stacked_norm() const {
    if (!cache_->stacked_norm) {
      Vec a, b, c;
      cache_->stacked_norm =
          power_iteration_norm(
              [&](const Vec& x, Vec& y) {
                op_.apply(x, a);
                op_.apply_adjoint(a, y);
                reg_.forward(x, b);
                reg_.adjoint(b, c);
                y += c;
              },
              reg_.size(), 1e-12) *
          (1.0 + 1e-6);
    }
    return *cache_->stacked_norm;
  }

  const AProjection& projection() const {
    if (!cache_->proj) cache_->proj = std::make_shared<AProjection>(op_, reg_.nullspace_basis());
    return *cache_->proj;
  }

  // Minimum-norm least-squares solution of A u = g.
  Vec least_squares(const Vec& g) const {
    if (op_.is_identity()) return g;
    if (!cache_->cod) cache_->cod = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Mat>>(op_.materialize());
    return cache_->cod->solve(g);
  }

 private:
  struct Cache {
    std::optional<double> op_norm, stacked_norm;
    std::shared_ptr<AProjection> proj;
    std::shared_ptr<Eigen::CompleteOrthogonalDecomposition<Mat>> cod;
  };

  Operator op_;
  Regularizer reg_;
  Signal data_;
  double alpha_;
  int beta_;
  std::shared_ptr<Cache> cache_;
};

inline double energy(const Problem& pr, double t, const Vec& u) {
  const double r = (pr.op().apply(u) - pr.f()).norm();
  const double j = pr.reg().evaluate(u);
  return std::pow(r, pr.alpha()) / pr.alpha() + t * std::pow(j, pr.beta()) / pr.beta();
}

// Dual iterates carried between solves and used as certificates.
struct DualState {
  Vec data;  // q with ||q|| <= 1 at exact data fit (alpha = 1)
  Vec reg;   // gradient-space witness for p in K (TV kinds), scaled into C
};

struct OptimalityReport {
  double violation = std::numeric_limits<double>::infinity();
  double distance = 0.0;       // dist(p, K)
  double complementarity = 0.0;
  Vec subgradient;             // p
  bool exact_fit = false;      // certified through A u = f and the data-space dual
  bool degenerate = false;
  std::string reason;
};

struct CheckOptions {
  double zero_residual_tol = 1e-6;
  int max_inner = 2000;
};

namespace detail {

inline OptimalityReport residual_branch(const Problem& pr, double c, const Vec& u, const Vec& au, double r,
                                        double j, double tol, const DualState* hint, int max_inner) {
  OptimalityReport rep;
  const Vec p = pr.op().apply_adjoint(pr.f() - au) / (c * std::pow(r, 2.0 - pr.alpha()));
  if (!p.allFinite()) {
    rep.degenerate = true;
    rep.reason = "subgradient candidate overflows";
    return rep;
  }
  const Vec* reg_hint = hint && hint->reg.size() ? &hint->reg : nullptr;
  const MembershipReport m = pr.reg().dual_ball_membership(p, tol, reg_hint, max_inner);
  rep.distance = m.distance;
  rep.complementarity = std::abs(p.dot(u) - j) / (1.0 + j);
  rep.violation = std::max(rep.distance, rep.complementarity);
  rep.subgradient = p;
  return rep;
}

inline OptimalityReport exact_branch(const Problem& pr, double c, const Vec& u, double r, double j, double tol,
                                     const Vec& q_raw, const DualState* hint, int max_inner) {
  OptimalityReport rep;
  rep.exact_fit = true;
  const double qn = q_raw.norm();
  const Vec q = qn > 1.0 ? Vec(q_raw / qn) : q_raw;
  const Vec p = -pr.op().apply_adjoint(q) / c;
  const Vec* reg_hint = hint && hint->reg.size() ? &hint->reg : nullptr;
  const MembershipReport m = pr.reg().dual_ball_membership(p, tol, reg_hint, max_inner);
  rep.distance = m.distance;
  rep.complementarity = std::abs(p.dot(u) - j) / (1.0 + j);
  rep.violation = std::max({rep.distance, rep.complementarity, r / (1.0 + pr.f().norm())});
  rep.subgradient = p;
  return rep;
}

}  // namespace detail

struct SolveOptions {
  int max_iters = 100000;
  double gap_tol = -1.0;  // negative: 1e-8 for 1-D, 1e-6 for 2-D
  double step_ratio = 1.0;
  int check_every = 10;
  std::optional<Vec> warm_u;
  std::optional<DualState> warm_dual;
  double zero_residual_tol = 1e-6;
  int max_inner = 50;  // TV2D membership iterations per convergence check
  bool polish = true;

  double tolerance(const Problem& pr) const {
    if (gap_tol > 0.0) return gap_tol;
    return pr.two_dimensional() ? 1e-6 : 1e-8;
  }
};

struct SolveResult {
  Signal u;
  double residual = 0.0;
  double reg_value = 0.0;
  int iterations = 0;
  double violation = std::numeric_limits<double>::infinity();
  bool converged = false;
  double weight = 0.0;  // effective weight of the one-homogeneous problem solved last
  DualState dual;
  std::string note;
};

namespace detail {

// Chambolle-Pock for min (1/alpha)||Au - f||^alpha + s J(u).
class PrimalDual {
 public:
  enum class Mode { RegularizerPrimal, FidelityPrimal, Stacked };

  PrimalDual(const Problem& pr, double s, const SolveOptions& opts) : pr_(pr), s_(s), opts_(opts) {
    const Regularizer& J = pr.reg();
    const Operator& A = pr.op();
    if (!J.is_tv()) mode_ = Mode::RegularizerPrimal;
    else if (A.is_identity()) mode_ = Mode::FidelityPrimal;
    else mode_ = Mode::Stacked;
    double L = 1.0;
    switch (mode_) {
      case Mode::RegularizerPrimal: L = pr.op_norm(); break;
      case Mode::FidelityPrimal: L = std::sqrt(J.diff_norm_sq()); break;
      case Mode::Stacked: L = pr.stacked_norm(); break;
    }
    if (L <= 0.0) L = 1.0;
    sigma_ = 0.99 * opts.step_ratio / L;
    tau_ = 0.99 / (opts.step_ratio * L);

    u_ = opts.warm_u && opts.warm_u->size() == J.size() ? *opts.warm_u : Vec::Zero(J.size());
    y_data_ = Vec::Zero(static_cast<Eigen::Index>(A.output_shape().size()));
    y_reg_ = Vec::Zero(J.is_tv() ? J.dual_size() : 0);
    if (opts.warm_dual) {
      if (opts.warm_dual->data.size() == y_data_.size()) y_data_ = opts.warm_dual->data;
      if (J.is_tv() && opts.warm_dual->reg.size() == y_reg_.size()) y_reg_ = s_ * opts.warm_dual->reg;
    }
    if (mode_ == Mode::FidelityPrimal) y_data_.resize(0);
    ubar_ = u_;
  }

  void step() {
    const Operator& A = pr_.op();
    const Regularizer& J = pr_.reg();
    const Vec& f = pr_.f();
    switch (mode_) {
      case Mode::RegularizerPrimal: {
        A.apply(ubar_, tmp_data_);
        dual_fidelity_step();
        A.apply_adjoint(y_data_, tmp_u_);
        u_new_ = J.prox(u_ - tau_ * tmp_u_, tau_ * s_);
        break;
      }
      case Mode::FidelityPrimal: {
        J.forward(ubar_, tmp_reg_);
        y_reg_ = (y_reg_ + sigma_ * tmp_reg_).cwiseMax(-s_).cwiseMin(s_);
        J.adjoint(y_reg_, tmp_u_);
        u_new_ = fidelity_prox(u_ - tau_ * tmp_u_, f, pr_.alpha(), tau_);
        break;
      }
      case Mode::Stacked: {
        A.apply(ubar_, tmp_data_);
        dual_fidelity_step();
        J.forward(ubar_, tmp_reg_);
        y_reg_ = (y_reg_ + sigma_ * tmp_reg_).cwiseMax(-s_).cwiseMin(s_);
        A.apply_adjoint(y_data_, tmp_u_);
        J.adjoint(y_reg_, tmp_u2_);
        u_new_ = u_ - tau_ * (tmp_u_ + tmp_u2_);
        break;
      }
    }
    ubar_ = 2.0 * u_new_ - u_;
    u_.swap(u_new_);
  }

  const Vec& u() const { return u_; }
  void reset_to(const Vec& u) {
    u_ = u;
    ubar_ = u;
  }

  DualState dual() const {
    DualState d;
    const Regularizer& J = pr_.reg();
    if (mode_ == Mode::FidelityPrimal) {
      d.data = -J.adjoint(y_reg_);
    } else {
      d.data = y_data_;
    }
    if (J.is_tv()) d.reg = s_ > 0.0 ? Vec(y_reg_ / s_) : y_reg_;
    return d;
  }

 private:
  // y <- prox_{sigma Phi*}(y + sigma A ubar) via the Moreau identity
  void dual_fidelity_step() {
    const Vec z = y_data_ + sigma_ * tmp_data_;
    y_data_ = z - sigma_ * fidelity_prox(z / sigma_, pr_.f(), pr_.alpha(), 1.0 / sigma_);
  }

  const Problem& pr_;
  double s_;
  SolveOptions opts_;
  Mode mode_;
  double sigma_ = 1.0, tau_ = 1.0;
  Vec u_, ubar_, u_new_, y_data_, y_reg_;
  Vec tmp_data_, tmp_u_, tmp_u2_, tmp_reg_;
};

inline OptimalityReport check_impl(const Problem& pr, double t, const Vec& u, double tol, const DualState* hint,
                                   const CheckOptions& opts, bool allow_reference_solve);

inline SolveResult finish(const Problem& pr, const Vec& u) {
  SolveResult res;
  res.u = Signal(pr.reg().domain(), u);
  res.residual = (pr.op().apply(u) - pr.f()).norm();
  res.reg_value = pr.reg().evaluate(u);
  return res;
}

// alpha = 2 and A = id: the minimizer is prox_{sJ}(f), found on the dual side so the
// dual variable is also the certificate.
inline SolveResult solve_denoise(const Problem& pr, double s, const SolveOptions& opts, double tol) {
  const Regularizer& J = pr.reg();
  const Vec& f = pr.f();
  const CheckOptions copts{opts.zero_residual_tol, opts.max_inner};
  DualState d;
  Vec u;
  OptimalityReport rep;
  int iters = 0;
  if (J.kind() == Regularizer::Kind::TV1D) {
    u = taut_string(f, s);
    d.data = u - f;
    rep = check_impl(pr, s, u, tol, &d, copts, false);
  } else {
    Vec q = opts.warm_dual && opts.warm_dual->reg.size() == J.dual_size() ? opts.warm_dual->reg
                                                                          : Vec::Zero(J.dual_size());
    double gap_tol = tol * std::min(1.0, 1.0 / s);
    for (int round = 0; round < 4 && iters < opts.max_iters; ++round) {
      DualSolveResult r = J.dual_solve(f / s, opts.max_iters - iters, gap_tol, &q);
      iters += r.iterations;
      q = std::move(r.q);
      u = -s * r.residual;
      d.data = u - f;
      d.reg = q;
      rep = check_impl(pr, s, u, tol, &d, copts, false);
      if (rep.violation <= tol) break;
      gap_tol *= 0.1;
    }
  }
  if (opts.polish) {
    const Vec ext = pr.projection().project(f);
    if ((u - ext).norm() <= 1e-4 * (1.0 + f.norm())) {
      const OptimalityReport e = check_impl(pr, s, ext, tol, &d, copts, false);
      if (e.violation <= tol) {
        u = ext;
        rep = e;
      }
    }
  }
  SolveResult res = finish(pr, u);
  res.iterations = iters;
  res.violation = rep.violation;
  res.converged = rep.violation <= tol;
  res.dual = d;
  res.weight = s;
  if (!res.converged) res.note = "dual projection stopped before reaching the optimality tolerance";
  return res;
}

// One-homogeneous regularization (beta = 1) with weight s.
inline SolveResult solve_weighted(const Problem& pr1, double s, const SolveOptions& opts) {
  const double tol = opts.tolerance(pr1);
  const double fn = pr1.f().norm();
  if (s == 0.0) {
    SolveResult res = finish(pr1, pr1.least_squares(pr1.f()));
    res.violation = (pr1.op().apply_adjoint(pr1.op().apply(res.u.values()) - pr1.f())).norm() / (1.0 + fn);
    res.converged = res.violation <= std::max(tol, 1e-10);
    res.note = "least-squares solution";
    return res;
  }
  if (pr1.alpha() == 2.0 && pr1.op().is_identity() && pr1.reg().is_tv()) return solve_denoise(pr1, s, opts, tol);

  PrimalDual pd(pr1, s, opts);
  CheckOptions copts;
  copts.zero_residual_tol = opts.zero_residual_tol;
  copts.max_inner = opts.max_inner;

  std::optional<Vec> candidate_u;
  OptimalityReport best;
  int it = 0;
  const int every = std::max(1, opts.check_every);
  Vec best_u = pd.u();
  DualState best_dual = pd.dual();
  auto consider = [&](const Vec& u, const DualState& d) {
    OptimalityReport rep = check_impl(pr1, s, u, tol, &d, copts, false);
    if (rep.violation < best.violation) {
      best = rep;
      best_u = u;
      best_dual = d;
    }
    return rep.violation <= tol;
  };
  // Exact candidates replace the iterate whenever they carry a certificate.
  auto certify = [&](const Vec& u, const DualState& d) {
    OptimalityReport rep = check_impl(pr1, s, u, tol, &d, copts, false);
    if (rep.violation > tol) return false;
    best = rep;
    best_u = u;
    best_dual = d;
    return true;
  };
  auto try_candidates = [&](const Vec& u, const DualState& d) {
    if (!opts.polish) return false;
    const Vec au = pr1.op().apply(u);
    const Vec ext = pr1.projection().project(pr1.f());
    if ((au - pr1.op().apply(ext)).norm() <= 1e-4 * (1.0 + fn) && certify(ext, d)) return true;
    if (pr1.alpha() == 1.0 && (au - pr1.f()).norm() <= 1e-4 * (1.0 + fn)) {
      const Vec fit = u + pr1.least_squares(pr1.f() - au);
      if ((pr1.op().apply(fit) - pr1.f()).norm() <= 1e-12 * (1.0 + fn) && certify(fit, d)) return true;
    }
    return false;
  };
  // last resort when the iterate stalls on a flat stretch of the energy
  auto try_candidates_anywhere = [&] {
    if (!opts.polish) return;
    if (certify(pr1.projection().project(pr1.f()), best_dual)) return;
    if (pr1.alpha() == 1.0) {
      const Vec fit = best_u + pr1.least_squares(pr1.f() - pr1.op().apply(best_u));
      if ((pr1.op().apply(fit) - pr1.f()).norm() <= 1e-12 * (1.0 + fn)) certify(fit, best_dual);
    }
  };
  auto check_now = [&](const Vec& u, const DualState& d) {
    const bool ok = consider(u, d);
    return try_candidates(u, d) || ok;
  };

  bool done = false;
  if (opts.warm_u) {
    const DualState d = pd.dual();
    done = check_now(pd.u(), d);
  }
  while (!done && it < opts.max_iters) {
    pd.step();
    ++it;
    if (it % every == 0 || it == opts.max_iters) {
      const DualState d = pd.dual();
      done = check_now(pd.u(), d);
    }
  }
  if (!done) try_candidates_anywhere();
  SolveResult res = finish(pr1, best_u);
  res.iterations = it;
  res.violation = best.violation;
  res.converged = best.violation <= tol;
  res.dual = best_dual;
  res.weight = s;
  if (!res.converged) res.note = "primal-dual iteration stopped before reaching the optimality tolerance";
  // full-accuracy certificate for TV2D
  if (pr1.reg().kind() == Regularizer::Kind::TV2D) {
    const OptimalityReport rep = check_impl(pr1, s, best_u, tol, &best_dual, CheckOptions{opts.zero_residual_tol, 2000}, false);
    res.violation = std::min(res.violation, rep.violation);
    res.converged = res.violation <= tol;
  }
  return res;
}

inline OptimalityReport check_impl(const Problem& pr, double t, const Vec& u, double tol, const DualState* hint,
                                   const CheckOptions& opts, bool allow_reference_solve) {
  OptimalityReport rep;
  if (t < 0.0) throw InputError("regularization weight must be non-negative");
  const Vec au = pr.op().apply(u);
  const double r = (pr.f() - au).norm();
  const double j = pr.reg().evaluate(u);
  const double fn = pr.f().norm();

  if (t == 0.0) {
    rep.violation = pr.op().apply_adjoint(au - pr.f()).norm() / (1.0 + fn);
    return rep;
  }
  if (pr.beta() == 2 && j == 0.0) {
    rep.degenerate = true;
    if (r == 0.0) {
      rep.violation = 0.0;
      rep.reason = "zero energy: u is in the null space of J and fits the data";
    } else {
      rep.reason = "J(u) = 0 with beta = 2 forces Au = f at a minimizer";
    }
    return rep;
  }
  const double c = t * (pr.beta() == 2 ? j : 1.0);

  const bool near_fit = r <= opts.zero_residual_tol * (1.0 + fn);
  if (r == 0.0 && pr.alpha() > 1.0) {
    rep.degenerate = true;
    rep.reason = "Au = f cannot be a minimizer for alpha > 1";
    return rep;
  }
  if (r > 0.0) rep = detail::residual_branch(pr, c, u, au, r, j, tol, hint, opts.max_inner);
  if (pr.alpha() == 1.0 && near_fit) {
    const Vec* q = hint && hint->data.size() == au.size() ? &hint->data : nullptr;
    SolveResult ref;
    if (!q && allow_reference_solve) {
      SolveOptions so;
      so.warm_u = u;
      so.gap_tol = tol;
      so.polish = false;
      ref = solve_weighted(pr.with_model(1.0, 1), c, so);
      if (ref.dual.data.size() == au.size()) q = &ref.dual.data;
      hint = &ref.dual;
    }
    if (q) {
      OptimalityReport ex = detail::exact_branch(pr, c, u, r, j, tol, *q, hint, opts.max_inner);
      if (ex.violation < rep.violation) rep = ex;
    } else if (r == 0.0) {
      rep.reason = "exact data fit without a dual certificate";
    }
  }
  return rep;
}

}  // namespace detail

// Violation of the first-order optimality condition at u. When alpha = 1 and the
// data are fitted exactly, the certificate is a data-space dual vector q; without
// a hint one is obtained from a reference solve warm-started at u.
inline OptimalityReport check_optimality(const Problem& pr, double t, const Vec& u, double tol,
                                         const DualState* hint = nullptr, const CheckOptions& opts = {}) {
  if (u.size() != pr.reg().size()) throw InputError("candidate has the wrong size");
  return detail::check_impl(pr, t, u, tol, hint, opts, true);
}

inline OptimalityReport check_optimality(const Problem& pr, double t, const Signal& u, double tol) {
  pr.reg().check_domain(u);
  return check_optimality(pr, t, u.values(), tol);
}

// beta = 2 is reduced to beta = 1 with weight s = t J(u_s); the scalar equation
// s - t J(u_s) = 0 (increasing in s) is solved by regula falsi with the Illinois
// modification, each evaluation being a warm-started beta = 1 solve.
inline SolveResult solve(const Problem& pr, double t, const SolveOptions& opts = {}) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("regularization weight must be finite and >= 0");
  const Problem pr1 = pr.beta() == 1 ? pr : pr.with_model(pr.alpha(), 1);
  if (pr.beta() == 1) return detail::solve_weighted(pr1, t, opts);

  const double tol = opts.tolerance(pr);
  SolveOptions inner = opts;
  inner.gap_tol = 0.1 * tol;
  SolveResult lo_res = detail::solve_weighted(pr1, 0.0, opts);
  if (t == 0.0) return lo_res;
  const double j0 = lo_res.reg_value;
  if (j0 == 0.0) {
    lo_res.note = "least-squares solution lies in the null space";
    return lo_res;
  }
  int total = lo_res.iterations;
  double lo = 0.0, hlo = -t * j0;
  double hi = t * j0;
  SolveResult hi_res = detail::solve_weighted(pr1, hi, inner);
  total += hi_res.iterations;
  double hhi = hi - t * hi_res.reg_value;
  SolveResult cur = hi_res;
  double hcur = hhi;
  int side = 0;
  for (int k = 0; k < 100 && std::abs(hcur) > 1e-13 * (1.0 + hi); ++k) {
    double s = (lo * hhi - hi * hlo) / (hhi - hlo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    inner.warm_u = cur.u.values();
    inner.warm_dual = cur.dual;
    SolveResult r = detail::solve_weighted(pr1, s, inner);
    total += r.iterations;
    const double h = s - t * r.reg_value;
    cur = r;
    hcur = h;
    if (h > 0.0) {
      hi = s;
      hhi = h;
      if (side == 1) hlo *= 0.5;
      side = 1;
    } else {
      lo = s;
      hlo = h;
      if (side == -1) hhi *= 0.5;
      side = -1;
    }
    if (hi - lo <= 1e-15 * hi) break;
    const OptimalityReport rep = check_optimality(pr, t, cur.u.values(), tol, &cur.dual);
    if (rep.violation <= tol) break;
  }
  const OptimalityReport rep = check_optimality(pr, t, cur.u.values(), tol, &cur.dual);
  cur.iterations = total;
  cur.violation = rep.violation;
  cur.converged = rep.violation <= tol;
  if (!cur.converged) cur.note = "outer weight iteration did not reach the optimality tolerance";
  return cur;
}

inline SolveResult solve(const Operator& A, const Regularizer& J, const Signal& f, double alpha, int beta,
                         double t, const SolveOptions& opts = {}) {
  return solve(Problem(A, J, f, alpha, beta), t, opts);
}

}  // namespace spectralpath
