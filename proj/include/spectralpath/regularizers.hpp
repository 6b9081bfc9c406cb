#pragma once

#include "core.hpp"
#include "taut_string.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

namespace spectralpath {

struct MembershipReport {
  bool inside = false;
  double distance = 0.0;          // Euclidean distance to the dual ball (an upper bound for TV2D)
  std::optional<double> gauge;    // Minkowski functional of the dual ball, where cheap
  Vec dual;                       // gradient-space witness for TV kinds
};

struct DualSolveResult {
  Vec q;          // feasible, |q|_inf <= 1
  Vec residual;   // D^T q - y
  int iterations = 0;
  double gap = 0.0;
};

// Absolutely one-homogeneous functional J(u) = sup_{q in C} <q, D u>.
// D is the identity for L1, Linf and the quadratic-form norm and forward
// differences for the TV kinds, where C is the unit sup-norm box.
class Regularizer {
 public:
  enum class Kind { L1, Linf, TV1D, TV2D, QuadraticForm };

  static Regularizer l1(Shape s) { return Regularizer(Kind::L1, s); }
  static Regularizer l1(std::size_t n) { return l1(Shape::vector(n)); }
  static Regularizer linf(Shape s) { return Regularizer(Kind::Linf, s); }
  static Regularizer linf(std::size_t n) { return linf(Shape::vector(n)); }
  static Regularizer tv1d(std::size_t n) {
    if (n < 2) throw InputError("TV1D needs at least two samples");
    return Regularizer(Kind::TV1D, Shape::vector(n));
  }
  static Regularizer tv2d(std::size_t rows, std::size_t cols) {
    if (rows < 2 || cols < 2) throw InputError("TV2D needs at least a 2x2 grid");
    return Regularizer(Kind::TV2D, Shape::grid(rows, cols));
  }
  static Regularizer quadratic(Mat m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InputError("quadratic form needs a square matrix");
    if (!m.allFinite()) throw InputError("quadratic form has non-finite entries");
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
      throw InputError("quadratic form matrix is not symmetric");
    Regularizer r(Kind::QuadraticForm, Shape::vector(m.rows()));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      throw InputError("quadratic form matrix is not positive definite");
    r.metric_ = std::move(m);
    r.eigvals_ = es.eigenvalues();
    r.eigvecs_ = es.eigenvectors();
    return r;
  }
  static Regularizer quadratic_diagonal(const Vec& d) { return quadratic(d.asDiagonal().toDenseMatrix()); }

  Kind kind() const { return kind_; }
  const Shape& domain() const { return shape_; }
  bool is_tv() const { return kind_ == Kind::TV1D || kind_ == Kind::TV2D; }
  const Mat& metric() const { return metric_; }
  const Vec& metric_eigenvalues() const { return eigvals_; }
  const Mat& metric_eigenvectors() const { return eigvecs_; }

  std::string name() const {
    switch (kind_) {
      case Kind::L1: return "l1";
      case Kind::Linf: return "linf";
      case Kind::TV1D: return "tv1d";
      case Kind::TV2D: return "tv2d";
      case Kind::QuadraticForm: return "ellipse";
    }
    return "?";
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(shape_.size()); }

  Eigen::Index dual_size() const {
    switch (kind_) {
      case Kind::TV1D: return size() - 1;
      case Kind::TV2D: {
        const auto r = static_cast<Eigen::Index>(shape_.rows), c = static_cast<Eigen::Index>(shape_.cols);
        return r * (c - 1) + (r - 1) * c;
      }
      default: return size();
    }
  }

  // Upper bound on ||D||^2.
  double diff_norm_sq() const {
    switch (kind_) {
      case Kind::TV1D: return 4.0;
      case Kind::TV2D: return 8.0;
      default: return 1.0;
    }
  }

  void forward(const Vec& u, Vec& q) const {
    if (kind_ == Kind::TV1D) {
      const Eigen::Index n = u.size();
      q = u.tail(n - 1) - u.head(n - 1);
    } else if (kind_ == Kind::TV2D) {
      const auto R = static_cast<Eigen::Index>(shape_.rows), C = static_cast<Eigen::Index>(shape_.cols);
      q.resize(dual_size());
      Eigen::Index h = 0;
      for (Eigen::Index r = 0; r < R; ++r)
        for (Eigen::Index c = 0; c + 1 < C; ++c) q[h++] = u[r * C + c + 1] - u[r * C + c];
      for (Eigen::Index r = 0; r + 1 < R; ++r)
        for (Eigen::Index c = 0; c < C; ++c) q[h++] = u[(r + 1) * C + c] - u[r * C + c];
    } else {
      q = u;
    }
  }

  void adjoint(const Vec& q, Vec& out) const {
    if (kind_ == Kind::TV1D) {
      const Eigen::Index m = q.size();
      out.resize(m + 1);
      out[0] = -q[0];
      for (Eigen::Index i = 1; i < m; ++i) out[i] = q[i - 1] - q[i];
      out[m] = q[m - 1];
    } else if (kind_ == Kind::TV2D) {
      const auto R = static_cast<Eigen::Index>(shape_.rows), C = static_cast<Eigen::Index>(shape_.cols);
      out.setZero(R * C);
      Eigen::Index h = 0;
      for (Eigen::Index r = 0; r < R; ++r)
        for (Eigen::Index c = 0; c + 1 < C; ++c, ++h) {
          out[r * C + c + 1] += q[h];
          out[r * C + c] -= q[h];
        }
      for (Eigen::Index r = 0; r + 1 < R; ++r)
        for (Eigen::Index c = 0; c < C; ++c, ++h) {
          out[(r + 1) * C + c] += q[h];
          out[r * C + c] -= q[h];
        }
    } else {
      out = q;
    }
  }

  Vec forward(const Vec& u) const {
    Vec q;
    forward(u, q);
    return q;
  }
  Vec adjoint(const Vec& q) const {
    Vec out;
    adjoint(q, out);
    return out;
  }

  double evaluate(const Vec& u) const {
    switch (kind_) {
      case Kind::L1: return u.lpNorm<1>();
      case Kind::Linf: return u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0;
      case Kind::TV1D:
      case Kind::TV2D: return forward(u).lpNorm<1>();
      case Kind::QuadraticForm: return std::sqrt(std::max(u.dot(metric_ * u), 0.0));
    }
    return 0.0;
  }
  double evaluate(const Signal& u) const {
    check_domain(u);
    return evaluate(u.values());
  }

  // Projection onto C in the space where D lands (the clamp for TV kinds).
  Vec project_dual_ball(const Vec& q) const {
    switch (kind_) {
      case Kind::L1:
      case Kind::TV1D:
      case Kind::TV2D: return q.cwiseMax(-1.0).cwiseMin(1.0);
      case Kind::Linf: return project_l1_ball(q);
      case Kind::QuadraticForm: return project_ellipsoid(q);
    }
    return q;
  }

  // Projection onto K = D^T C in signal space.
  Vec project_K(const Vec& y) const {
    if (!is_tv()) return project_dual_ball(y);
    return y - prox(y, 1.0);
  }
  Signal project_K(const Signal& y) const {
    check_domain(y);
    return like(y, project_K(y.values()));
  }

  Vec prox(const Vec& x, double s) const {
    if (s < 0.0) throw InputError("prox step must be non-negative");
    if (s == 0.0) return x;
    switch (kind_) {
      case Kind::TV1D: return taut_string(x, s);
      case Kind::TV2D: {
        const DualSolveResult d = dual_solve(x / s, 2000, 1e-8);
        return -s * d.residual;
      }
      default: return x - s * project_dual_ball(x / s);
    }
  }
  Signal prox(const Signal& x, double s) const {
    check_domain(x);
    return like(x, prox(x.values(), s));
  }

  // min_{|q|_inf <= 1} 0.5 ||D^T q - y||^2 by projected gradient with momentum and
  // adaptive restart. Stops when the duality gap J(w) - <D^T q, w> with
  // w = y - D^T q drops below gap_tol (1 + J(w)), or when the residual falls
  // below stop_distance.
  DualSolveResult dual_solve(const Vec& y, int max_iters, double gap_tol,
                             const Vec* warm = nullptr, double stop_distance = -1.0) const {
    const Eigen::Index m = dual_size();
    DualSolveResult res;
    Vec q = warm && warm->size() == m ? project_dual_ball(*warm) : Vec::Zero(m);
    Vec z = q, q_new(m), grad(m), r, w;
    const double inv_l = 1.0 / diff_norm_sq();
    double theta = 1.0;
    auto converged = [&](const Vec& qq) {
      adjoint(qq, r);
      r -= y;
      const double dist = r.norm();
      w = -r;
      const double jw = evaluate(w);
      res.gap = jw - forward(w).dot(qq);
      return dist <= stop_distance || res.gap <= gap_tol * (1.0 + jw);
    };
    int it = 0;
    if (!converged(q)) {
      for (it = 1; it <= max_iters; ++it) {
        adjoint(z, r);
        r -= y;
        forward(r, grad);
        q_new = (z - inv_l * grad).cwiseMax(-1.0).cwiseMin(1.0);
        if ((z - q_new).dot(q_new - q) > 0.0) {
          theta = 1.0;
          z = q_new;
        } else {
          const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
          z = q_new + ((theta - 1.0) / theta_next) * (q_new - q);
          theta = theta_next;
        }
        q.swap(q_new);
        if (it % 10 == 0 && converged(q)) break;
      }
      if (it > max_iters) converged(q);
    }
    adjoint(q, r);
    res.residual = r - y;
    res.q = std::move(q);
    res.iterations = std::min(it, max_iters);
    return res;
  }

  // Minkowski functional of K at p, i.e. the dual norm of J. Not available for TV2D.
  std::optional<double> gauge(const Vec& p) const {
    switch (kind_) {
      case Kind::L1: return p.size() ? p.lpNorm<Eigen::Infinity>() : 0.0;
      case Kind::Linf: return p.lpNorm<1>();
      case Kind::QuadraticForm: {
        const Vec c = eigvecs_.transpose() * p;
        return std::sqrt((c.array().square() / eigvals_.array()).sum());
      }
      case Kind::TV1D: {
        const double total = p.sum();
        if (std::abs(total) > 1e-12 * (1.0 + p.lpNorm<1>())) return std::numeric_limits<double>::infinity();
        double run = 0.0, best = 0.0;
        for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
          run += p[i];
          best = std::max(best, std::abs(run));
        }
        return best;
      }
      case Kind::TV2D: return std::nullopt;
    }
    return std::nullopt;
  }

  MembershipReport dual_ball_membership(const Vec& p, double tol, const Vec* hint = nullptr,
                                        int max_inner = 2000) const {
    MembershipReport rep;
    switch (kind_) {
      case Kind::TV1D:
        rep.distance = taut_string(p, 1.0).norm();
        break;
      case Kind::TV2D: {
        const DualSolveResult d = dual_solve(p, max_inner, 1e-10, hint, 0.5 * tol);
        rep.distance = d.residual.norm();
        rep.dual = d.q;
        break;
      }
      default:
        rep.distance = (p - project_dual_ball(p)).norm();
        break;
    }
    rep.gauge = gauge(p);
    rep.inside = rep.distance <= tol;
    return rep;
  }
  MembershipReport dual_ball_membership(const Signal& p, double tol) const {
    check_domain(p);
    return dual_ball_membership(p.values(), tol);
  }

  std::vector<Signal> nullspace_basis() const {
    std::vector<Signal> basis;
    if (is_tv()) {
      const double v = 1.0 / std::sqrt(static_cast<double>(size()));
      basis.emplace_back(shape_, Vec::Constant(size(), v));
    }
    return basis;
  }

  void check_domain(const Signal& s) const {
    if (s.shape() != shape_)
      throw InputError(name() + " regularizer expects shape " + shape_.str() + ", got " + s.shape().str());
  }

 private:
  Regularizer(Kind k, Shape s) : kind_(k), shape_(s) {
    if (s.size() == 0) throw InputError("regularizer domain is empty");
  }

  static Vec project_l1_ball(const Vec& q) {
    if (q.lpNorm<1>() <= 1.0) return q;
    std::vector<double> a(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) a[i] = std::abs(q[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      cum += a[j];
      const double cand = (cum - 1.0) / static_cast<double>(j + 1);
      if (a[j] - cand > 0.0) theta = cand;
    }
    Vec out(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i)
      out[i] = std::copysign(positive_part(std::abs(q[i]) - theta), q[i]);
    return out;
  }

  // Nearest point of {p : p^T M^{-1} p <= 1}; p = M (M + mu I)^{-1} q in the eigenbasis.
  Vec project_ellipsoid(const Vec& q) const {
    const Vec c = eigvecs_.transpose() * q;
    const Eigen::ArrayXd lam = eigvals_.array(), c2 = c.array().square();
    auto phi = [&](double mu) { return (lam * c2 / (lam + mu).square()).sum() - 1.0; };
    if (phi(0.0) <= 0.0) return q;
    double lo = 0.0, hi = std::sqrt((lam * c2).sum());
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double f = phi(mu);
      if (f > 0.0) lo = mu; else hi = mu;
      if (std::abs(f) <= 1e-14 || hi - lo <= 1e-15 * std::max(1.0, hi)) break;
      const double df = (-2.0 * lam * c2 / (lam + mu).cube()).sum();
      double next = mu - f / df;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      mu = next;
    }
    const Vec pc = (lam / (lam + mu) * c.array()).matrix();
    return eigvecs_ * pc;
  }

  Kind kind_;
  Shape shape_;
  Mat metric_;
  Vec eigvals_;
  Mat eigvecs_;
};

}  // namespace spectralpath
