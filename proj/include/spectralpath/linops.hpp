#pragma once

#include "core.hpp"

#include <algorithm>
#include <variant>

namespace spectralpath {

// Largest singular value of a linear map given only x -> M^T M x.
template <class NormalApply>
double power_iteration_norm(NormalApply&& normal, Eigen::Index n, double tol = 1e-10,
                            int max_iters = 10000) {
  if (n == 0) return 0.0;
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 1e-3 * static_cast<double>((i * 7919) % 97) / 97.0;
  x.normalize();
  Vec y(n);
  double est = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    normal(x, y);
    const double rq = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 0 && std::abs(rq - est) <= tol * std::max(rq, 1e-300)) {
      est = rq;
      break;
    }
    est = rq;
  }
  return std::sqrt(std::max(est, 0.0));
}

// identity | dense matrix | zero-padded "full" 1-D convolution (output n+k-1)
class Operator {
 public:
  enum class Kind { Identity, Dense, Convolution };

  static Operator identity(Shape shape) {
    Operator op;
    op.kind_ = Kind::Identity;
    op.in_ = op.out_ = shape;
    return op;
  }

  static Operator dense(Mat m) {
    if (m.rows() == 0 || m.cols() == 0) throw InputError("dense operator needs a non-empty matrix");
    if (!m.allFinite()) throw InputError("dense operator has non-finite entries");
    Operator op;
    op.kind_ = Kind::Dense;
    op.in_ = Shape::vector(m.cols());
    op.out_ = Shape::vector(m.rows());
    op.matrix_ = std::move(m);
    return op;
  }

  static Operator convolution(Vec taps, std::size_t n) {
    if (taps.size() == 0) throw InputError("convolution kernel is empty");
    if (n == 0) throw InputError("convolution input length must be positive");
    if (!taps.allFinite()) throw InputError("convolution kernel has non-finite taps");
    Operator op;
    op.kind_ = Kind::Convolution;
    op.in_ = Shape::vector(n);
    op.out_ = Shape::vector(n + taps.size() - 1);
    op.taps_ = std::move(taps);
    return op;
  }

  Kind kind() const { return kind_; }
  bool is_identity() const { return kind_ == Kind::Identity; }
  const Shape& input_shape() const { return in_; }
  const Shape& output_shape() const { return out_; }
  const Mat& matrix() const { return matrix_; }
  const Vec& taps() const { return taps_; }

  void apply(const Vec& u, Vec& out) const {
    switch (kind_) {
      case Kind::Identity: out = u; break;
      case Kind::Dense: out.noalias() = matrix_ * u; break;
      case Kind::Convolution: {
        const Eigen::Index n = u.size(), k = taps_.size();
        out.setZero(n + k - 1);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double ui = u[i];
          if (ui == 0.0) continue;
          out.segment(i, k) += ui * taps_;
        }
        break;
      }
    }
  }

  void apply_adjoint(const Vec& w, Vec& out) const {
    switch (kind_) {
      case Kind::Identity: out = w; break;
      case Kind::Dense: out.noalias() = matrix_.transpose() * w; break;
      case Kind::Convolution: {
        const Eigen::Index k = taps_.size(), n = w.size() - k + 1;
        out.resize(n);
        for (Eigen::Index m = 0; m < n; ++m) out[m] = taps_.dot(w.segment(m, k));
        break;
      }
    }
  }

  Vec apply(const Vec& u) const {
    Vec out;
    apply(u, out);
    return out;
  }
  Vec apply_adjoint(const Vec& w) const {
    Vec out;
    apply_adjoint(w, out);
    return out;
  }

  Signal apply(const Signal& u) const {
    if (u.shape() != in_)
      throw InputError("operator expects input shape " + in_.str() + ", got " + u.shape().str());
    return Signal(out_, apply(u.values()));
  }
  Signal apply_adjoint(const Signal& w) const {
    if (w.shape() != out_)
      throw InputError("adjoint expects input shape " + out_.str() + ", got " + w.shape().str());
    return Signal(in_, apply_adjoint(w.values()));
  }

  Mat materialize() const {
    const Eigen::Index n = static_cast<Eigen::Index>(in_.size());
    Mat m(static_cast<Eigen::Index>(out_.size()), n);
    Vec e = Vec::Zero(n), col;
    for (Eigen::Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      apply(e, col);
      m.col(j) = col;
      e[j] = 0.0;
    }
    return m;
  }

 private:
  Operator() = default;
  Kind kind_ = Kind::Identity;
  Shape in_, out_;
  Mat matrix_;
  Vec taps_;
};

inline double operator_norm(const Operator& op, double tol = 1e-12) {
  if (op.is_identity()) return op.input_shape().size() > 0 ? 1.0 : 0.0;
  Vec tmp;
  return power_iteration_norm(
      [&](const Vec& x, Vec& y) {
        op.apply(x, tmp);
        op.apply_adjoint(tmp, y);
      },
      static_cast<Eigen::Index>(op.input_shape().size()), tol);
}

}  // namespace spectralpath
