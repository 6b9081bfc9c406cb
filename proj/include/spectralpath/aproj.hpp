#pragma once

#include "linops.hpp"

#include <vector>

namespace spectralpath {

// Projection onto span(basis) in the metric induced by the operator:
// P f = argmin_{v in span} ||A v - f||.
class AProjection {
 public:
  AProjection() = default;

  AProjection(const Operator& op, const std::vector<Signal>& basis)
      : in_(op.input_shape()), out_(op.output_shape()) {
    const auto k = static_cast<Eigen::Index>(basis.size());
    if (k == 0) return;
    const auto n = static_cast<Eigen::Index>(in_.size());
    basis_.resize(n, k);
    images_.resize(static_cast<Eigen::Index>(out_.size()), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Signal& b = basis[static_cast<std::size_t>(j)];
      if (b.shape() != in_) throw InputError("basis vector shape does not match operator input");
      basis_.col(j) = b.values();
      images_.col(j) = op.apply(b.values());
    }
    const Mat gram = images_.transpose() * images_;
    llt_.compute(gram);
    const Vec diag = llt_.matrixLLT().diagonal();
    if (llt_.info() != Eigen::Success || diag.minCoeff() <= 1e-10 * std::max(1.0, diag.maxCoeff()))
      throw ConfigurationError("Gram matrix of the operator images of the null-space basis is singular");
  }

  std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }

  Vec coefficients(const Vec& f) const {
    if (basis_.cols() == 0) return Vec();
    return llt_.solve(images_.transpose() * f);
  }

  Vec project(const Vec& f) const {
    if (basis_.cols() == 0) return Vec::Zero(static_cast<Eigen::Index>(in_.size()));
    return basis_ * coefficients(f);
  }

  // A P f
  Vec project_forward(const Vec& f) const {
    if (basis_.cols() == 0) return Vec::Zero(static_cast<Eigen::Index>(out_.size()));
    return images_ * coefficients(f);
  }

  Signal project(const Signal& f) const {
    if (f.shape() != out_) throw InputError("projection expects data of shape " + out_.str());
    return Signal(in_, project(f.values()));
  }

 private:
  Shape in_, out_;
  Mat basis_, images_;
  Eigen::LLT<Mat> llt_;
};

}  // namespace spectralpath
