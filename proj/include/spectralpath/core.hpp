#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace spectralpath {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad user input: shapes, non-finite values, out-of-range parameters.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent setup discovered while building something (singular Gram matrix, ...).
struct ConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t where)
      : std::runtime_error(what), position(where) {}
  std::size_t position;
};

struct Shape {
  int dims = 1;
  std::size_t rows = 0;
  std::size_t cols = 1;

  static Shape vector(std::size_t n) { return {1, n, 1}; }
  static Shape grid(std::size_t r, std::size_t c) { return {2, r, c}; }

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape& o) const { return dims == o.dims && rows == o.rows && cols == o.cols; }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    return dims == 1 ? "[" + std::to_string(rows) + "]"
                     : "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

// A 1-D signal or a row-major 2-D image. Values are finite by construction.
class Signal {
 public:
  Signal() = default;
  Signal(Shape shape, Vec values) : shape_(shape), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != shape_.size())
      throw InputError("signal size " + std::to_string(values_.size()) + " does not match shape " +
                       shape_.str());
    if (!values_.allFinite()) throw InputError("signal contains non-finite values");
  }
  explicit Signal(Vec values)
      : shape_(Shape::vector(static_cast<std::size_t>(values.size()))), values_(std::move(values)) {
    if (!values_.allFinite()) throw InputError("signal contains non-finite values");
  }
  static Signal zeros(Shape shape) { return Signal(shape, Vec::Zero(shape.size())); }
  static Signal image(std::size_t rows, std::size_t cols, Vec values) {
    return Signal(Shape::grid(rows, cols), std::move(values));
  }

  const Shape& shape() const { return shape_; }
  const Vec& values() const { return values_; }
  std::size_t size() const { return shape_.size(); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double at(std::size_t r, std::size_t c) const {
    return values_[static_cast<Eigen::Index>(r * shape_.cols + c)];
  }
  double norm() const { return values_.norm(); }

 private:
  Shape shape_;
  Vec values_;
};

inline Signal like(const Signal& s, Vec values) { return Signal(s.shape(), std::move(values)); }

inline double dot(const Signal& a, const Signal& b) { return a.values().dot(b.values()); }

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace spectralpath
