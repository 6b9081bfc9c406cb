#include "oracles.hpp"
#include "spectralpath/linops.hpp"

#include <gtest/gtest.h>

namespace sp = spectralpath;
using sp::Mat;
using sp::Vec;

namespace {

Mat example_matrix() {
  Mat a(2, 2);
  a << 2, 1, 1, 1;
  return a;
}

std::vector<sp::Operator> sample_operators() {
  std::mt19937 g(3);
  Mat dense(7, 5);
  for (Eigen::Index i = 0; i < dense.size(); ++i) dense.data()[i] = std::normal_distribution<double>()(g);
  return {sp::Operator::identity(sp::Shape::vector(6)), sp::Operator::identity(sp::Shape::grid(3, 4)),
          sp::Operator::dense(dense), sp::Operator::convolution(oracle::random_vec(g, 4), 11)};
}

}  // namespace

TEST(Linops, ApplyExamples) {
  const auto id = sp::Operator::identity(sp::Shape::vector(2));
  EXPECT_EQ(id.apply(Vec(Vec::Map(std::vector<double>{1, 2}.data(), 2))), Vec(Eigen::Vector2d(1, 2)));

  const auto a = sp::Operator::dense(example_matrix());
  EXPECT_TRUE(a.apply(Vec(Eigen::Vector2d(1, -4))).isApprox(Vec(Eigen::Vector2d(-2, -3)), 1e-15));

  const auto c = sp::Operator::convolution(Vec(Eigen::Vector2d(1, 1)), 3);
  Vec u(3);
  u << 1, 0, 0;
  Vec want(4);
  want << 1, 1, 0, 0;
  EXPECT_EQ(c.apply(u), want);
  EXPECT_EQ(c.output_shape().size(), 4u);
}

TEST(Linops, AdjointExamples) {
  const auto id = sp::Operator::identity(sp::Shape::vector(2));
  EXPECT_EQ(id.apply_adjoint(Vec(Eigen::Vector2d(3, -1))), Vec(Eigen::Vector2d(3, -1)));

  const auto a = sp::Operator::dense(example_matrix());
  EXPECT_EQ(a.apply_adjoint(Vec(Eigen::Vector2d(1, 0))), Vec(Eigen::Vector2d(2, 1)));

  const auto c = sp::Operator::convolution(Vec(Eigen::Vector2d(1, 1)), 3);
  Vec w(4);
  w << 1, 1, 0, 0;
  EXPECT_EQ(c.apply_adjoint(w), Vec(Eigen::Vector3d(2, 1, 0)));
}

TEST(Linops, ConvolutionMatchesExplicitMatrix) {
  std::mt19937 g(11);
  const Vec taps = oracle::random_vec(g, 5);
  const auto c = sp::Operator::convolution(taps, 9);
  const Mat ref = oracle::convolution_matrix(taps, 9);
  EXPECT_LE((c.materialize() - ref).cwiseAbs().maxCoeff(), 1e-15);
  const Vec u = oracle::random_vec(g, 9);
  EXPECT_LE((c.apply(u) - ref * u).norm(), 1e-13);
}

TEST(Linops, AdjointIdentityOnRandomPairs) {
  std::mt19937 g(5);
  for (const auto& op : sample_operators()) {
    const auto n = static_cast<Eigen::Index>(op.input_shape().size());
    const auto m = static_cast<Eigen::Index>(op.output_shape().size());
    for (int k = 0; k < 100; ++k) {
      const Vec u = oracle::random_vec(g, n), w = oracle::random_vec(g, m);
      EXPECT_LE(std::abs(op.apply(u).dot(w) - u.dot(op.apply_adjoint(w))), 1e-12 * (1 + u.norm() * w.norm()));
    }
  }
}

TEST(Linops, Linearity) {
  std::mt19937 g(6);
  for (const auto& op : sample_operators()) {
    const auto n = static_cast<Eigen::Index>(op.input_shape().size());
    const Vec u = oracle::random_vec(g, n), v = oracle::random_vec(g, n);
    const double a = 0.7, b = -2.5;
    EXPECT_LE((op.apply(a * u + b * v) - (a * op.apply(u) + b * op.apply(v))).norm(), 1e-12 * (1 + u.norm() + v.norm()));
  }
}

TEST(Linops, NormExamples) {
  EXPECT_NEAR(sp::operator_norm(sp::Operator::identity(sp::Shape::vector(5)), 1e-10), 1.0, 1e-12);
  EXPECT_NEAR(sp::operator_norm(sp::Operator::dense(Eigen::Vector2d(3, 1).asDiagonal().toDenseMatrix()), 1e-12), 3.0,
              1e-9);
  EXPECT_NEAR(sp::operator_norm(sp::Operator::dense(example_matrix()), 1e-12), (3 + std::sqrt(5.0)) / 2, 1e-9);
  EXPECT_EQ(sp::operator_norm(sp::Operator::dense(Mat::Zero(3, 2)), 1e-10), 0.0);
}

TEST(Linops, NormBoundsEveryProbe) {
  std::mt19937 g(8);
  for (const auto& op : sample_operators()) {
    const double nrm = sp::operator_norm(op, 1e-10);
    const Mat dense = op.materialize();
    EXPECT_NEAR(nrm, Eigen::JacobiSVD<Mat>(dense).singularValues()(0), 1e-8 * nrm);
    for (int k = 0; k < 20; ++k) {
      const Vec u = oracle::random_vec(g, dense.cols());
      EXPECT_GE(nrm * (1 + 1e-9), op.apply(u).norm() / u.norm());
    }
  }
}

TEST(Linops, ShapeMismatchIsInputError) {
  const auto a = sp::Operator::dense(example_matrix());
  EXPECT_THROW(a.apply(sp::Signal(Vec::Ones(3))), sp::InputError);
  EXPECT_THROW(a.apply_adjoint(sp::Signal(Vec::Ones(1))), sp::InputError);
  const auto id = sp::Operator::identity(sp::Shape::grid(2, 2));
  EXPECT_THROW(id.apply(sp::Signal(Vec::Ones(4))), sp::InputError);
}

TEST(Signal, RejectsNonFiniteAndMismatchedShapes) {
  Vec v = Vec::Ones(3);
  v[1] = std::nan("");
  EXPECT_THROW(sp::Signal{v}, sp::InputError);
  EXPECT_THROW(sp::Signal::image(2, 2, Vec::Ones(3)), sp::InputError);
  const auto s = sp::Signal::image(2, 3, Vec::LinSpaced(6, 0, 5));
  EXPECT_EQ(s.at(1, 2), 5.0);
  EXPECT_EQ(s.shape().dims, 2);
}
