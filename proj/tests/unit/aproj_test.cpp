#include "oracles.hpp"
#include "spectralpath/aproj.hpp"
#include "spectralpath/regularizers.hpp"

#include <gtest/gtest.h>

namespace sp = spectralpath;
using sp::Mat;
using sp::Vec;

namespace {

struct Case {
  sp::Operator op;
  std::vector<sp::Signal> basis;
};

std::vector<Case> build_examples() {
  Mat a(2, 2);
  a << 2, 1, 1, 1;
  Vec taps(3);
  taps << 0.25, 0.5, 0.25;
  return {
      {sp::Operator::identity(sp::Shape::vector(5)), {}},
      {sp::Operator::identity(sp::Shape::vector(6)), sp::Regularizer::tv1d(6).nullspace_basis()},
      {sp::Operator::convolution(taps, 8), sp::Regularizer::tv1d(8).nullspace_basis()},
      {sp::Operator::dense(a), {sp::Signal(Vec(Eigen::Vector2d(1, 0)))}},
  };
}

}  // namespace

TEST(AProjection, Examples) {
  const sp::AProjection empty(sp::Operator::identity(sp::Shape::vector(3)), {});
  EXPECT_EQ(empty.rank(), 0u);
  EXPECT_EQ(empty.project(Vec(Eigen::Vector3d(1, 2, 3))), Vec::Zero(3));

  const sp::AProjection mean(sp::Operator::identity(sp::Shape::vector(3)), sp::Regularizer::tv1d(3).nullspace_basis());
  EXPECT_LE((mean.project(Vec(Eigen::Vector3d(1, 2, 3))) - Vec::Constant(3, 2.0)).norm(), 1e-14);

  Mat a(2, 2);
  a << 2, 1, 1, 1;
  const sp::AProjection p(sp::Operator::dense(a), {sp::Signal(Vec(Eigen::Vector2d(1, 0)))});
  EXPECT_LE((p.project(Vec(Eigen::Vector2d(-2, -3))) - Vec(Eigen::Vector2d(-1.4, 0))).norm(), 1e-14);
}

TEST(AProjection, ConvolutionCoefficientMatchesNormalEquation) {
  std::mt19937 g(1);
  const Vec taps = oracle::random_vec(g, 4).cwiseAbs();
  const auto op = sp::Operator::convolution(taps, 10);
  const sp::AProjection p(op, sp::Regularizer::tv1d(10).nullspace_basis());
  const Vec f = oracle::random_vec(g, 13);
  const Vec a1 = op.apply(Vec(Vec::Ones(10)));
  const double c = a1.dot(f) / a1.squaredNorm();
  EXPECT_LE((p.project(f) - c * Vec::Ones(10)).norm(), 1e-12);
}

TEST(AProjection, AlgebraicProperties) {
  std::mt19937 g(2);
  for (const auto& c : build_examples()) {
    const sp::AProjection P(c.op, c.basis);
    const auto m = static_cast<Eigen::Index>(c.op.output_shape().size());
    for (int k = 0; k < 20; ++k) {
      const Vec f = oracle::random_vec(g, m), h = oracle::random_vec(g, m);
      const Vec pf = P.project(f);
      EXPECT_LE((P.project(c.op.apply(pf)) - pf).norm(), 1e-10);
      for (const auto& b : c.basis) EXPECT_LE(std::abs((f - c.op.apply(pf)).dot(c.op.apply(b.values()))), 1e-10);
      EXPECT_LE((P.project(Vec(1.5 * f - 0.25 * h)) - (1.5 * pf - 0.25 * P.project(h))).norm(), 1e-10);
      EXPECT_LE(std::abs(f.dot(P.project_forward(h)) - P.project_forward(f).dot(h)), 1e-10);
    }
  }
}

TEST(AProjection, SingularGramIsConfigurationError) {
  Mat a(2, 2);
  a << 0, 1, 0, 1;
  EXPECT_THROW(sp::AProjection(sp::Operator::dense(a), {sp::Signal(Vec(Eigen::Vector2d(1, 0)))}),
               sp::ConfigurationError);
}

TEST(AProjection, ShapeErrors) {
  const sp::AProjection p(sp::Operator::identity(sp::Shape::vector(3)), {});
  EXPECT_THROW(p.project(sp::Signal(Vec::Ones(4))), sp::InputError);
  EXPECT_THROW(sp::AProjection(sp::Operator::identity(sp::Shape::vector(3)), {sp::Signal(Vec::Ones(2))}),
               sp::InputError);
}
