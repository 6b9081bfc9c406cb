#include "oracles.hpp"
#include "spectralpath/path.hpp"
#include "spectralpath/singular.hpp"

#include <gtest/gtest.h>

namespace sp = spectralpath;
using sp::Component;
using sp::Mat;
using sp::Operator;
using sp::Regularizer;
using sp::Signal;
using sp::Vec;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

Mat ellipse_metric() { return Eigen::Vector2d(1, 4).asDiagonal().toDenseMatrix(); }

Vec gaussian_taps(int size, double sigma) {
  Vec k(size);
  for (int i = 0; i < size; ++i) {
    const double x = i - (size - 1) / 2.0;
    k[i] = std::exp(-x * x / (2 * sigma * sigma));
  }
  return k / k.sum();
}

Vec unit(Eigen::Index n, Eigen::Index i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

sp::Decomposition linf_pair() {
  const auto id = Operator::identity(sp::Shape::vector(2));
  return sp::make_decomposition(id, Regularizer::linf(2),
                                {Component{v2(1, 1) / 2, 4.0, 1.0}, Component{v2(-1, 1) / 2, 2.0, 1.0}});
}

struct Peaks {
  Operator op;
  Regularizer reg;
  sp::Decomposition d;
};

Peaks peak_data(const std::vector<double>& heights, Eigen::Index n) {
  const Vec taps = gaussian_taps(9, 1.5);
  const auto op = Operator::convolution(taps, static_cast<std::size_t>(n));
  const auto reg = Regularizer::l1(static_cast<std::size_t>(n));
  const double lambda = sp::peak_singular_value(taps).lambda;
  std::vector<Component> comps;
  for (std::size_t k = 0; k < heights.size(); ++k)
    comps.push_back({unit(n, static_cast<Eigen::Index>(10 + 20 * k)), heights[k], lambda});
  return {op, reg, sp::make_decomposition(op, reg, comps)};
}

// centred square of side L on an N x N grid, with its mean removed
Vec square(std::size_t n, std::size_t side) {
  Vec u = Vec::Zero(static_cast<Eigen::Index>(n * n));
  const std::size_t lo = (n - side) / 2;
  for (std::size_t r = lo; r < lo + side; ++r)
    for (std::size_t c = lo; c < lo + side; ++c) u[static_cast<Eigen::Index>(r * n + c)] = 1.0;
  return u.array() - u.mean();
}

}  // namespace

TEST(SingularVectors, Examples) {
  EXPECT_TRUE(sp::verify_singular_vector(Operator::identity(sp::Shape::vector(3)), Regularizer::l1(3), unit(3, 0), 1.0).ok);
  const auto ell = sp::verify_singular_vector(Operator::identity(sp::Shape::vector(2)),
                                              Regularizer::quadratic(ellipse_metric()), v2(0, 1), 2.0);
  EXPECT_TRUE(ell.ok);
  EXPECT_LE((ell.subgradient - v2(0, 2)).norm(), 1e-15);
  EXPECT_FALSE(sp::verify_singular_vector(Operator::identity(sp::Shape::vector(2)),
                                          Regularizer::quadratic(ellipse_metric()), v2(0, 1), 1.0).ok);

  const Vec taps = gaussian_taps(9, 1.5);
  const auto peak = sp::peak_singular_value(taps);
  EXPECT_TRUE(peak.valid);
  EXPECT_NEAR(peak.lambda, 1.0 / taps.squaredNorm(), 1e-12);
  const auto op = Operator::convolution(taps, 30);
  EXPECT_TRUE(sp::verify_singular_vector(op, Regularizer::l1(30), unit(30, 12), peak.lambda).ok);
  EXPECT_FALSE(sp::verify_singular_vector(op, Regularizer::l1(30), unit(30, 12), 1.5 * peak.lambda).ok);
}

TEST(SingularVectors, PeakSingularValue) {
  const auto one = sp::peak_singular_value(Vec::Ones(1));
  EXPECT_EQ(one.lambda, 1.0);
  EXPECT_TRUE(one.valid);
  const auto two = sp::peak_singular_value(Vec::Ones(2));
  EXPECT_EQ(two.lambda, 0.5);
  EXPECT_EQ(two.worst_ratio, 0.5);
  EXPECT_TRUE(two.valid);
  // the desk-scale kernel used by the experiments
  EXPECT_NEAR(sp::peak_singular_value(gaussian_taps(9, 1.5)).lambda, 5.29357, 1e-5);
  EXPECT_THROW(sp::peak_singular_value(Vec::Zero(3)), sp::InputError);
}

TEST(Sub0, SingleComponentIsTheSingularVectorTest) {
  const auto id = Operator::identity(sp::Shape::vector(3));
  EXPECT_TRUE(sp::verify_sub0(id, Regularizer::l1(3), {Component{unit(3, 1), -2.0, 1.0}}).ok);
}

TEST(Sub0, SeparatedPeaksPass) {
  const auto p = peak_data({-0.1, 0.2, 0.25, -0.4, 0.5}, 110);
  EXPECT_TRUE(p.d.sub0.ok);
}

TEST(Sub0, EllipseFailsAtFirstIndex) {
  const auto id = Operator::identity(sp::Shape::vector(2));
  const auto J = Regularizer::quadratic(ellipse_metric());
  const std::vector<Component> comps = {Component{v2(1, 0), 1.0, 1.0}, Component{v2(0, 1), 4.0, 2.0}};
  const auto rep = sp::verify_sub0(id, J, comps);
  EXPECT_FALSE(rep.ok);
  ASSERT_TRUE(rep.failing_index);
  EXPECT_EQ(*rep.failing_index, 1u);
  ASSERT_TRUE(rep.gauge);
  EXPECT_NEAR(*rep.gauge * *rep.gauge, 2.0, 1e-12);
  const auto d = sp::make_decomposition(id, J, comps);
  EXPECT_FALSE(d.sub0.ok);
  EXPECT_THROW(sp::combination_path(d, 0.5), sp::ConfigurationError);
}

TEST(Combination, LinfClosedForm) {
  const auto d = linf_pair();
  EXPECT_TRUE(d.sub0.ok);
  EXPECT_LE((sp::combination_path(d, 0.0) - v2(1, 3)).norm(), 1e-15);
  EXPECT_LE((sp::combination_path(d, 1.0) - v2(1, 2)).norm(), 1e-15);
  EXPECT_LE((sp::combination_path(d, 3.0) - v2(0.5, 0.5)).norm(), 1e-15);
  EXPECT_EQ(sp::combination_path(d, 4.0), Vec::Zero(2));
  EXPECT_EQ(sp::combination_path(d, 7.0), Vec::Zero(2));
  for (int k = 0; k <= 50; ++k) {
    const double tau = 5.0 * k / 50.0;
    EXPECT_LE((sp::combination_path(d, tau) - oracle::prox_linf(v2(1, 3), tau)).norm(), 1e-9) << tau;
  }
  EXPECT_EQ(d.critical_taus(), (std::vector<double>{2.0, 4.0}));
}

TEST(Combination, ReparametrizationBranches) {
  // single eigenvector: tau stays 0 until t = 1 / ||p_1||, then jumps to the end
  const auto id = Operator::identity(sp::Shape::vector(3));
  const auto one = sp::make_decomposition(id, Regularizer::l1(3), {Component{unit(3, 0), 2.0, 1.0}});
  EXPECT_EQ(sp::combination_reparam_S(one, 0.9), 0.0);
  EXPECT_EQ(sp::combination_reparam_S(one, 1.1), 2.0);

  const auto d = linf_pair();
  const auto bp = sp::combination_breakpoints(d);
  ASSERT_EQ(bp.size(), 2u);
  // t_1 = tau_1 / R(tau_1)
  EXPECT_NEAR(bp[0], 2.0 / sp::combination_residual(d, 2.0), 1e-15);
  EXPECT_NEAR(sp::combination_reparam_S(d, bp[1]), 4.0, 1e-12);
  // second branch: invert T(tau) = tau / R(tau) by bisection on the closed-form residual
  for (int k = 1; k < 10; ++k) {
    const double t = bp[0] + (bp[1] - bp[0]) * k / 10.0;
    const double tau = oracle::bisect([&](double x) { return x / sp::combination_residual(d, x) - t; }, 2.0, 4.0);
    EXPECT_NEAR(sp::combination_reparam_S(d, t), tau, 1e-10) << t;
    // T(S(t)) = t
    const double s = sp::combination_reparam_S(d, t);
    const Vec v = sp::combination_path(d, s);
    EXPECT_NEAR(sp::reparam_T(sp::combination_residual(d, s), Regularizer::linf(2).evaluate(v), s, 1.0, 1).value, t,
                1e-8);
  }
  EXPECT_EQ(sp::combination_reparam_S(d, 10.0), 4.0);
}

TEST(Combination, EqualRatios) {
  const auto id = Operator::identity(sp::Shape::vector(3));
  const std::vector<Component> comps = {Component{unit(3, 0), 2.0, 1.0}, Component{unit(3, 2), -2.0, 1.0}};
  EXPECT_THROW(sp::make_decomposition(id, Regularizer::l1(3), comps), sp::InputError);
  const auto d = sp::make_decomposition(id, Regularizer::l1(3), comps, 1e-8, sp::EqualRatios::Merge);
  ASSERT_EQ(d.components.size(), 1u);
  EXPECT_LE((d.solution - Vec(Eigen::Vector3d(2, 0, -2))).norm(), 1e-15);
  EXPECT_TRUE(d.sub0.ok);
  EXPECT_LE((sp::combination_path(d, 1.0) - Vec(Eigen::Vector3d(1, 0, -1))).norm(), 1e-15);
}

TEST(Combination, Validation) {
  const auto id = Operator::identity(sp::Shape::vector(3));
  EXPECT_THROW(sp::make_decomposition(id, Regularizer::l1(3), {}), sp::InputError);
  EXPECT_THROW(sp::make_decomposition(id, Regularizer::l1(3), {Component{unit(3, 0), 0.0, 1.0}}), sp::InputError);
  // not a singular vector
  EXPECT_THROW(sp::make_decomposition(id, Regularizer::l1(3), {Component{Vec(Eigen::Vector3d(1, 0.5, 0)), 1.0, 1.0}}),
               sp::InputError);
  // not orthogonal
  EXPECT_THROW(sp::make_decomposition(id, Regularizer::linf(2),
                                      {Component{v2(1, 1) / 2, 4.0, 1.0}, Component{v2(1, 1) / 2, 2.0, 1.0}}),
               sp::InputError);
}

TEST(Combination, SolverMatchesClosedForm) {
  const auto p = peak_data({-0.1, 0.2, 0.25, -0.4, 0.5}, 110);
  const sp::Problem pr(p.op, p.reg, Signal(p.d.data), 2.0);
  const double end = 1.1 * p.d.critical_taus().back();
  const auto table = sp::sample_path(pr, sp::uniform_grid(end, 50));
  for (const auto& e : table.entries) {
    EXPECT_TRUE(e.converged);
    EXPECT_LE((e.u - sp::combination_path(p.d, e.t)).norm(), 1e-5 * (1 + p.d.solution.norm())) << e.t;
  }
  // mid-branch closed-form points satisfy the optimality condition
  for (double tau : {0.5 * p.d.critical_taus()[0], 0.5 * (p.d.critical_taus()[2] + p.d.critical_taus()[3])})
    EXPECT_LE(sp::check_optimality(pr, tau, sp::combination_path(p.d, tau), 1e-6).violation, 1e-6);
}

TEST(SingularPath, Coefficients) {
  EXPECT_NEAR(sp::singular_path_coefficient(2.0, 1, 1.0, 1.0, 0.25), 0.75, 1e-15);
  EXPECT_EQ(sp::singular_path_coefficient(1.0, 1, 1.0, 1.0, 1.0 - 1e-9), 1.0);
  EXPECT_EQ(sp::singular_path_coefficient(1.0, 1, 1.0, 1.0, 1.0 + 1e-9), 0.0);
  EXPECT_NEAR(sp::singular_path_coefficient(2.0, 2, 2.0, 1.0, 1.0), 0.2, 1e-15);
  // extinction at 1 / (lambda ||f||^(2 - alpha))
  for (double alpha : {1.5, 3.0}) {
    const double lambda = 1.7, fn = 0.6, ext = 1.0 / (lambda * std::pow(fn, 2.0 - alpha));
    EXPECT_GT(sp::singular_path_coefficient(alpha, 1, lambda, fn, 0.999 * ext), 0.0);
    EXPECT_EQ(sp::singular_path_coefficient(alpha, 1, lambda, fn, 1.001 * ext), 0.0);
  }
  EXPECT_THROW(sp::singular_path_coefficient(1.5, 2, 1.0, 1.0, 1.0), sp::NotSupported);
  EXPECT_THROW(sp::singular_path_coefficient(2.0, 1, 0.0, 1.0, 1.0), sp::InputError);
}

TEST(SingularPath, SolverFollowsClosedFormForEveryAlpha) {
  const Vec taps = gaussian_taps(9, 1.5);
  const double lambda = sp::peak_singular_value(taps).lambda;
  const auto op = Operator::convolution(taps, 25);
  const Vec u = 0.8 * unit(25, 12);
  const Vec f = op.apply(u);
  // the scaled peak is singular with value lambda / 0.8
  const double mu = lambda / 0.8;
  EXPECT_TRUE(sp::verify_singular_vector(op, Regularizer::l1(25), u, mu).ok);
  for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
    const sp::Problem pr(op, Regularizer::l1(25), Signal(f), alpha);
    const double ext = 1.0 / (mu * std::pow(f.norm(), 2.0 - alpha));
    const auto table = sp::sample_path(pr, sp::uniform_grid(1.3 * ext, 13));
    for (const auto& e : table.entries) {
      // every amplitude in [0, 1] is optimal exactly at the jump
      if (alpha == 1.0 && std::abs(e.t - ext) < 1e-9 * ext) continue;
      const double want = sp::singular_path_coefficient(alpha, 1, mu, f.norm(), e.t);
      EXPECT_LE((e.u - want * u).norm(), 1e-5 * u.norm()) << "alpha " << alpha << " t " << e.t;
    }
    const auto detected = sp::detect_extinction(table);
    ASSERT_TRUE(detected);
    EXPECT_NEAR(*detected, ext, 1e-3 * ext) << "alpha " << alpha;
  }
}

TEST(SingularVectors, CentredSquareUnderTwoDimensionalVariation) {
  for (std::size_t side : {4u, 8u}) {
    const std::size_t n = 5 * side;
    const auto J = Regularizer::tv2d(n, n);
    const Vec u = square(n, side);
    const double c = static_cast<double>(side * side) / static_cast<double>(n * n);
    const double lambda = 4.0 / (static_cast<double>(side) * (1.0 - c));
    const auto id = Operator::identity(sp::Shape::grid(n, n));
    EXPECT_TRUE(sp::verify_singular_vector(id, J, u, lambda, 1e-6).ok) << side;
    EXPECT_FALSE(sp::verify_singular_vector(id, J, u, 1.2 * lambda, 1e-6).ok) << side;
  }
}

TEST(SingularPath, SquareExtinctionScalesWithSide) {
  // extinction time against area^(alpha/2) / perimeter, the continuum law for calibrable sets
  for (std::size_t side : {8u, 16u}) {
    const std::size_t n = 5 * side;
    const Vec f = square(n, side);
    for (double alpha : {1.0, 2.0}) {
      const sp::Problem pr(Operator::identity(sp::Shape::grid(n, n)), Regularizer::tv2d(n, n),
                           Signal::image(n, n, f), alpha);
      const double law = std::pow(static_cast<double>(side), alpha) / (4.0 * static_cast<double>(side));
      const auto table = sp::sample_path(pr, sp::uniform_grid(1.5 * law, 6));
      const auto ext = sp::detect_extinction(table, 1e-6, 8);
      ASSERT_TRUE(ext) << side << " " << alpha;
      EXPECT_NEAR(*ext / law, 1.0, 0.05) << "side " << side << " alpha " << alpha;
    }
  }
}
