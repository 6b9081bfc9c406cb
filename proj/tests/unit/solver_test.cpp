#include "oracles.hpp"
#include "spectralpath/singular.hpp"
#include "spectralpath/solver.hpp"

#include <gtest/gtest.h>

namespace sp = spectralpath;
using sp::Mat;
using sp::Operator;
using sp::Regularizer;
using sp::Signal;
using sp::Vec;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

Mat example_matrix() {
  Mat a(2, 2);
  a << 2, 1, 1, 1;
  return a;
}

// argmin_v 0.5 |v - w|^2 + (s / alpha) |v - f|^alpha along the segment f + theta (w - f).
Vec fidelity_prox_oracle(const Vec& w, const Vec& f, double alpha, double s) {
  const double d = (w - f).norm();
  if (d == 0.0) return w;
  const double rho = oracle::bisect(
      [&](double r) { return r + s * std::pow(r, alpha - 1.0) - d; }, 0.0, d, 300);
  return f + (rho / d) * (w - f);
}

Vec gaussian_taps(int size, double sigma) {
  Vec k(size);
  for (int i = 0; i < size; ++i) {
    const double x = i - (size - 1) / 2.0;
    k[i] = std::exp(-x * x / (2 * sigma * sigma));
  }
  return k / k.sum();
}

}  // namespace

TEST(FidelityProx, Examples) {
  EXPECT_LE((sp::fidelity_prox(v2(2, 0), v2(0, 0), 2.0, 1.0) - v2(1, 0)).norm(), 1e-15);
  const Vec f = v2(1, 1), w = v2(1, 3);
  EXPECT_LE((sp::fidelity_prox(w, f, 1.0, 1.0) - (f + 0.5 * (w - f))).norm(), 1e-15);
  EXPECT_NEAR(sp::fidelity_prox(Vec::Constant(1, 2.0), Vec::Zero(1), 4.0, 1.0)[0], 1.0, 1e-12);
  EXPECT_EQ(sp::fidelity_prox(w, f, 1.0, 0.0), w);
  EXPECT_EQ(sp::fidelity_prox(f, f, 3.0, 2.0), f);
  EXPECT_THROW(sp::fidelity_prox(w, f, 0.5, 1.0), sp::InputError);
}

TEST(FidelityProx, MatchesScalarRootOracle) {
  std::mt19937 g(1);
  for (double alpha : {1.0, 1.3, 1.5, 2.0, 2.5, 3.0, 4.0}) {
    for (int k = 0; k < 10; ++k) {
      const Vec w = oracle::random_vec(g, 4, 2.0), f = oracle::random_vec(g, 4);
      const double s = 0.1 + 0.3 * k;
      EXPECT_LE((sp::fidelity_prox(w, f, alpha, s) - fidelity_prox_oracle(w, f, alpha, s)).norm(), 1e-11)
          << "alpha " << alpha;
    }
  }
}

TEST(FidelityProx, Nonexpansive) {
  std::mt19937 g(2);
  for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
    const Vec f = oracle::random_vec(g, 5);
    for (int k = 0; k < 20; ++k) {
      const Vec a = oracle::random_vec(g, 5, 2.0), b = oracle::random_vec(g, 5, 2.0);
      EXPECT_LE((sp::fidelity_prox(a, f, alpha, 0.7) - sp::fidelity_prox(b, f, alpha, 0.7)).norm(),
                (a - b).norm() + 1e-10);
    }
  }
}

TEST(Solve, SoftThresholdExample) {
  const auto r = sp::solve(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(2, -0.5)), 2.0, 1,
                           1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.u.values() - v2(1, 0)).norm(), 1e-8);
  const sp::Problem pr(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(2, -0.5)), 2.0);
  EXPECT_LE(sp::check_optimality(pr, 1.0, r.u, 1e-8).violation, 1e-8);
}

TEST(Solve, EigenvectorUnderExactFidelity) {
  const sp::Problem pr(Operator::identity(sp::Shape::vector(3)), Regularizer::l1(3),
                       Signal(Vec(Eigen::Vector3d(1, 0, 0))), 1.0);
  const auto below = sp::solve(pr, 0.5);
  EXPECT_TRUE(below.converged);
  EXPECT_LE((below.u.values() - Vec(Eigen::Vector3d(1, 0, 0))).norm(), 1e-7);
  const auto above = sp::solve(pr, 1.5);
  EXPECT_TRUE(above.converged);
  EXPECT_LE(above.u.values().norm(), 1e-7);
}

TEST(Solve, TotalVariationExtinctsToMean) {
  const sp::Problem pr(Operator::identity(sp::Shape::vector(2)), Regularizer::tv1d(2), Signal(v2(1, 3)), 2.0);
  const auto r = sp::solve(pr, 1.2);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.u.values() - v2(2, 2)).norm(), 1e-8);
}

TEST(Solve, ZeroWeightGivesLeastSquares) {
  std::mt19937 g(3);
  Mat a(6, 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::normal_distribution<double>()(g);
  const Vec f = oracle::random_vec(g, 6);
  const sp::Problem pr(Operator::dense(a), Regularizer::l1(4), Signal(f), 2.0);
  const auto r = sp::solve(pr, 0.0);
  const Vec ls = a.colPivHouseholderQr().solve(f);
  EXPECT_LE((r.u.values() - ls).norm(), 1e-8);
}

TEST(Solve, AgreesWithProxForEveryKind) {
  std::mt19937 g(4);
  const Mat M = Eigen::Vector3d(1, 4, 9).asDiagonal().toDenseMatrix();
  std::vector<Regularizer> kinds = {Regularizer::l1(8), Regularizer::linf(8), Regularizer::tv1d(8),
                                    Regularizer::tv2d(4, 4), Regularizer::quadratic(M)};
  for (const auto& J : kinds) {
    const Vec f = oracle::random_vec(g, J.size(), 2.0);
    const sp::Problem pr(Operator::identity(J.domain()), J, Signal(J.domain(), f), 2.0);
    sp::SolveOptions o;
    if (J.kind() == Regularizer::Kind::TV2D) o.gap_tol = 1e-10;
    for (double t : {0.2, 0.7, 1.5}) {
      const auto r = sp::solve(pr, t, o);
      EXPECT_TRUE(r.converged) << J.name() << " t=" << t;
      Vec ref;
      if (J.kind() == Regularizer::Kind::L1) ref = oracle::soft_threshold(f, t);
      else if (J.kind() == Regularizer::Kind::Linf) ref = oracle::prox_linf(f, t);
      else if (J.kind() == Regularizer::Kind::QuadraticForm) ref = f - t * oracle::project_ellipsoid(M, f / t);
      else if (J.kind() == Regularizer::Kind::TV1D) ref = oracle::prox_tv_dual(oracle::difference_matrix(8), f, t, 300000);
      else ref = oracle::prox_tv_dual(oracle::difference_matrix_2d(4, 4), f, t, 300000);
      EXPECT_LE((r.u.values() - ref).norm(), 1e-6) << J.name() << " t=" << t;
      EXPECT_LE((r.u.values() - J.prox(f, t)).norm(), 1e-6) << J.name() << " t=" << t;
    }
  }
}

TEST(Solve, EnergyNotBeatenByRandomProbes) {
  std::mt19937 g(5);
  const Vec taps = gaussian_taps(5, 1.0);
  struct Setup {
    Operator op;
    Regularizer reg;
    double alpha;
    int beta;
  };
  std::vector<Setup> setups = {{Operator::convolution(taps, 20), Regularizer::l1(20), 2.0, 1},
                               {Operator::convolution(taps, 20), Regularizer::tv1d(20), 1.5, 1},
                               {Operator::identity(sp::Shape::vector(15)), Regularizer::tv1d(15), 1.0, 1},
                               {Operator::identity(sp::Shape::vector(10)), Regularizer::linf(10), 3.0, 1},
                               {Operator::identity(sp::Shape::vector(10)), Regularizer::l1(10), 2.0, 2},
                               {Operator::identity(sp::Shape::grid(5, 5)), Regularizer::tv2d(5, 5), 1.5, 1}};
  for (const auto& s : setups) {
    const auto m = static_cast<Eigen::Index>(s.op.output_shape().size());
    const sp::Problem pr(s.op, s.reg, Signal(s.op.output_shape(), oracle::random_vec(g, m)), s.alpha, s.beta);
    const double t = 0.1;
    const auto r = sp::solve(pr, t);
    EXPECT_TRUE(r.converged) << s.reg.name() << " alpha " << s.alpha;
    const double e = sp::energy(pr, t, r.u.values());
    for (int k = 0; k < 20; ++k) {
      const Vec probe = r.u.values() + oracle::random_vec(g, s.reg.size(), k < 10 ? 1e-2 : 1.0);
      EXPECT_LE(e, sp::energy(pr, t, probe) + 1e-8) << s.reg.name() << " alpha " << s.alpha;
    }
  }
}

TEST(Solve, QuadraticPowerOnSingularVector) {
  // u_t = u / (1 + t lambda^2) for ||f|| = 1
  const sp::Problem l1(Operator::identity(sp::Shape::vector(3)), Regularizer::l1(3),
                       Signal(Vec(Eigen::Vector3d(0, 1, 0))), 2.0, 2);
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const auto r = sp::solve(l1, t);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.u[1], 1.0 / (1.0 + t), 1e-5);
    EXPECT_NEAR(r.u[1], sp::singular_path_coefficient(2.0, 2, 1.0, 1.0, t), 1e-5);
  }
  const sp::Problem ell(Operator::identity(sp::Shape::vector(2)),
                        Regularizer::quadratic(Eigen::Vector2d(1, 4).asDiagonal().toDenseMatrix()), Signal(v2(0, 1)),
                        2.0, 2);
  for (double t : {0.1, 1.0}) {
    const auto r = sp::solve(ell, t);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.u.values() - v2(0, 1.0 / (1.0 + 4.0 * t))).norm(), 1e-5);
  }
}

TEST(Solve, ExactFitBeforeExactPenalization) {
  const sp::Problem pr(Operator::dense(example_matrix()), Regularizer::l1(2), Signal(v2(-2, -3)), 1.0);
  const auto r = sp::solve(pr, 0.2);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-7);
  EXPECT_LE((r.u.values() - v2(1, -4)).norm(), 1e-6);
  const auto rep = sp::check_optimality(pr, 0.2, r.u.values(), 1e-6);
  EXPECT_TRUE(rep.exact_fit);
  EXPECT_LE(rep.violation, 1e-6);
}

TEST(Solve, ContrastInvarianceOfExactFidelity) {
  std::mt19937 g(6);
  const Vec f = oracle::random_vec(g, 16);
  const sp::Problem pr(Operator::identity(sp::Shape::vector(16)), Regularizer::tv1d(16), Signal(f), 1.0);
  const sp::Problem pr2(Operator::identity(sp::Shape::vector(16)), Regularizer::tv1d(16), Signal(Vec(2.0 * f)), 1.0);
  for (double t : {0.3, 0.8, 2.0}) {
    const auto r = sp::solve(pr, t);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(sp::check_optimality(pr2, t, Vec(2.0 * r.u.values()), 1e-6).violation, 1e-6) << "t=" << t;
  }
}

TEST(CheckOptimality, FailsAtDataForQuadraticFidelity) {
  const sp::Problem pr(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(2, -0.5)), 2.0);
  const auto rep = sp::check_optimality(pr, 1.0, v2(2, -0.5), 1e-8);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_GT(rep.violation, 1e-8);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(CheckOptimality, RejectsWrongCandidates) {
  const sp::Problem pr(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(2, -0.5)), 2.0);
  EXPECT_GT(sp::check_optimality(pr, 1.0, v2(0.5, 0), 1e-8).violation, 0.1);
  EXPECT_GT(sp::check_optimality(pr, 1.0, v2(1, 0.3), 1e-8).violation, 0.1);
}

TEST(CheckOptimality, QuadraticPowerWithZeroRegularizerIsReported) {
  const sp::Problem pr(Operator::identity(sp::Shape::vector(3)), Regularizer::tv1d(3),
                       Signal(Vec(Eigen::Vector3d(0, 1, 0))), 2.0, 2);
  const auto rep = sp::check_optimality(pr, 1.0, Vec::Constant(3, 1.0 / 3), 1e-8);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(Solve, NonConvergenceIsFlagged) {
  const sp::Problem pr(Operator::identity(sp::Shape::vector(2)), Regularizer::tv1d(2), Signal(v2(2, -0.5)), 1.5);
  sp::SolveOptions o;
  o.max_iters = 1;
  o.gap_tol = 1e-14;
  const auto r = sp::solve(pr, 0.3, o);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.violation, 1e-14);
}

TEST(Solve, InputErrors) {
  EXPECT_THROW(sp::Problem(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(3), Signal(v2(1, 1)), 2.0),
               sp::InputError);
  EXPECT_THROW(sp::Problem(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(1, 1)), 0.5),
               sp::InputError);
  EXPECT_THROW(sp::Problem(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(1, 1)), 2.0, 3),
               sp::InputError);
  const sp::Problem pr(Operator::identity(sp::Shape::vector(2)), Regularizer::l1(2), Signal(v2(1, 1)), 2.0);
  EXPECT_THROW(sp::solve(pr, -1.0), sp::InputError);
}
