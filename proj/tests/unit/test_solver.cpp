#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cost_oracle.hpp"
#include "rglue/phantom.hpp"
#include "rglue/solver.hpp"
#include "test_support.hpp"

using namespace rglue;
using namespace rglue::solver;
using rglue::testing::CostProblem;
using rglue::testing::max_rel_error;
using rglue::testing::random_displacement;
using rglue::testing::random_grid;
using rglue::testing::smooth_frame;

namespace {

double reg_energy_oracle(const Eigen::VectorXd& v, int rows, int cols, double a1, double a2,
                         double b1, double b2) {
  const DisplacementField d = DisplacementField::from_interleaved(rows, cols, v);
  SolverParams p;
  p.alpha1 = a1;
  p.alpha2 = a2;
  p.beta1 = b1;
  p.beta2 = b2;
  return regularization_energy(d, p);
}

CostProblem random_problem(std::uint64_t seed, int rows = 8, int cols = 6) {
  CostProblem c;
  const RFFrame I1 = smooth_frame(rows, cols, seed);
  const RFFrame I2 = smooth_frame(rows, cols, seed + 1000);
  c.I1 = I1;
  c.g1 = gradients(I1);
  c.d = random_displacement(rows, cols, seed + 2000, 1.5);
  c.w = warped_quantities(I2, FrameDerivatives::of(I2), c.d);
  c.theta = random_grid(rows, cols, seed + 3000, 0.05, 0.95);
  return c;
}

LinearSystem assemble(const CostProblem& c, const SolverParams& p) {
  const SparseMatrix D = build_regularizer(c.I1.rows(), c.I1.cols(), p.alpha1, p.alpha2,
                                           p.beta1, p.beta2);
  return assemble_system(c.I1, c.g1, c.w, c.d, WeightMap(c.theta), p, D);
}

}  // namespace

TEST(Regularizer, LateralPairExample) {
  const SparseMatrix D = build_regularizer(1, 2, 3.0, 0.3, 3.0, 0.3);
  const Eigen::MatrixXd M(D);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
  want(0, 0) = want(2, 2) = 0.6;
  want(0, 2) = want(2, 0) = -0.6;
  want(1, 1) = want(3, 3) = 0.6;
  want(1, 3) = want(3, 1) = -0.6;
  EXPECT_TRUE(M.isApprox(want, 1e-15)) << M;
}

TEST(Regularizer, IsHessianOfEnergy) {
  const int rows = 4, cols = 3, N = 24;
  const double a1 = 3.0, a2 = 0.3, b1 = 2.0, b2 = 0.7;
  const Eigen::MatrixXd D(build_regularizer(rows, cols, a1, a2, b1, b2));
  const double h = 0.5;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) {
      auto eval = [&](double sp, double sq) {
        e.setZero();
        e[p] += sp * h;
        e[q] += sq * h;
        return reg_energy_oracle(e, rows, cols, a1, a2, b1, b2);
      };
      const double fd = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4 * h * h);
      EXPECT_NEAR(D(p, q), fd, 1e-12) << p << "," << q;
    }
  EXPECT_TRUE(D.isApprox(D.transpose()));
}

TEST(Regularizer, ConstantFieldsAreInNullSpace) {
  const SparseMatrix D = build_regularizer(5, 4, 3.0, 0.3, 3.0, 0.3);
  Eigen::VectorXd v(40);
  for (int k = 0; k < 40; ++k) v[k] = k % 2 == 0 ? 1.7 : -0.4;
  EXPECT_LT((D * v).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, MatchesFiniteDifferencesOfLinearizedCost) {
  SolverParams p;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CostProblem c = random_problem(seed);
    const LinearSystem sys = assemble(c, p);
    const Eigen::MatrixXd Hfd = 0.5 * c.fd_hessian(1e-2);
    const Eigen::VectorXd gfd = -0.5 * c.fd_gradient(1e-3);
    EXPECT_LE(max_rel_error(Eigen::MatrixXd(sys.matrix), Hfd), 1e-6) << "seed " << seed;
    EXPECT_LE(max_rel_error(sys.rhs, gfd), 1e-6) << "seed " << seed;
  }
}

TEST(Assembly, LinearizedCostMatchesOracle) {
  SolverParams p;
  const CostProblem c = random_problem(9);
  const Grid r = random_grid(1, c.unknowns(), 4, -0.3, 0.3);
  const Eigen::VectorXd delta = Eigen::Map<const Eigen::VectorXd>(r.data().data(), c.unknowns());
  const double got = linearized_cost(c.I1, c.g1, c.w, c.d, WeightMap(c.theta), p, delta);
  EXPECT_NEAR(got, c(delta), 1e-10 * std::abs(c(delta)));
}

TEST(Assembly, DataBlocksArePositiveSemidefinite) {
  SolverParams p;
  const CostProblem c = random_problem(3);
  const Eigen::MatrixXd H = Eigen::MatrixXd(assemble(c, p).matrix) -
                            0.5 * Eigen::MatrixXd(build_regularizer(8, 6, 3.0, 0.3, 3.0, 0.3));
  for (int k = 0; k < 48; ++k) {
    const Eigen::Matrix2d b = H.block<2, 2>(2 * k, 2 * k);
    EXPECT_GE(b(0, 0), -1e-12);
    EXPECT_GE(b.determinant(), -1e-10 * (1 + b.cwiseAbs().maxCoeff()));
  }
  const Eigen::MatrixXd A(assemble(c, p).matrix);
  EXPECT_TRUE(A.isApprox(A.transpose()));
  EXPECT_GT(A.ldlt().vectorD().minCoeff(), 0.0);
}

TEST(Assembly, IdenticalFramesAtZeroGiveZeroRhs) {
  const RFFrame I = smooth_frame(8, 6, 5);
  SolverParams p;
  const LinearSystem sys =
      assemble_system(I, I, DisplacementField(8, 6), WeightMap::uniform(8, 6, 0.5), p,
                      build_regularizer(8, 6, 3.0, 0.3, 3.0, 0.3));
  EXPECT_EQ(sys.rhs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assembly, ThetaOneIsGammaZeroBitForBit) {
  const CostProblem c = random_problem(12);
  const SparseMatrix D = build_regularizer(8, 6, 3.0, 0.3, 3.0, 0.3);
  SolverParams p;
  p.gamma = 0.5;
  SolverParams q = p;
  q.gamma = 0.0;
  const WeightMap one = WeightMap::uniform(8, 6, 1.0);
  const LinearSystem a = assemble_system(c.I1, c.g1, c.w, c.d, one, p, D);
  const LinearSystem b = assemble_system(c.I1, c.g1, c.w, c.d, one, q, D);
  const Eigen::MatrixXd Ma(a.matrix), Mb(b.matrix);
  EXPECT_TRUE((Ma.array() == Mb.array()).all());
  EXPECT_TRUE((a.rhs.array() == b.rhs.array()).all());
}

TEST(WeightMap, Examples) {
  DataResiduals r{Grid(1, 3), Grid(1, 3), Grid(1, 3)};
  r.amplitude(0, 0) = 0.05;
  r.amplitude(0, 1) = 1.0;
  r.grad_y(0, 1) = 0.6;
  r.grad_x(0, 1) = 0.4;
  r.amplitude(0, 2) = 7.0;
  const WeightMap half = update_weight_map(r, 0.0);
  for (double t : half.theta().values()) EXPECT_EQ(t, 0.5);
  const WeightMap w = update_weight_map(r, 20.0);
  EXPECT_NEAR(w(0, 0), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(w(0, 0), 0.26894, 1e-5);
  EXPECT_EQ(w(0, 1), 0.5);  // delta = 0
}

TEST(WeightMap, StaysStrictlyInsideUnitInterval) {
  DataResiduals r{Grid(1, 2), Grid(1, 2), Grid(1, 2)};
  r.amplitude(0, 0) = 1e6;
  r.grad_y(0, 1) = 1e6;
  for (double lambda : {20.0, 1e6, 1e300}) {
    const WeightMap w = update_weight_map(r, lambda);
    for (double t : w.theta().values()) {
      EXPECT_GT(t, 0.0);
      EXPECT_LT(t, 1.0);
    }
  }
  EXPECT_THROW(WeightMap(Grid(1, 1, 0.0)), std::invalid_argument);
}

TEST(Residuals, Examples) {
  Grid I1(3, 3, 5.0);
  const RFFrame I2(Grid(3, 3, 3.0));
  const WarpedQuantities w =
      warped_quantities(I2, FrameDerivatives::of(I2), DisplacementField(3, 3));
  const DataResiduals r = data_residuals(I1, gradients(I1), w, 0.5);
  EXPECT_EQ(r.amplitude(1, 1), 4.0);
  EXPECT_EQ(r.grad_y(1, 1), 0.0);

  // Gradient mismatch of 2 in each direction with gamma 0.5: 0.5 * 4 = 2.
  Grid R1(3, 3), R2(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) R1(i, j) = 2.0 * i + 2.0 * j;
  const RFFrame F2(R2);
  const WarpedQuantities w2 =
      warped_quantities(F2, FrameDerivatives::of(F2), DisplacementField(3, 3));
  const DataResiduals r2 = data_residuals(R1, gradients(R1), w2, 0.5);
  EXPECT_DOUBLE_EQ(r2.grad_y(1, 1) + r2.grad_x(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(r2.grad_y(1, 1), 2.0);
}

TEST(Residuals, ClampedSamplesAreZero) {
  const RFFrame I2(random_grid(4, 4, 2));
  DisplacementField d(4, 4);
  d.axial(0, 0) = -3.0;
  const WarpedQuantities w = warped_quantities(I2, FrameDerivatives::of(I2), d);
  const Grid I1 = random_grid(4, 4, 3);
  const DataResiduals r = data_residuals(I1, gradients(I1), w, 0.5);
  EXPECT_EQ(r.amplitude(0, 0), 0.0);
  EXPECT_EQ(r.grad_y(0, 0), 0.0);
  EXPECT_EQ(r.grad_x(0, 0), 0.0);
}

TEST(Cg, MatchesDenseSolve) {
  SolverParams p;
  p.cg_tolerance = 1e-12;
  const CostProblem c = random_problem(21, 16, 8);
  const LinearSystem sys = assemble(c, p);
  const SolveResult s = solve_sparse(sys, p);
  const Eigen::VectorXd x = solve_dense(sys);
  EXPECT_TRUE(s.converged);
  EXPECT_LE((s.delta - x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((sys.rhs - sys.matrix * s.delta).norm(), 1e-12 * sys.rhs.norm() * 10);
}

TEST(Cg, ThreadedMatchesSerial) {
  SolverParams p;
  const CostProblem c = random_problem(22, 16, 8);
  const LinearSystem sys = assemble(c, p);
  SolverParams q = p;
  q.threads = 4;
  EXPECT_LE((solve_sparse(sys, p).delta - solve_sparse(sys, q).delta).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Cg, ZeroRhsNeedsNoIterations) {
  LinearSystem sys;
  sys.matrix = build_regularizer(3, 3, 1, 1, 1, 1);
  sys.rhs = Eigen::VectorXd::Zero(18);
  const SolveResult s = solve_sparse(sys, SolverParams{});
  EXPECT_EQ(s.iterations, 0);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.delta.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Cg, DiagonalSystemInOneStep) {
  LinearSystem sys;
  sys.matrix = SparseMatrix(3, 3);
  sys.matrix.insert(0, 0) = 2.0;
  sys.matrix.insert(1, 1) = 4.0;
  sys.matrix.insert(2, 2) = 0.5;
  sys.rhs = Eigen::Vector3d(2.0, 2.0, 2.0);
  const SolveResult s = solve_sparse(sys, SolverParams{});
  EXPECT_EQ(s.iterations, 1);
  EXPECT_NEAR(s.delta[0], 1.0, 1e-15);
  EXPECT_NEAR(s.delta[1], 0.5, 1e-15);
  EXPECT_NEAR(s.delta[2], 4.0, 1e-15);
}

TEST(Cg, NonFiniteInputThrows) {
  LinearSystem sys;
  sys.matrix = build_regularizer(2, 2, 1, 1, 1, 1);
  sys.rhs = Eigen::VectorXd::Ones(8);
  sys.rhs[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_sparse(sys, SolverParams{}), NumericalError);
  EXPECT_THROW(solve_dense(sys), NumericalError);
}

TEST(Cg, ReportsNonConvergence) {
  SolverParams p;
  p.cg_max_iterations = 1;
  p.cg_tolerance = 1e-14;
  const LinearSystem sys = assemble(random_problem(5, 16, 8), p);
  const SolveResult s = solve_sparse(sys, p);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations, 1);
}

TEST(Refine, IdenticalFramesStayAtZero) {
  const RFFrame I = smooth_frame(20, 8, 3);
  const RefineResult r = rglue_refine(I, I, DisplacementField(20, 8), SolverParams{});
  for (double v : r.displacement.axial.values()) EXPECT_EQ(v, 0.0);
  for (double v : r.displacement.lateral.values()) EXPECT_EQ(v, 0.0);
  for (double t : r.weights.theta().values()) EXPECT_EQ(t, 0.5);
  EXPECT_EQ(r.diagnostics.size(), 5u);
  EXPECT_TRUE(r.converged());
}

TEST(Refine, ExactIntegerShiftIsAFixedPoint) {
  const int m = 30, n = 8, s = 3;
  Grid B = smooth_frame(m + s, n, 17);
  // Linear extrapolation at the two rows where one-sided and central
  // differences would otherwise disagree.
  for (int j = 0; j < n; ++j) {
    B(s - 1, j) = 2 * B(s, j) - B(s + 1, j);
    B(m, j) = 2 * B(m - 1, j) - B(m - 2, j);
  }
  Grid I1(m, n), I2(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      I1(i, j) = B(i + s, j);
      I2(i, j) = B(i, j);
    }
  DisplacementField d0(m, n);
  for (double& v : d0.axial.values()) v = s;
  const RefineResult r = rglue_refine(RFFrame(I1), RFFrame(I2), d0, SolverParams{});
  for (double v : r.displacement.axial.values()) EXPECT_NEAR(v, s, 1e-6);
  for (double v : r.displacement.lateral.values()) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(Refine, EverySolveLowersTheLinearizedCost) {
  phantom::PhantomSpec spec;
  spec.rows = 64;
  spec.cols = 16;
  spec.compression = 0.02;
  const auto pair = phantom::synthesize_pair(spec);
  for (bool glue : {true, false}) {
    SolverParams p;
    p.glue_mode = glue;
    const RefineResult r = rglue_refine(pair.pre, pair.post, DisplacementField(64, 16), p);
    for (const auto& d : r.diagnostics) {
      EXPECT_LE(d.cost_after, d.cost_before * (1 + 1e-12)) << "iteration " << d.iteration;
      EXPECT_TRUE(d.converged);
    }
    if (glue) {
      for (double t : r.weights.theta().values()) EXPECT_EQ(t, 1.0);
    }
  }
}

TEST(Refine, GlueAndLambdaZeroDifferOnlyThroughTheta) {
  // lambda = 0 fixes theta at 0.5; with gamma = 0 the gradient terms vanish
  // and the result is GLUE with the data term halved.
  const RFFrame I1 = smooth_frame(24, 8, 40);
  const RFFrame I2 = smooth_frame(24, 8, 41);
  SolverParams p;
  p.lambda = 0.0;
  p.gamma = 0.0;
  p.outer_iterations = 1;
  p.cg_tolerance = 1e-13;
  const RefineResult half = rglue_refine(I1, I2, DisplacementField(24, 8), p);
  SolverParams g = p;
  g.glue_mode = true;
  g.alpha1 *= 2;
  g.alpha2 *= 2;
  g.beta1 *= 2;
  g.beta2 *= 2;
  const RefineResult glue = rglue_refine(I1, I2, DisplacementField(24, 8), g);
  for (int k = 0; k < 24 * 8; ++k) {
    EXPECT_NEAR(half.displacement.axial.values()[k], glue.displacement.axial.values()[k], 1e-8);
  }
  for (double t : half.weights.theta().values()) EXPECT_EQ(t, 0.5);
}

TEST(SolverParams, Validation) {
  SolverParams p;
  p.alpha1 = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SolverParams{};
  p.lambda = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SolverParams{};
  p.outer_iterations = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_NO_THROW(SolverParams{}.validate());
}
