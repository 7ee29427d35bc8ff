#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rglue/core.hpp"
#include "rglue/grid.hpp"

namespace rglue::solver {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Non-finite values found in a linear system.
class NumericalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SolverParams {
  double alpha1 = 3.0;  // axial displacement, axial neighbor
  double alpha2 = 0.3;  // axial displacement, lateral neighbor
  double beta1 = 3.0;   // lateral displacement, axial neighbor
  double beta2 = 0.3;   // lateral displacement, lateral neighbor
  double gamma = 0.5;   // gradient-term matching parameter
  double lambda = 20.0;
  int outer_iterations = 5;
  double cg_tolerance = 1e-8;
  int cg_max_iterations = 20000;
  bool glue_mode = false;  // theta fixed at 1: amplitude term only
  int threads = 1;

  void validate() const;
};

/// Squared data mismatches at the current displacement. The gradient terms
/// already carry gamma. Samples whose warped position was clamped are zero.
struct DataResiduals {
  Grid amplitude;  // (I1 - I2')^2
  Grid grad_y;     // gamma * (grad I1,y - grad I2,y')^2
  Grid grad_x;     // gamma * (grad I1,x - grad I2,x')^2
};

DataResiduals data_residuals(const Grid& I1, const GradientPair& grads1,
                             const WarpedQuantities& warped, double gamma);

/// Per-sample split between the amplitude term (theta) and the gradient terms
/// (Gamma = gamma * (1 - theta)).
class WeightMap {
 public:
  WeightMap() = default;
  explicit WeightMap(Grid theta);
  static WeightMap uniform(int rows, int cols, double theta);

  const Grid& theta() const { return theta_; }
  double operator()(int i, int j) const { return theta_(i, j); }
  double gradient_weight(int i, int j, double gamma) const {
    return gamma * (1.0 - theta_(i, j));
  }
  double mean() const;

 private:
  Grid theta_;
};

/// theta = 1 / (1 + exp(lambda * delta)), delta = D_I - (D_y + D_x), with the
/// exponent clamped to ±700. Results are kept strictly inside (0, 1).
WeightMap update_weight_map(const DataResiduals& residuals, double lambda);

/// Hessian of the summed 4-neighbor regularizer over the interleaved vector:
/// each w * (u - v)^2 adds 2w to both diagonals and -2w to both couplings.
SparseMatrix build_regularizer(int rows, int cols, double alpha1, double alpha2,
                               double beta1, double beta2);

/// R(d) summed over all samples, evaluated directly from the differences.
double regularization_energy(const DisplacementField& d, const SolverParams& params);

struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

/// (H_I + H_y + H_x + D/2) dd = P_I mu1 + P_y mu2 + P_x mu3 - (D/2) d,
/// where D is the regularizer Hessian from build_regularizer. This is half the
/// Hessian and minus half the gradient of the linearized cost at dd = 0.
LinearSystem assemble_system(const Grid& I1, const GradientPair& grads1,
                             const WarpedQuantities& warped, const DisplacementField& d,
                             const WeightMap& theta, const SolverParams& params,
                             const SparseMatrix& regularizer);

/// Convenience overload: derivatives and warped samples computed here.
LinearSystem assemble_system(const RFFrame& I1, const RFFrame& I2,
                             const DisplacementField& d, const WeightMap& theta,
                             const SolverParams& params, const SparseMatrix& regularizer);

/// Linearized cost at displacement update `delta` (zero gives the cost at d).
double linearized_cost(const Grid& I1, const GradientPair& grads1,
                       const WarpedQuantities& warped, const DisplacementField& d,
                       const WeightMap& theta, const SolverParams& params,
                       const Eigen::VectorXd& delta);

struct SolveResult {
  Eigen::VectorXd delta;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient. Throws NumericalError on
/// non-finite input; non-convergence is reported through the result.
SolveResult solve_sparse(const LinearSystem& system, const SolverParams& params);

/// Dense LDLT solve, for systems of at most 1024 unknowns.
Eigen::VectorXd solve_dense(const LinearSystem& system);

struct IterationDiagnostics {
  int iteration = 0;
  double cost_before = 0.0;  // linearized cost at dd = 0
  double cost_after = 0.0;   // linearized cost at the solved dd
  double relative_residual = 0.0;
  int cg_iterations = 0;
  bool converged = false;
  double mean_theta = 0.0;
  double max_update = 0.0;
};

struct RefineResult {
  DisplacementField displacement;
  WeightMap weights;
  std::vector<IterationDiagnostics> diagnostics;

  bool converged() const;
};

/// Outer loop: warp, residuals, theta, assemble, solve, d += dd.
/// GLUE is the glue_mode special case with theta fixed at 1.
RefineResult rglue_refine(const RFFrame& I1, const RFFrame& I2, const DisplacementField& d0,
                          const SolverParams& params);

}  // namespace rglue::solver
