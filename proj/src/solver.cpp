#include "rglue/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "parallel.hpp"

namespace rglue::solver {
namespace {

using Triplet = Eigen::Triplet<double>;

double sq(double v) { return v * v; }

// y = A x over row blocks. Each output entry is a fixed-order sum, so the
// result does not depend on the thread count.
void multiply(const SparseMatrix& A, const Eigen::VectorXd& x, Eigen::VectorXd& y,
              int threads) {
  y.resize(A.rows());
  const auto* outer = A.outerIndexPtr();
  const auto* inner = A.innerIndexPtr();
  const auto* vals = A.valuePtr();
  const auto* row_nnz = A.innerNonZeroPtr();  // null when compressed
  detail::parallel_for(static_cast<int>(A.rows()), threads, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      double acc = 0.0;
      const auto stop = row_nnz ? outer[r] + row_nnz[r] : outer[r + 1];
      for (auto k = outer[r]; k < stop; ++k) acc += vals[k] * x[inner[k]];
      y[r] = acc;
    }
  });
}

void require_finite(const LinearSystem& sys) {
  for (Eigen::Index r = 0; r < sys.matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
      if (!std::isfinite(it.value())) throw NumericalError("non-finite entry in system matrix");
    }
  }
  if (!sys.rhs.allFinite()) throw NumericalError("non-finite entry in right-hand side");
}

}  // namespace

void SolverParams::validate() const {
  if (!(alpha1 > 0 && alpha2 > 0 && beta1 > 0 && beta2 > 0)) {
    throw std::invalid_argument("regularization weights must be positive");
  }
  if (!(gamma >= 0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
  if (outer_iterations < 1) throw std::invalid_argument("outer_iterations must be >= 1");
  if (!(cg_tolerance > 0)) throw std::invalid_argument("cg_tolerance must be positive");
  if (cg_max_iterations < 1) throw std::invalid_argument("cg_max_iterations must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

DataResiduals data_residuals(const Grid& I1, const GradientPair& grads1,
                             const WarpedQuantities& warped, double gamma) {
  const int m = I1.rows();
  const int n = I1.cols();
  if (warped.rows != m || warped.cols != n) throw ShapeError("data_residuals: shape mismatch");
  DataResiduals r{Grid(m, n), Grid(m, n), Grid(m, n)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const WarpedSample& w = warped.at(i, j);
      if (w.clamped) continue;
      r.amplitude(i, j) = sq(I1(i, j) - w.value);
      r.grad_y(i, j) = gamma * sq(grads1.axial(i, j) - w.grad_y);
      r.grad_x(i, j) = gamma * sq(grads1.lateral(i, j) - w.grad_x);
    }
  }
  return r;
}

WeightMap::WeightMap(Grid theta) : theta_(std::move(theta)) {
  for (double t : theta_.values()) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  }
}

WeightMap WeightMap::uniform(int rows, int cols, double theta) {
  return WeightMap(Grid(rows, cols, theta));
}

double WeightMap::mean() const {
  double s = 0.0;
  for (double t : theta_.values()) s += t;
  return theta_.empty() ? 0.0 : s / static_cast<double>(theta_.size());
}

WeightMap update_weight_map(const DataResiduals& res, double lambda) {
  const int m = res.amplitude.rows();
  const int n = res.amplitude.cols();
  Grid theta(m, n);
  const double below_one = std::nextafter(1.0, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double delta = res.amplitude(i, j) - (res.grad_y(i, j) + res.grad_x(i, j));
      const double arg = std::clamp(lambda * delta, -700.0, 700.0);
      // 1/(1+e^-700) rounds to 1.0; keep theta strictly below one.
      theta(i, j) = std::min(1.0 / (1.0 + std::exp(arg)), below_one);
    }
  }
  return WeightMap(std::move(theta));
}

SparseMatrix build_regularizer(int rows, int cols, double alpha1, double alpha2,
                               double beta1, double beta2) {
  const Eigen::Index N = 2 * static_cast<Eigen::Index>(rows) * cols;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(N) * 8);
  const auto couple = [&t](Eigen::Index u, Eigen::Index v, double w) {
    t.emplace_back(u, u, 2.0 * w);
    t.emplace_back(v, v, 2.0 * w);
    t.emplace_back(u, v, -2.0 * w);
    t.emplace_back(v, u, -2.0 * w);
  };
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const Eigen::Index p = static_cast<Eigen::Index>(i) * cols + j;
      if (i > 0) {
        const Eigen::Index q = p - cols;
        couple(2 * p, 2 * q, alpha1);
        couple(2 * p + 1, 2 * q + 1, beta1);
      }
      if (j > 0) {
        const Eigen::Index q = p - 1;
        couple(2 * p, 2 * q, alpha2);
        couple(2 * p + 1, 2 * q + 1, beta2);
      }
    }
  }
  SparseMatrix D(N, N);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

double regularization_energy(const DisplacementField& d, const SolverParams& p) {
  double R = 0.0;
  for (int i = 0; i < d.rows(); ++i) {
    for (int j = 0; j < d.cols(); ++j) {
      if (i > 0) {
        R += p.alpha1 * sq(d.axial(i, j) - d.axial(i - 1, j));
        R += p.beta1 * sq(d.lateral(i, j) - d.lateral(i - 1, j));
      }
      if (j > 0) {
        R += p.alpha2 * sq(d.axial(i, j) - d.axial(i, j - 1));
        R += p.beta2 * sq(d.lateral(i, j) - d.lateral(i, j - 1));
      }
    }
  }
  return R;
}

LinearSystem assemble_system(const Grid& I1, const GradientPair& grads1,
                             const WarpedQuantities& warped, const DisplacementField& d,
                             const WeightMap& theta, const SolverParams& params,
                             const SparseMatrix& regularizer) {
  const int m = I1.rows();
  const int n = I1.cols();
  if (warped.rows != m || warped.cols != n) throw ShapeError("assemble_system: warped shape");
  require_same_shape(I1, d.axial, "assemble_system: displacement");
  require_same_shape(I1, theta.theta(), "assemble_system: weight map");
  const Eigen::Index N = 2 * static_cast<Eigen::Index>(m) * n;
  if (regularizer.rows() != N || regularizer.cols() != N) {
    throw ShapeError("assemble_system: regularizer size");
  }

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(N) * 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const WarpedSample& w = warped.at(i, j);
      if (w.clamped) continue;
      const Eigen::Index a = 2 * (static_cast<Eigen::Index>(i) * n + j);
      const Eigen::Index l = a + 1;
      const double th = theta(i, j);
      const double G = theta.gradient_weight(i, j, params.gamma);

      // Supplementary h'^2 blocks: theta * v v^T and Gamma * v v^T.
      const double haa = th * w.deriv_a * w.deriv_a + G * w.grad_y_a * w.grad_y_a +
                         G * w.grad_x_a * w.grad_x_a;
      const double hal = th * w.deriv_a * w.deriv_l + G * w.grad_y_a * w.grad_y_l +
                         G * w.grad_x_a * w.grad_x_l;
      const double hll = th * w.deriv_l * w.deriv_l + G * w.grad_y_l * w.grad_y_l +
                         G * w.grad_x_l * w.grad_x_l;
      t.emplace_back(a, a, haa);
      t.emplace_back(a, l, hal);
      t.emplace_back(l, a, hal);
      t.emplace_back(l, l, hll);

      const double g1 = th * (I1(i, j) - w.value);
      const double g2 = G * (grads1.axial(i, j) - w.grad_y);
      const double g3 = G * (grads1.lateral(i, j) - w.grad_x);
      rhs[a] = w.deriv_a * g1 + w.grad_y_a * g2 + w.grad_x_a * g3;
      rhs[l] = w.deriv_l * g1 + w.grad_y_l * g2 + w.grad_x_l * g3;
    }
  }
  SparseMatrix H(N, N);
  H.setFromTriplets(t.begin(), t.end());

  LinearSystem sys;
  sys.matrix = H + 0.5 * regularizer;
  sys.rhs = rhs - 0.5 * (regularizer * d.interleaved());
  return sys;
}

LinearSystem assemble_system(const RFFrame& I1, const RFFrame& I2, const DisplacementField& d,
                             const WeightMap& theta, const SolverParams& params,
                             const SparseMatrix& regularizer) {
  require_same_shape(I1, I2, "assemble_system");
  const auto derivs = FrameDerivatives::of(I2);
  const auto warped = warped_quantities(I2, derivs, d, params.threads);
  return assemble_system(I1, gradients(I1), warped, d, theta, params, regularizer);
}

double linearized_cost(const Grid& I1, const GradientPair& grads1,
                       const WarpedQuantities& warped, const DisplacementField& d,
                       const WeightMap& theta, const SolverParams& params,
                       const Eigen::VectorXd& delta) {
  const int m = I1.rows();
  const int n = I1.cols();
  double C = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const WarpedSample& w = warped.at(i, j);
      if (w.clamped) continue;
      const auto k = 2 * (static_cast<Eigen::Index>(i) * n + j);
      const double da = delta[k];
      const double dl = delta[k + 1];
      const double G = theta.gradient_weight(i, j, params.gamma);
      C += theta(i, j) * sq(I1(i, j) - w.value - da * w.deriv_a - dl * w.deriv_l);
      C += G * sq(grads1.axial(i, j) - w.grad_y - da * w.grad_y_a - dl * w.grad_y_l);
      C += G * sq(grads1.lateral(i, j) - w.grad_x - da * w.grad_x_a - dl * w.grad_x_l);
    }
  }
  DisplacementField moved = d;
  moved.add_interleaved(delta);
  return C + regularization_energy(moved, params);
}

SolveResult solve_sparse(const LinearSystem& sys, const SolverParams& params) {
  require_finite(sys);
  const Eigen::Index N = sys.rhs.size();
  if (sys.matrix.rows() != N || sys.matrix.cols() != N) throw ShapeError("solve_sparse: size");

  SolveResult out;
  out.delta = Eigen::VectorXd::Zero(N);
  const double bnorm = sys.rhs.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::VectorXd inv_diag(N);
  const Eigen::VectorXd diag = sys.matrix.diagonal();
  for (Eigen::Index k = 0; k < N; ++k) inv_diag[k] = diag[k] > 0.0 ? 1.0 / diag[k] : 1.0;

  Eigen::VectorXd& x = out.delta;
  Eigen::VectorXd r = sys.rhs;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd Ap(N);
  double rz = r.dot(z);
  out.relative_residual = 1.0;
  for (int it = 1; it <= params.cg_max_iterations; ++it) {
    multiply(sys.matrix, p, Ap, params.threads);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;  // not positive definite along p
    const double step = rz / pAp;
    x += step * p;
    r -= step * Ap;
    out.iterations = it;
    out.relative_residual = r.norm() / bnorm;
    if (out.relative_residual <= params.cg_tolerance) {
      out.converged = true;
      break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

Eigen::VectorXd solve_dense(const LinearSystem& sys) {
  require_finite(sys);
  if (sys.rhs.size() > 1024) throw std::invalid_argument("dense solve limited to 1024 unknowns");
  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.matrix);
  return A.ldlt().solve(sys.rhs);
}

bool RefineResult::converged() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(),
                     [](const IterationDiagnostics& d) { return d.converged; });
}

RefineResult rglue_refine(const RFFrame& I1, const RFFrame& I2, const DisplacementField& d0,
                          const SolverParams& params) {
  params.validate();
  require_same_shape(I1, I2, "rglue_refine");
  require_same_shape(I1, d0.axial, "rglue_refine: initial displacement");
  require_same_shape(I1, d0.lateral, "rglue_refine: initial displacement");
  const int m = I1.rows();
  const int n = I1.cols();

  const GradientPair grads1 = gradients(I1);
  const FrameDerivatives derivs2 = FrameDerivatives::of(I2);
  const SparseMatrix D =
      build_regularizer(m, n, params.alpha1, params.alpha2, params.beta1, params.beta2);

  RefineResult result;
  result.displacement = d0;
  for (int k = 0; k < params.outer_iterations; ++k) {
    const auto warped = warped_quantities(I2, derivs2, result.displacement, params.threads);
    if (params.glue_mode) {
      result.weights = WeightMap::uniform(m, n, 1.0);
    } else {
      result.weights =
          update_weight_map(data_residuals(I1, grads1, warped, params.gamma), params.lambda);
    }
    const LinearSystem sys =
        assemble_system(I1, grads1, warped, result.displacement, result.weights, params, D);
    const SolveResult sol = solve_sparse(sys, params);

    IterationDiagnostics diag;
    diag.iteration = k + 1;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sol.delta.size());
    diag.cost_before = linearized_cost(I1, grads1, warped, result.displacement,
                                       result.weights, params, zero);
    diag.cost_after = linearized_cost(I1, grads1, warped, result.displacement,
                                      result.weights, params, sol.delta);
    diag.relative_residual = sol.relative_residual;
    diag.cg_iterations = sol.iterations;
    diag.converged = sol.converged;
    diag.mean_theta = result.weights.mean();
    diag.max_update = sol.delta.size() ? sol.delta.cwiseAbs().maxCoeff() : 0.0;
    result.diagnostics.push_back(diag);

    result.displacement.add_interleaved(sol.delta);
  }
  return result;
}

}  // namespace rglue::solver
