#pragma once

#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace zonalcap {

/// Convex QP with a diagonal Hessian:
///
///   minimize   0.5 x' diag(h) x + c' x
///   subject to A x = b,  lower <= x <= upper
///
/// Bounds may be infinite. Multipliers follow
///   diag(h) x + c - A' y - z_lower + z_upper = 0,  z_lower, z_upper >= 0,
/// so y_i is the sensitivity of the optimal objective to b_i.
struct QpProblem {
  Eigen::VectorXd hessian_diag;
  Eigen::VectorXd cost;
  Eigen::SparseMatrix<double> constraints;
  Eigen::VectorXd rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index variable_count() const { return cost.size(); }
  Eigen::Index constraint_count() const { return rhs.size(); }
};

struct QpOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  bool polish = true;
};

enum class QpStatus { Optimal, MaxIterations, Infeasible, NumericalError };

std::string_view to_string(QpStatus status);

struct QpResult {
  QpStatus status = QpStatus::NumericalError;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z_lower;
  Eigen::VectorXd z_upper;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
  /// Infinity norms of the primal and dual residuals, and the largest complementarity product,
  /// each relative to 1 + the norm of the corresponding problem data.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;

  double kkt_residual() const;
};

/// Deterministic primal-dual interior point (Mehrotra predictor-corrector) with fixed-variable and
/// singleton-row presolve and an active-set polish. Throws DimensionError on inconsistent input.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// Relative residuals of an arbitrary primal-dual point, using the same measures as QpResult.
void measure_residuals(const QpProblem& problem, QpResult& result);

}  // namespace zonalcap
