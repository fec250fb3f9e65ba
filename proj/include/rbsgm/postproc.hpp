#pragma once

#include "rbsgm/krylov.hpp"
#include "rbsgm/sgoperator.hpp"

namespace rbsgm {

/// Pointwise mean and variance of a gPC expansion with nodal coefficients.
struct SolutionStats {
  Vector mean;
  Vector variance;
};

/// Column 0 is the mean; the variance at node s is sum_{j>=1} U(s,j)^2,
/// i.e. the squared stochastic mode fields summed (orthonormal basis).
SolutionStats stats_from_coefficients(const Matrix& coefficients);

struct ErrorMetrics {
  double err_mean = 0.0;
  double err_var = 0.0;
};

/// Relative discrete L2 errors ||c - r||_M / ||r||_M with the unit mass matrix M.
ErrorMetrics relative_errors(const SolutionStats& candidate, const SolutionStats& reference, const SparseMatrix& mass);

/// ||v||_M = sqrt(v^T M v).
double l2_norm(const Vector& v, const SparseMatrix& mass);

struct FullSgmResult {
  Matrix coefficients;
  krylov::SolveReport report;
  double seconds = 0.0;
};

/// Baseline solve of the full coupled system with the mean-based
/// preconditioner; the Krylov method comes from `config.method`.
/// Non-convergence is reported, not thrown.
FullSgmResult solve_full_sgm(const SgSystem& system, const krylov::KrylovConfig& config);

}  // namespace rbsgm
