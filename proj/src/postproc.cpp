#include "rbsgm/postproc.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rbsgm {

SolutionStats stats_from_coefficients(const Matrix& coefficients) {
  if (coefficients.cols() < 1) throw std::invalid_argument("stats_from_coefficients: no stochastic modes");
  SolutionStats stats;
  stats.mean = coefficients.col(0);
  stats.variance = coefficients.rightCols(coefficients.cols() - 1).rowwise().squaredNorm();
  return stats;
}

double l2_norm(const Vector& v, const SparseMatrix& mass) {
  return std::sqrt(std::max(0.0, v.dot(mass * v)));
}

ErrorMetrics relative_errors(const SolutionStats& candidate, const SolutionStats& reference, const SparseMatrix& mass) {
  const double mean_norm = l2_norm(reference.mean, mass);
  const double var_norm = l2_norm(reference.variance, mass);
  if (mean_norm == 0.0 || var_norm == 0.0) throw std::invalid_argument("relative_errors: reference has zero norm");
  ErrorMetrics out;
  out.err_mean = l2_norm(candidate.mean - reference.mean, mass) / mean_norm;
  out.err_var = l2_norm(candidate.variance - reference.variance, mass) / var_norm;
  return out;
}

FullSgmResult solve_full_sgm(const SgSystem& system, const krylov::KrylovConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const MeanPreconditioner pc(system.pops());
  auto result = krylov::solve<Matrix>([&](const Matrix& x) { return system.matvec(x); },
                                      [&](const Matrix& y) { return pc.apply(y); }, system.rhs_matrix(), config);
  FullSgmResult out;
  out.coefficients = std::move(result.x);
  out.report = std::move(result.report);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace rbsgm
