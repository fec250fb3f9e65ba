#pragma once

#include "rbsgm/krylov.hpp"
#include "rbsgm/rb.hpp"
#include "rbsgm/sgoperator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rbsgm {

struct RbsgmConfig {
  /// Target relative residual of the full coupled system.
  double tol = 1e-4;
  /// Basis vectors added per stage (scaled by the stage multiplier).
  int ns = 15;
  /// Cap on the reduced dimension.
  int nmax = 500;
  /// Reduced coupled solves; `krylov.tol` is normally tol / 10.
  krylov::KrylovConfig krylov{};
  std::uint64_t seed = 0;

  void validate() const;
  /// Config with the reduced-solve tolerance pinned one decade below `tol`.
  static RbsgmConfig with_tolerance(double tol, int ns, int nmax, krylov::Method method, std::uint64_t seed);
};

struct StageRecord {
  int r = 0;
  double relres = 0.0;
  /// Secant prediction made after this stage; 0 when no prediction was made.
  int predicted_r = 0;
  /// Stage multiplier for the next stage.
  int st = 0;
  int krylov_iterations = 0;
};

struct RbsgmReport {
  std::vector<StageRecord> stages;
  int residual_evaluations = 0;
  std::vector<Index> selected_indices;
  std::vector<Vector> selected_samples;
  std::vector<Index> skipped_singular;
  int deflations = 0;
  /// r x N_p reduced coefficients and the lifted N_h x N_p coefficients.
  Matrix reduced_coefficients;
  Matrix coefficients;
  bool converged = false;
  double final_relres = 1.0;
  int final_r = 0;
  /// Non-empty when the run stopped for a reason other than tol or nmax.
  std::string failure;
  double basis_seconds = 0.0;
  double solve_seconds = 0.0;
  double residual_seconds = 0.0;
};

/// Kronecker-structured reduced operator  sum G_i0 (x) A_i^(r) - sum G_ij (x) B_ij^(r).
KroneckerSum<Matrix> reduced_operator(const rb::ReducedBasis& basis, const gpc::StochGalerkinMatrices& gmats);

/// Solves the r N_p reduced coupled system with the mean preconditioner
/// I (x) Q^T A_{xi(0)} Q. Fills `report` when given.
Matrix solve_reduced_sg(const rb::ReducedBasis& basis, const gpc::StochGalerkinMatrices& gmats,
                        const krylov::KrylovConfig& config, krylov::SolveReport* report = nullptr);

/// ||b - A vec(Q U_r)|| / ||b|| from the cached products A_i Q and B_ij Q,
/// without forming Q U_r.
double global_residual(const SgSystem& system, const rb::ReducedBasis& basis, const Matrix& reduced);

/// Secant step on h(r) = log10(relres) towards log10(tol), rounded up and
/// clamped to [r2+1, nmax]. Falls back to r2 + ns when h did not decrease.
int secant_predict(int r1, double h1, int r2, double h2, double tol, int ns, int nmax);

/// Staged greedy enrichment with reduced solves and secant-predicted stage
/// sizes, until the global relative residual reaches `config.tol` or the
/// basis reaches `config.nmax`.
RbsgmReport run_rbsgm(const SgSystem& system, const rb::TrainingSet& training, const RbsgmConfig& config);

}  // namespace rbsgm
