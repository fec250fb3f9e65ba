#pragma once

// Slow, dense reference computations used to cross-check the library.
// Nothing here shares code with the fast paths it is compared against.

#include "rbsgm/fem.hpp"
#include "rbsgm/gpc.hpp"
#include "rbsgm/rb.hpp"
#include "rbsgm/sgoperator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rbsgm::oracle {

/// Gauss-Legendre rule on [-1,1] by Newton iteration on P_n (weights sum to 2).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int points);

/// sqrt(2k+1) P_k(x) with P_k from Bonnet's recursion.
double legendre_orthonormal(int k, double x);

/// E[xi_i Phi_l xi_j Phi_n] by tensor Gauss quadrature, dimension by dimension.
Matrix quadrature_g(int i, int j, const gpc::GpcBasis& basis);

/// Eigenvalues (descending) of the midpoint-rule Nystrom matrix of exp(-|x-y|/c).
std::vector<double> nystrom_1d(double corr_len, double lo, double hi, int points);

/// Leading `count` eigenvalues from Nystrom runs at N and 2N points,
/// Richardson-extrapolated (the midpoint error is O(h^2)).
std::vector<double> nystrom_kl_1d(double corr_len, double lo, double hi, int points, int count);

/// Tensor-midpoint Nystrom for the separable 2D kernel on a rectangle with
/// N points per axis. The discrete 2D operator is the Kronecker product of
/// the axis operators, so its spectrum is formed from theirs.
std::vector<double> nystrom_kl_2d(double corr_len, const fem::Rectangle& rect, int points, int count);

/// Explicit N_h N_p square matrix  sum G_i0 (x) A_i - sum_{i,j} G_ij (x) B_ij
/// acting on column-major vec(X), with every (i,j) pair listed separately.
Matrix dense_sg_matrix(const SgSystem& system);
Vector dense_sg_rhs(const SgSystem& system);
Vector dense_solve(const Matrix& a, const Vector& b);
Vector vec(const Matrix& x);

/// Q1 matrices by 5x5 Gauss quadrature over global shape functions,
/// restricted to interior DOFs unless `interior_only` is false.
Matrix dense_stiffness(const fem::GridMesh& mesh, const Vector& coeff, bool interior_only = true);
Matrix dense_weighted_mass(const fem::GridMesh& mesh, const Vector& coeff_i, const Vector& coeff_j,
                           bool interior_only = true);

/// A_xi assembled densely from the stored blocks with both (i,j) orders.
Matrix dense_parametric(const fem::PhysicalOperators& pops, const Vector& xi);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Every small-instance dense-oracle comparison; used by `oracle-check`
/// and the acceptance gate.
std::vector<CheckResult> run_all_checks(std::uint64_t seed);

/// Dense-oracle equivalence on the 3x3-interior, m=2, p=2 instance:
/// Kronecker matvec, full SGM PCG solve and cached-product residual.
std::vector<CheckResult> small_system_checks(std::uint64_t seed);

}  // namespace rbsgm::oracle
