#pragma once

#include "rbsgm/types.hpp"

#include <vector>

namespace rbsgm::gpc {

/// Exponents of one multivariate polynomial, one entry per random variable.
using MultiIndex = std::vector<int>;

/// Total-degree polynomial chaos space in `m` variables up to order `p`.
///
/// Indices are graded by total degree; within a degree they are ordered
/// lexicographically with larger leading exponents first, so for m=2, p=2
/// the order is (0,0),(1,0),(0,1),(2,0),(1,1),(0,2). The constant
/// polynomial is always index 0.
struct GpcBasis {
  int m = 0;
  int p = 0;
  std::vector<MultiIndex> indices;

  Index size() const { return static_cast<Index>(indices.size()); }
};

GpcBasis enumerate_indices(int m, int p);

/// The one-element basis {1} with no random variables; embeds a
/// deterministic problem in the stochastic Galerkin machinery.
GpcBasis deterministic_basis();

/// Binomial coefficient C(m+p, p) computed without overflow for the sizes
/// used here.
Index basis_dimension(int m, int p);

/// Recurrence coefficient of the orthonormal Legendre family for the
/// uniform density on [-1,1]:  x phi_k = beta_{k+1} phi_{k+1} + beta_k phi_{k-1}.
double legendre_beta(int k);

/// G_ij(l,n) = E[xi_i Phi_l xi_j Phi_n] with xi_0 = 1, assembled exactly from
/// the three-term recurrence.
SparseMatrix assemble_g(int i, int j, const GpcBasis& basis);

/// h(l) = E[Phi_l], which is the first unit vector for an orthonormal basis.
Vector assemble_h(const GpcBasis& basis);

/// All G_ij for i,j in {0..m} plus h.
class StochGalerkinMatrices {
 public:
  explicit StochGalerkinMatrices(const GpcBasis& basis);

  int m() const { return m_; }
  Index size() const { return h_.size(); }
  const SparseMatrix& g(int i, int j) const;
  const Vector& h() const { return h_; }

 private:
  int m_;
  std::vector<SparseMatrix> g_;
  Vector h_;
};

}  // namespace rbsgm::gpc
