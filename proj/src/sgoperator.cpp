#include "rbsgm/sgoperator.hpp"

#include <string>

namespace rbsgm {

SparseMatrix quadratic_stochastic_factor(const gpc::StochGalerkinMatrices& gmats, const fem::QuadraticTerm& term) {
  if (term.i == term.j) return gmats.g(term.i, term.i);
  return SparseMatrix(gmats.g(term.i, term.j) + gmats.g(term.j, term.i));
}

SgSystem::SgSystem(gpc::StochGalerkinMatrices gmats, fem::PhysicalOperators pops)
    : gmats_(std::move(gmats)), pops_(std::move(pops)), op_(pops_.size(), gmats_.size()) {
  if (pops_.m != gmats_.m())
    throw std::invalid_argument("SgSystem: physical operators carry m=" + std::to_string(pops_.m) +
                                " but the stochastic basis has m=" + std::to_string(gmats_.m()));
  rhs_ = pops_.load * gmats_.h().transpose();
  for (const fem::AffineTerm& term : pops_.a_terms) op_.add(term.mat, gmats_.g(term.i, 0), 1.0);
  for (const fem::QuadraticTerm& term : pops_.b_terms) op_.add(term.mat, quadratic_stochastic_factor(gmats_, term), -1.0);
}

double SgSystem::residual_norm(const Matrix& x) const { return (rhs_ - matvec(x)).norm(); }

MeanPreconditioner::MeanPreconditioner(const fem::PhysicalOperators& pops)
    : mean_(pops.parametric(mean_realization(pops.m))) {
  const Eigen::SparseMatrix<double> colmajor = mean_;
  auto llt = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(colmajor);
  if (llt->info() == Eigen::Success) {
    llt_ = std::move(llt);
    return;
  }
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(colmajor);
  lu_->factorize(colmajor);
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("MeanPreconditioner: mean matrix is singular (" + lu_->lastErrorMessage() + ")");
}

Matrix MeanPreconditioner::apply(const Matrix& y) const {
  if (y.rows() != mean_.rows()) throw std::invalid_argument("MeanPreconditioner::apply: row count mismatch");
  if (llt_) return llt_->solve(y);
  return lu_->solve(y);
}

}  // namespace rbsgm
