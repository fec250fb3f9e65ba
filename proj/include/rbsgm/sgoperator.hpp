#pragma once

#include "rbsgm/fem.hpp"
#include "rbsgm/gpc.hpp"
#include "rbsgm/types.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <vector>

namespace rbsgm {

/// Sum of Kronecker products  sum_k w_k (S_k (x) P_k)  applied to a
/// matricized vector X (P rows, S cols) as  sum_k w_k P_k X S_k^T.
///
/// `Phys` is the physical block type: a sparse matrix for the full system,
/// a dense matrix for the reduced one.
template <class Phys>
class KroneckerSum {
 public:
  struct Term {
    Phys phys;
    SparseMatrix stoch_t;  // S_k^T
    double weight;
  };

  KroneckerSum() = default;
  KroneckerSum(Index phys_size, Index stoch_size) : phys_size_(phys_size), stoch_size_(stoch_size) {}

  void add(Phys phys, const SparseMatrix& stoch, double weight) {
    if (phys.rows() != phys_size_ || phys.cols() != phys_size_ || stoch.rows() != stoch_size_ ||
        stoch.cols() != stoch_size_)
      throw std::invalid_argument("KroneckerSum::add: block dimensions do not match");
    terms_.push_back({std::move(phys), SparseMatrix(stoch.transpose()), weight});
  }

  Index phys_size() const { return phys_size_; }
  Index stoch_size() const { return stoch_size_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Terms are accumulated in insertion order, so results are reproducible bit for bit.
  Matrix apply(const Matrix& x) const {
    if (x.rows() != phys_size_ || x.cols() != stoch_size_)
      throw std::invalid_argument("KroneckerSum::apply: operand has wrong shape");
    Matrix out = Matrix::Zero(phys_size_, stoch_size_);
    Matrix mixed(phys_size_, stoch_size_);
    for (const Term& term : terms_) {
      mixed.noalias() = x * term.stoch_t;
      if (term.weight == 1.0)
        out.noalias() += term.phys * mixed;
      else if (term.weight == -1.0)
        out.noalias() -= term.phys * mixed;
      else
        out.noalias() += term.weight * (term.phys * mixed);
    }
    return out;
  }

 private:
  Index phys_size_ = 0;
  Index stoch_size_ = 0;
  std::vector<Term> terms_;
};

/// Stochastic factor paired with a stored quadratic block: G_ii, or
/// G_ij + G_ji when the block stands for both B_ij and B_ji.
SparseMatrix quadratic_stochastic_factor(const gpc::StochGalerkinMatrices& gmats, const fem::QuadraticTerm& term);

/// The coupled stochastic Galerkin operator
///   A = sum_i G_i0 (x) A_i - sum_ij G_ij (x) B_ij,   b = h (x) f
/// held in factored form.
class SgSystem {
 public:
  SgSystem(gpc::StochGalerkinMatrices gmats, fem::PhysicalOperators pops);

  const gpc::StochGalerkinMatrices& gmats() const { return gmats_; }
  const fem::PhysicalOperators& pops() const { return pops_; }
  /// Matricized right-hand side: first column f, zeros elsewhere.
  const Matrix& rhs_matrix() const { return rhs_; }
  Index physical_size() const { return pops_.size(); }
  Index stochastic_size() const { return gmats_.size(); }
  const KroneckerSum<SparseMatrix>& kronecker() const { return op_; }

  Matrix matvec(const Matrix& x) const { return op_.apply(x); }
  /// ||rhs - A x||_F (absolute).
  double residual_norm(const Matrix& x) const;

 private:
  gpc::StochGalerkinMatrices gmats_;
  fem::PhysicalOperators pops_;
  Matrix rhs_;
  KroneckerSum<SparseMatrix> op_;
};

/// P = I (x) A_{xi(0)} with A_{xi(0)} = A_0 - B_00, factorized once.
/// Uses sparse Cholesky when the mean matrix is SPD and sparse LU otherwise.
class MeanPreconditioner {
 public:
  explicit MeanPreconditioner(const fem::PhysicalOperators& pops);

  bool is_spd() const { return static_cast<bool>(llt_); }
  const SparseMatrix& mean_matrix() const { return mean_; }
  /// Solves A_{xi(0)} Z(:,c) = Y(:,c) for every column.
  Matrix apply(const Matrix& y) const;

 private:
  SparseMatrix mean_;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// Mean realization of i.i.d. uniform[-1,1] variables.
inline Vector mean_realization(int m) { return Vector::Zero(m); }

}  // namespace rbsgm
