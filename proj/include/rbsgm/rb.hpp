#pragma once

#include "rbsgm/fem.hpp"
#include "rbsgm/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace rbsgm::rb {

/// Monte Carlo candidate parameters in [-1,1]^m.
struct TrainingSet {
  std::vector<Vector> samples;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(samples.size()); }
};

/// Reproducible from (m, size, seed) on any platform: mt19937_64 output is
/// mapped to doubles by hand rather than through std::uniform_real_distribution.
TrainingSet make_training_set(int m, int size, std::uint64_t seed);

/// Uniform double in [-1, 1) from one 64-bit draw.
double uniform_symmetric(std::uint64_t bits);

/// Direct solver for A_xi u = f. Uses sparse Cholesky when A_xi is SPD,
/// otherwise sparse LU.
class SnapshotSolver {
 public:
  explicit SnapshotSolver(const fem::PhysicalOperators& pops) : pops_(&pops) {}

  /// nullopt when A_xi is (numerically) singular: factorization failure or a
  /// relative residual above 1e-8 after the solve.
  std::optional<Vector> try_solve(const Vector& xi) const;
  /// Throws std::runtime_error when singular.
  Vector solve(const Vector& xi) const;

 private:
  const fem::PhysicalOperators* pops_;
};

/// Orthonormal reduced basis Q_n with snapshots U_n = Q_n R_n and every
/// projected operator needed by the reduced solves, extended in place.
///
/// Holds a pointer to the physical operators, which must outlive it.
class ReducedBasis {
 public:
  enum class Extension { Added, Deflated };

  explicit ReducedBasis(const fem::PhysicalOperators& pops);

  const fem::PhysicalOperators& pops() const { return *pops_; }
  Index size() const { return n_; }
  Index physical_size() const { return pops_->size(); }

  /// Gram-Schmidt (modified, two passes) against the current basis. A
  /// snapshot whose complement is below 1e-10 of its norm is rejected and
  /// the state is left unchanged.
  Extension extend(const Vector& snapshot, const Vector& xi, Index sample_index = -1);

  auto q() const { return q_.leftCols(n_); }
  auto r() const { return r_.topLeftCorner(n_, n_); }
  auto a_q(std::size_t term) const { return a_q_[term].leftCols(n_); }
  auto b_q(std::size_t term) const { return b_q_[term].leftCols(n_); }
  auto a_proj(std::size_t term) const { return a_proj_[term].topLeftCorner(n_, n_); }
  auto b_proj(std::size_t term) const { return b_proj_[term].topLeftCorner(n_, n_); }
  auto f_proj() const { return f_proj_.head(n_); }
  auto snapshots() const { return snapshots_.leftCols(n_); }
  const std::vector<Vector>& selected() const { return selected_; }
  const std::vector<Index>& selected_indices() const { return selected_indices_; }

  /// Q^T A_xi Q assembled from the projected blocks, O(terms * n^2).
  Matrix reduced_parametric(const Vector& xi) const;
  /// Snapshot coordinates l(xi) of the reduced solution, u_rb = U_n l.
  /// Empty optional when the reduced matrix is singular.
  std::optional<Vector> snapshot_coordinates(const Vector& xi) const;
  /// Residual-free indicator sum_i |l_i(xi)|; +inf for a singular reduced matrix.
  double lebesgue_indicator(const Vector& xi) const;

 private:
  void reserve(Index capacity);

  const fem::PhysicalOperators* pops_;
  Index n_ = 0;
  Index capacity_ = 0;
  Matrix q_;
  Matrix r_;
  Matrix snapshots_;
  std::vector<Matrix> a_q_;
  std::vector<Matrix> b_q_;
  std::vector<Matrix> a_proj_;
  std::vector<Matrix> b_proj_;
  Vector f_proj_;
  std::vector<Vector> selected_;
  std::vector<Index> selected_indices_;
};

/// Indicator for every candidate, evaluated in parallel; entry k belongs to sample k.
std::vector<double> indicator_sweep(const ReducedBasis& basis, const TrainingSet& training);

/// Largest entry among those not excluded; ties go to the lowest index.
/// Returns -1 when every entry is excluded.
Index argmax_indicator(const std::vector<double>& values, const std::vector<bool>& excluded = {});

/// argmax of the indicator over the training set, lowest index on ties.
Index greedy_select(const ReducedBasis& basis, const TrainingSet& training);

/// Greedy enrichment: random first sample, then repeated
/// argmax of the indicator. Candidates that turn out singular or deflate
/// are excluded from later selection, as are already selected samples.
class GreedyBuilder {
 public:
  struct Step {
    Index sample = -1;
    double indicator = 0.0;
    bool added = false;
  };

  GreedyBuilder(const fem::PhysicalOperators& pops, const TrainingSet& training, std::uint64_t seed);

  /// Seeds the basis with a randomly drawn sample. Returns false if no
  /// candidate yields a usable snapshot.
  bool initialize();
  /// One greedy enrichment. `added` is false on deflation; nullopt once the
  /// training set is exhausted.
  std::optional<Step> step();

  const ReducedBasis& basis() const { return basis_; }
  const std::vector<Step>& history() const { return history_; }
  const std::vector<Index>& skipped_singular() const { return skipped_; }
  Index available() const;

 private:
  bool try_add(Index sample, double indicator);

  const TrainingSet* training_;
  std::uint64_t seed_;
  SnapshotSolver solver_;
  ReducedBasis basis_;
  std::vector<bool> excluded_;
  std::vector<Step> history_;
  std::vector<Index> skipped_;
};

/// Greedy basis of dimension `dimension` (or smaller if candidates run out).
ReducedBasis build_greedy_basis(const fem::PhysicalOperators& pops, const TrainingSet& training, Index dimension,
                                std::uint64_t seed);

}  // namespace rbsgm::rb
