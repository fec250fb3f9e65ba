#pragma once

#include "rbsgm/types.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

namespace rbsgm::fem {

struct Rectangle {
  double x0 = -1.0;
  double x1 = 1.0;
  double y0 = -1.0;
  double y1 = 1.0;

  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Uniform tensor grid of bilinear (Q1) elements with homogeneous Dirichlet
/// conditions eliminated. Nodes are numbered row by row (x fastest).
class GridMesh {
 public:
  GridMesh(const Rectangle& rect, int nodes_per_side);

  const Rectangle& rect() const { return rect_; }
  int nodes_per_side() const { return n_; }
  Index num_nodes() const { return static_cast<Index>(n_) * n_; }
  Index num_elements() const { return static_cast<Index>(n_ - 1) * (n_ - 1); }
  Index num_dofs() const { return static_cast<Index>(dof_to_node_.size()); }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  std::array<double, 2> node(Index k) const;
  /// Counter-clockwise corner nodes of element e: (i,j),(i+1,j),(i+1,j+1),(i,j+1).
  std::array<Index, 4> element(Index e) const;
  bool on_boundary(Index node) const;
  /// Interior DOF of a node, or -1 for boundary nodes.
  Index node_to_dof(Index node) const { return node_to_dof_[static_cast<std::size_t>(node)]; }
  Index dof_to_node(Index dof) const { return dof_to_node_[static_cast<std::size_t>(dof)]; }

  /// Restricts a nodal vector to interior DOFs.
  Vector restrict_to_dofs(const Vector& nodal) const;
  /// Extends a DOF vector by zero boundary values.
  Vector extend_to_nodes(const Vector& dofs) const;
  /// Samples a function at all nodes.
  Vector interpolate(const std::function<double(double, double)>& fn) const;

 private:
  Rectangle rect_;
  int n_;
  double hx_;
  double hy_;
  std::vector<Index> node_to_dof_;
  std::vector<Index> dof_to_node_;
};

GridMesh build_mesh(const Rectangle& rect, int nodes_per_side);

/// Which rows/columns an assembled operator keeps.
enum class Restriction { Interior, Full };

/// Q1 stiffness  int a grad v_s . grad v_t  with `coeff` interpolated
/// bilinearly per element, 2x2 Gauss.
SparseMatrix assemble_stiffness(const GridMesh& mesh, const Vector& coeff,
                                Restriction restriction = Restriction::Interior);

/// Q1 mass  int k_i k_j v_s v_t  with both weights interpolated bilinearly,
/// 3x3 Gauss.
SparseMatrix assemble_weighted_mass(const GridMesh& mesh, const Vector& coeff_i, const Vector& coeff_j,
                                    Restriction restriction = Restriction::Interior);

/// Unit-coefficient mass matrix.
SparseMatrix assemble_mass(const GridMesh& mesh, Restriction restriction = Restriction::Interior);

/// int f v_s, 2x2 Gauss.
Vector assemble_load(const GridMesh& mesh, const std::function<double(double, double)>& source,
                     Restriction restriction = Restriction::Interior);

/// A_i block of the coupled operator: int a_i grad v_s . grad v_t.
struct AffineTerm {
  int i = 0;
  SparseMatrix mat;
};

/// B_ij block: int k_i k_j v_s v_t with i <= j. Because the weight is
/// symmetric in (i,j), one stored matrix stands for both B_ij and B_ji.
struct QuadraticTerm {
  int i = 0;
  int j = 0;
  SparseMatrix mat;
};

/// Physical-space building blocks of  A_xi = sum_i A_i xi_i - sum_ij B_ij xi_i xi_j
/// (xi_0 = 1) on interior DOFs, plus the load vector. Blocks that vanish
/// identically are simply not stored.
struct PhysicalOperators {
  int m = 0;
  std::vector<AffineTerm> a_terms;
  std::vector<QuadraticTerm> b_terms;
  Vector load;

  Index size() const { return load.size(); }
  /// Assembled A_xi for one realization (length m).
  SparseMatrix parametric(const Vector& xi) const;
  /// Multiplier of a quadratic term in A_xi: xi_i^2, or 2 xi_i xi_j for i < j.
  static double quadratic_weight(const QuadraticTerm& term, const Vector& xi);
};

/// Builds the affine blocks from nodal coefficient terms. `diffusion[i]` is
/// a_i (i = 0..m) and `wave[i]` is kappa_i; either list may be empty to drop
/// that part of the operator.
PhysicalOperators assemble_operators(const GridMesh& mesh, int m, const std::vector<Vector>& diffusion,
                                     const std::vector<Vector>& wave, const Vector& load);

/// MatrixMarket coordinate (general, real) text, 1-based.
void write_matrix_market(std::ostream& os, const SparseMatrix& a);

}  // namespace rbsgm::fem
