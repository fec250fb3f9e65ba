#pragma once

#include "rbsgm/fem.hpp"
#include "rbsgm/types.hpp"

#include <vector>

namespace rbsgm::randfield {

/// One eigenpair of the unit-variance kernel exp(-|x-y|/c) on an interval.
/// The eigenfunction is cos(w (x - mid)) for even modes and sin(w (x - mid))
/// for odd modes, scaled to unit L2 norm.
struct Eigenpair1d {
  double eigenvalue = 0.0;
  double frequency = 0.0;
  double norm_scale = 0.0;
  double midpoint = 0.0;
  bool even = true;

  double operator()(double x) const;
};

/// Leading `count` eigenpairs, eigenvalues descending.
std::vector<Eigenpair1d> kl_1d(double corr_len, double lo, double hi, int count);

/// Truncated KL expansion  mean + scale * sum_i sqrt(lambda_i) a_i(x) xi_i,
/// with a_i sampled at mesh nodes.
struct KlField {
  double mean = 0.0;
  double scale = 0.0;
  double corr_len = 1.0;
  std::vector<double> eigenvalues;
  std::vector<Vector> eigenfunctions;
  /// 1D mode indices (x, y) that each 2D mode is the product of.
  std::vector<std::pair<int, int>> mode_pairs;

  int m() const { return static_cast<int>(eigenvalues.size()); }
  /// Nodal values of the i-th affine term; term 0 is the constant mean.
  Vector term(int i) const;
};

/// Separable 2D expansion on the mesh rectangle, truncated to `m` modes.
/// Eigenfunctions are rescaled to unit discrete L2 norm with the Q1 mass
/// matrix of `mesh`.
KlField kl_2d(double corr_len, const fem::GridMesh& mesh, int m, double mean = 0.0, double scale = 1.0);

/// 1D modes computed per axis before the 2D products are truncated to m.
int modes_per_axis(int m);

Vector evaluate_field(const KlField& field, const Vector& xi);

/// min_x ( mean - scale * sum_i sqrt(lambda_i) |a_i(x)| ): a positive value
/// guarantees the field is positive for every xi in [-1,1]^m.
double worst_case_minimum(const KlField& field);

}  // namespace rbsgm::randfield
