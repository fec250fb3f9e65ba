#include "rbsgm/gpc.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace rbsgm::gpc {

namespace {

// Appends every multi-index of exactly `remaining` total degree whose first
// `pos` entries are already fixed in `current`, leading exponent descending.
void enumerate_degree(int pos, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
  const int m = static_cast<int>(current.size());
  if (pos == m - 1) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (int d = remaining; d >= 0; --d) {
    current[pos] = d;
    enumerate_degree(pos + 1, remaining - d, current, out);
  }
  current[pos] = 0;
}

struct Term {
  MultiIndex index;
  double coeff;
};

// xi_k * Phi_alpha in the (infinite) orthonormal basis; k = 0 is the identity.
std::vector<Term> multiply_by_variable(int k, const MultiIndex& alpha) {
  if (k == 0) return {{alpha, 1.0}};
  std::vector<Term> out;
  const int a = alpha[k - 1];
  MultiIndex up = alpha;
  up[k - 1] = a + 1;
  out.push_back({std::move(up), legendre_beta(a + 1)});
  if (a > 0) {
    MultiIndex down = alpha;
    down[k - 1] = a - 1;
    out.push_back({std::move(down), legendre_beta(a)});
  }
  return out;
}

}  // namespace

Index basis_dimension(int m, int p) {
  if (m < 1 || p < 0) throw std::invalid_argument("basis_dimension: need m >= 1 and p >= 0");
  // C(m+p, p) built incrementally; each partial product is itself a binomial.
  Index c = 1;
  for (int k = 1; k <= p; ++k) c = c * (m + k) / k;
  return c;
}

GpcBasis enumerate_indices(int m, int p) {
  if (m < 1) throw std::invalid_argument("enumerate_indices: m must be >= 1, got " + std::to_string(m));
  if (p < 0) throw std::invalid_argument("enumerate_indices: p must be >= 0, got " + std::to_string(p));
  GpcBasis basis;
  basis.m = m;
  basis.p = p;
  basis.indices.reserve(static_cast<std::size_t>(basis_dimension(m, p)));
  MultiIndex current(static_cast<std::size_t>(m), 0);
  for (int degree = 0; degree <= p; ++degree) enumerate_degree(0, degree, current, basis.indices);
  return basis;
}

GpcBasis deterministic_basis() {
  GpcBasis basis;
  basis.indices.emplace_back();
  return basis;
}

double legendre_beta(int k) {
  if (k <= 0) throw std::invalid_argument("legendre_beta: k must be >= 1, got " + std::to_string(k));
  const double kk = k;
  return kk / std::sqrt(4.0 * kk * kk - 1.0);
}

SparseMatrix assemble_g(int i, int j, const GpcBasis& basis) {
  if (i < 0 || i > basis.m || j < 0 || j > basis.m)
    throw std::out_of_range("assemble_g: coordinate index out of range");

  std::map<MultiIndex, Index> position;
  for (Index l = 0; l < basis.size(); ++l) position.emplace(basis.indices[l], l);

  std::vector<Triplet> triplets;
  for (Index l = 0; l < basis.size(); ++l) {
    for (const Term& left : multiply_by_variable(i, basis.indices[l])) {
      // Phi_n contributes to Phi_gamma under xi_j only if alpha_n = gamma or gamma +- e_j.
      for (const Term& candidate : multiply_by_variable(j, left.index)) {
        const auto it = position.find(candidate.index);
        if (it == position.end()) continue;
        // <xi_i Phi_l, xi_j Phi_n>: coefficient of Phi_gamma in xi_j Phi_n equals the
        // coefficient of Phi_n in xi_j Phi_gamma (symmetric recurrence).
        triplets.emplace_back(l, it->second, left.coeff * candidate.coeff);
      }
    }
  }
  SparseMatrix g(basis.size(), basis.size());
  g.setFromTriplets(triplets.begin(), triplets.end());
  g.prune(0.0);
  return g;
}

Vector assemble_h(const GpcBasis& basis) {
  Vector h = Vector::Zero(basis.size());
  h(0) = 1.0;
  return h;
}

StochGalerkinMatrices::StochGalerkinMatrices(const GpcBasis& basis)
    : m_(basis.m), g_(static_cast<std::size_t>((basis.m + 1) * (basis.m + 1))), h_(assemble_h(basis)) {
  const auto slot = [this](int i, int j) { return static_cast<std::size_t>(i * (m_ + 1) + j); };
  for (int i = 0; i <= m_; ++i) {
    for (int j = i; j <= m_; ++j) {
      g_[slot(i, j)] = assemble_g(i, j, basis);
      if (j != i) g_[slot(j, i)] = SparseMatrix(g_[slot(i, j)].transpose());
    }
  }
}

const SparseMatrix& StochGalerkinMatrices::g(int i, int j) const {
  if (i < 0 || i > m_ || j < 0 || j > m_) throw std::out_of_range("StochGalerkinMatrices::g: index out of range");
  return g_[static_cast<std::size_t>(i * (m_ + 1) + j)];
}

}  // namespace rbsgm::gpc
