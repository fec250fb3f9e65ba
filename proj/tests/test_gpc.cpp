#include "rbsgm/gpc.hpp"
#include "rbsgm/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

using namespace rbsgm;
using gpc::MultiIndex;

TEST_CASE("enumerate_indices: small cases") {
  const auto b11 = gpc::enumerate_indices(1, 1);
  CHECK(b11.size() == 2);
  CHECK(b11.indices == std::vector<MultiIndex>{{0}, {1}});

  const auto b22 = gpc::enumerate_indices(2, 2);
  CHECK(b22.indices == std::vector<MultiIndex>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});
}

TEST_CASE("enumerate_indices: dimension formula") {
  CHECK(gpc::enumerate_indices(10, 5).size() == 3003);
  for (int m = 1; m <= 6; ++m)
    for (int p = 0; p <= 5; ++p) {
      const auto basis = gpc::enumerate_indices(m, p);
      CHECK(basis.size() == gpc::basis_dimension(m, p));
      // Graded and bounded by p, constant first.
      int last = 0;
      for (const auto& idx : basis.indices) {
        const int deg = std::accumulate(idx.begin(), idx.end(), 0);
        CHECK(deg <= p);
        CHECK(deg >= last);
        last = deg;
      }
      CHECK(std::accumulate(basis.indices[0].begin(), basis.indices[0].end(), 0) == 0);
    }
}

TEST_CASE("enumerate_indices: stable and rejects bad input") {
  CHECK(gpc::enumerate_indices(4, 3).indices == gpc::enumerate_indices(4, 3).indices);
  CHECK_THROWS_AS(gpc::enumerate_indices(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(gpc::enumerate_indices(2, -1), std::invalid_argument);
}

TEST_CASE("legendre_beta against quadrature") {
  const auto rule = oracle::gauss_legendre(4);
  for (int k = 1; k <= 3; ++k) {
    double integral = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = rule.nodes[q];
      integral += 0.5 * rule.weights[q] * x * oracle::legendre_orthonormal(k - 1, x) * oracle::legendre_orthonormal(k, x);
    }
    CHECK(gpc::legendre_beta(k) == doctest::Approx(integral).epsilon(1e-14));
  }
  CHECK(gpc::legendre_beta(1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(gpc::legendre_beta(2) == doctest::Approx(2.0 / std::sqrt(15.0)).epsilon(1e-15));
  // k / sqrt(4k^2 - 1) decreases towards 1/2 from above.
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double b = gpc::legendre_beta(k);
    CHECK(b < prev);
    CHECK(b > 0.5);
    prev = b;
  }
  CHECK_THROWS_AS(gpc::legendre_beta(0), std::invalid_argument);
}

TEST_CASE("assemble_g: closed forms for m=1, p=1") {
  const auto basis = gpc::enumerate_indices(1, 1);
  const Matrix g10 = Matrix(gpc::assemble_g(1, 0, basis));
  const double b = 1.0 / std::sqrt(3.0);
  CHECK(g10(0, 0) == 0.0);
  CHECK(g10(1, 1) == 0.0);
  CHECK(g10(0, 1) == doctest::Approx(b).epsilon(1e-15));
  CHECK(g10(1, 0) == doctest::Approx(b).epsilon(1e-15));
  const Matrix g11 = Matrix(gpc::assemble_g(1, 1, basis));
  CHECK(g11(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g11(1, 1) == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
  CHECK(g11(0, 1) == 0.0);
}

TEST_CASE("assemble_g: identity, transpose symmetry, sparsity") {
  for (int m = 1; m <= 3; ++m)
    for (int p = 0; p <= 3; ++p) {
      const auto basis = gpc::enumerate_indices(m, p);
      const gpc::StochGalerkinMatrices gm(basis);
      CHECK(Matrix(gm.g(0, 0)) == Matrix::Identity(basis.size(), basis.size()));
      for (int i = 0; i <= m; ++i) {
        const Matrix gi0 = Matrix(gm.g(i, 0));
        CHECK(gi0 == gi0.transpose());
        for (int j = 0; j <= m; ++j) {
          const Matrix gij = Matrix(gm.g(i, j));
          CHECK(gij == Matrix(gm.g(j, i)).transpose());
          const SparseMatrix& s = gm.g(i, j);
          for (Index row = 0; row < s.outerSize(); ++row) {
            Index nnz = 0;
            for (SparseMatrix::InnerIterator it(s, row); it; ++it)
              if (it.value() != 0.0) ++nnz;
            if (i != j) CHECK(nnz <= 4);
            if (i == j && i > 0) CHECK(nnz <= 3);
          }
        }
        if (i == 0) continue;
        // Nonzeros of G_i0 only between indices differing by one in coordinate i.
        for (Index l = 0; l < basis.size(); ++l)
          for (Index n = 0; n < basis.size(); ++n) {
            if (gi0(l, n) == 0.0) continue;
            for (int d = 0; d < m; ++d) {
              const int diff = std::abs(basis.indices[l][d] - basis.indices[n][d]);
              CHECK(diff == (d == i - 1 ? 1 : 0));
            }
          }
      }
    }
}

TEST_CASE("assemble_g matches tensor quadrature for every n_p <= 50") {
  double worst = 0.0;
  for (int m = 1; m <= 49; ++m)
    for (int p = 0; gpc::basis_dimension(m, p) <= 50; ++p) {
      const auto basis = gpc::enumerate_indices(m, p);
      for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
          worst = std::max(worst, (Matrix(gpc::assemble_g(i, j, basis)) - oracle::quadrature_g(i, j, basis))
                                      .cwiseAbs()
                                      .maxCoeff());
    }
  CHECK(worst <= 1e-13);
}

TEST_CASE("assemble_g rejects out-of-range coordinates") {
  const auto basis = gpc::enumerate_indices(2, 2);
  CHECK_THROWS_AS(gpc::assemble_g(3, 0, basis), std::out_of_range);
  CHECK_THROWS_AS(gpc::assemble_g(0, -1, basis), std::out_of_range);
}

TEST_CASE("assemble_h is the first unit vector") {
  CHECK(gpc::assemble_h(gpc::enumerate_indices(1, 1)) == Vector::Unit(2, 0));
  CHECK(gpc::assemble_h(gpc::enumerate_indices(2, 2)) == Vector::Unit(6, 0));
  for (int m = 1; m <= 5; ++m) CHECK(gpc::assemble_h(gpc::enumerate_indices(m, 3)).norm() == 1.0);
}

TEST_CASE("deterministic basis embeds a single mode") {
  const auto basis = gpc::deterministic_basis();
  const gpc::StochGalerkinMatrices gm(basis);
  CHECK(gm.size() == 1);
  CHECK(gm.m() == 0);
  CHECK(Matrix(gm.g(0, 0))(0, 0) == 1.0);
}
