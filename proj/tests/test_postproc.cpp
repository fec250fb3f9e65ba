#include "rbsgm/experiment.hpp"
#include "rbsgm/oracle.hpp"
#include "rbsgm/postproc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rbsgm;

TEST_CASE("stats: mean is column 0, variance sums the squared higher modes") {
  Matrix u(2, 4);
  u << 1.0, 2.0, -1.0, 0.5,  //
      -3.0, 0.0, 0.0, 0.0;
  const auto s = stats_from_coefficients(u);
  CHECK(s.mean(0) == 1.0);
  CHECK(s.mean(1) == -3.0);
  CHECK(s.variance(0) == doctest::Approx(4.0 + 1.0 + 0.25));
  CHECK(s.variance(1) == 0.0);
  CHECK(stats_from_coefficients(Matrix::Ones(3, 1)).variance.norm() == 0.0);
  CHECK_THROWS_AS(stats_from_coefficients(Matrix(3, 0)), std::invalid_argument);
}

TEST_CASE("variance is non-negative and scales quadratically") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix u(20, 10);
  for (Index k = 0; k < u.size(); ++k) u.data()[k] = g(rng);
  const auto s = stats_from_coefficients(u);
  const auto t = stats_from_coefficients(-2.5 * u);
  CHECK(s.variance.minCoeff() >= 0.0);
  CHECK((t.variance - 6.25 * s.variance).norm() <= 1e-13 * t.variance.norm());
  CHECK((t.mean + 2.5 * s.mean).norm() == 0.0);
}

TEST_CASE("gPC variance equals the quadrature variance of the expansion (Parseval)") {
  // u(xi) = sum_k U_k Phi_k(xi), moments taken by quadrature in xi.
  const auto basis = gpc::enumerate_indices(2, 3);
  Matrix u(3, basis.size());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Index k = 0; k < u.size(); ++k) u.data()[k] = unit(rng);
  const auto stats = stats_from_coefficients(u);

  // Tensor Gauss quadrature is exact for these polynomial moments.
  const auto rule = oracle::gauss_legendre(5);
  Vector mean = Vector::Zero(3);
  Vector second = Vector::Zero(3);
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
      const double w = rule.weights[a] * rule.weights[b] / 4.0;
      Vector value = Vector::Zero(3);
      for (Index k = 0; k < basis.size(); ++k) {
        const auto& alpha = basis.indices[static_cast<std::size_t>(k)];
        const double phi = oracle::legendre_orthonormal(alpha[0], rule.nodes[a]) *
                           oracle::legendre_orthonormal(alpha[1], rule.nodes[b]);
        value += phi * u.col(k);
      }
      mean += w * value;
      second += w * value.cwiseAbs2();
    }
  }
  CHECK((stats.mean - mean).norm() <= 1e-13);
  CHECK((stats.variance - (second - mean.cwiseAbs2())).norm() <= 1e-12);
}

TEST_CASE("one-term affine toy: variance of 1/(1+g xi) scaled solution") {
  // For A_xi = (1 + g xi) K with K fixed, u(xi) = u0 / (1 + g xi) and the
  // exact variance is u0^2 (1/(1-g^2) - (atanh(g)/g)^2).
  const fem::GridMesh mesh = fem::build_mesh({0.0, 1.0, 0.0, 1.0}, 5);
  const Vector one = Vector::Ones(mesh.num_nodes());
  const double g = 0.5;
  const auto pops =
      fem::assemble_operators(mesh, 1, {one, g * one}, {}, fem::assemble_load(mesh, [](double, double) { return 1.0; }));
  const SgSystem sys(gpc::StochGalerkinMatrices(gpc::enumerate_indices(1, 20)), pops);
  krylov::KrylovConfig kc;
  kc.tol = 1e-13;
  const auto full = solve_full_sgm(sys, kc);
  REQUIRE(full.report.converged);
  const auto s = stats_from_coefficients(full.coefficients);
  const Vector u0 = MeanPreconditioner(pops).apply(Matrix(pops.load)).col(0);
  const double factor_mean = std::atanh(g) / g;
  const double factor_var = 1.0 / (1.0 - g * g) - factor_mean * factor_mean;
  CHECK((s.mean - factor_mean * u0).norm() <= 1e-8 * u0.norm());
  CHECK((s.variance - factor_var * u0.cwiseAbs2()).norm() <= 1e-8 * u0.cwiseAbs2().norm());
}

TEST_CASE("relative errors") {
  const fem::GridMesh mesh = fem::build_mesh({0.0, 1.0, 0.0, 1.0}, 6);
  const SparseMatrix mass = fem::assemble_mass(mesh);
  const Index nd = mesh.num_dofs();
  SolutionStats ref{Vector::Ones(nd), Vector::Constant(nd, 2.0)};
  SolutionStats same = ref;
  const auto zero = relative_errors(same, ref, mass);
  CHECK(zero.err_mean == 0.0);
  CHECK(zero.err_var == 0.0);

  SolutionStats scaled{1.1 * ref.mean, 0.5 * ref.variance};
  const auto e = relative_errors(scaled, ref, mass);
  CHECK(e.err_mean == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(e.err_var == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(l2_norm(Vector::Ones(nd), mass) == doctest::Approx(std::sqrt(Vector::Ones(nd).dot(mass * Vector::Ones(nd)))));
  SolutionStats zero_ref{Vector::Zero(nd), Vector::Ones(nd)};
  CHECK_THROWS_AS(relative_errors(ref, zero_ref, mass), std::invalid_argument);
}

TEST_CASE("full SGM with a deterministic basis is the mean solve") {
  RunConfig c;
  c.n = 9;
  c.m = 2;
  const Problem pr = build_problem(c);
  const SgSystem sys = make_system(pr, 0);
  CHECK(sys.stochastic_size() == 1);
  krylov::KrylovConfig kc;
  kc.tol = 1e-12;
  const auto full = solve_full_sgm(sys, kc);
  const Vector ref = oracle::dense_solve(oracle::dense_parametric(pr.pops, Vector::Zero(2)), pr.pops.load);
  CHECK((full.coefficients.col(0) - ref).norm() <= 1e-10 * ref.norm());
  CHECK(stats_from_coefficients(full.coefficients).variance.norm() == 0.0);
  CHECK(full.seconds >= 0.0);
}
