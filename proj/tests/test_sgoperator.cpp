#include "rbsgm/experiment.hpp"
#include "rbsgm/oracle.hpp"
#include "rbsgm/sgoperator.hpp"

#include <doctest.h>

#include <random>

using namespace rbsgm;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(rows, cols);
  for (Index k = 0; k < x.size(); ++k) x.data()[k] = u(rng);
  return x;
}

Problem small(ProblemKind kind) {
  RunConfig c = RunConfig::defaults(kind);
  c.n = 5;
  c.m = 2;
  c.p = 2;
  return build_problem(c);
}

fem::PhysicalOperators deterministic_ops(bool with_wave) {
  const fem::GridMesh mesh = fem::build_mesh({0.0, 1.0, 0.0, 1.0}, 6);
  const Vector a0 = mesh.interpolate([](double x, double y) { return 1.0 + x * y; });
  std::vector<Vector> wave;
  if (with_wave) wave.push_back(Vector::Constant(mesh.num_nodes(), 2.0));
  return fem::assemble_operators(mesh, 0, {a0}, wave, fem::assemble_load(mesh, [](double, double) { return 1.0; }));
}

}  // namespace

TEST_CASE("matvec equals the explicitly assembled Kronecker matrix") {
  for (ProblemKind kind : {ProblemKind::Diffusion, ProblemKind::Helmholtz}) {
    const Problem pr = small(kind);
    const SgSystem sys = make_system(pr, 2);
    CHECK(sys.physical_size() == 9);
    CHECK(sys.stochastic_size() == 6);
    const Matrix dense = oracle::dense_sg_matrix(sys);
    for (std::uint64_t s = 0; s < 4; ++s) {
      const Matrix x = random_matrix(9, 6, 10 + s);
      const Vector ref = dense * oracle::vec(x);
      CHECK((oracle::vec(sys.matvec(x)) - ref).norm() / ref.norm() <= 1e-12);
      const Vector b = oracle::dense_sg_rhs(sys);
      const double res = (b - ref).norm();
      CHECK(std::abs(sys.residual_norm(x) - res) / res <= 1e-12);
    }
  }
}

TEST_CASE("matvec: deterministic embedding, symmetry, linearity") {
  const auto ops = deterministic_ops(true);
  const SgSystem sys(gpc::StochGalerkinMatrices(gpc::deterministic_basis()), ops);
  const Matrix x = random_matrix(ops.size(), 1, 3);
  const Matrix expected = ops.a_terms[0].mat * x - ops.b_terms[0].mat * x;
  CHECK((sys.matvec(x) - expected).norm() <= 1e-13 * expected.norm());

  const Problem pr = small(ProblemKind::Diffusion);
  const SgSystem diff = make_system(pr, 3);
  const Matrix a = random_matrix(9, diff.stochastic_size(), 4);
  const Matrix b = random_matrix(9, diff.stochastic_size(), 5);
  const double ab = frobenius_dot(diff.matvec(a), b);
  const double ba = frobenius_dot(a, diff.matvec(b));
  CHECK(std::abs(ab - ba) <= 1e-12 * std::abs(ab));

  const double alpha = 1.7;
  const double beta = -0.4;
  const Matrix lin = diff.matvec(alpha * a + beta * b);
  CHECK((lin - (alpha * diff.matvec(a) + beta * diff.matvec(b))).norm() <= 1e-13 * lin.norm());
  CHECK(oracle::vec(a).norm() == doctest::Approx(a.norm()).epsilon(1e-15));
}

TEST_CASE("rhs matrix and dimension checks") {
  const Problem pr = small(ProblemKind::Diffusion);
  const SgSystem sys = make_system(pr, 2);
  CHECK(sys.rhs_matrix().norm() == doctest::Approx(pr.pops.load.norm()).epsilon(1e-15));
  CHECK(sys.rhs_matrix().col(0) == pr.pops.load);
  CHECK(sys.rhs_matrix().rightCols(5).norm() == 0.0);
  CHECK(sys.residual_norm(Matrix::Zero(9, 6)) == doctest::Approx(pr.pops.load.norm()));
  CHECK_THROWS_AS(sys.matvec(Matrix::Zero(9, 5)), std::invalid_argument);
  CHECK_THROWS_AS(SgSystem(gpc::StochGalerkinMatrices(gpc::enumerate_indices(3, 2)), pr.pops), std::invalid_argument);
}

TEST_CASE("mean preconditioner: inverse pair, dense oracle, indefinite fallback") {
  const Problem pr = small(ProblemKind::Diffusion);
  const MeanPreconditioner pc(pr.pops);
  CHECK(pc.is_spd());
  const Matrix z = random_matrix(9, 6, 6);
  const Matrix y = pc.mean_matrix() * z;
  CHECK((pc.apply(y) - z).norm() <= 1e-12 * z.norm());

  const Matrix mean_dense = oracle::dense_parametric(pr.pops, Vector::Zero(2));
  const Vector e1 = Vector::Unit(9, 0);
  const Vector ref = oracle::dense_solve(mean_dense, e1);
  CHECK((pc.apply(Matrix(e1)).col(0) - ref).norm() <= 1e-11 * ref.norm());

  const Problem hz = small(ProblemKind::Helmholtz);
  const MeanPreconditioner hpc(hz.pops);
  CHECK_FALSE(hpc.is_spd());
  const Matrix hy = hpc.mean_matrix() * z;
  CHECK((hpc.apply(hy) - z).norm() <= 1e-10 * z.norm());
}

TEST_CASE("mean preconditioner is exact for a deterministic coefficient") {
  const auto ops = deterministic_ops(false);
  const SgSystem sys(gpc::StochGalerkinMatrices(gpc::deterministic_basis()), ops);
  const MeanPreconditioner pc(ops);
  const Matrix u = pc.apply(sys.rhs_matrix());
  CHECK(sys.residual_norm(u) <= 1e-12 * ops.load.norm());
}

TEST_CASE("mean preconditioner rejects a singular mean matrix") {
  const fem::GridMesh mesh = fem::build_mesh({0.0, 1.0, 0.0, 1.0}, 4);
  const Vector zero = Vector::Zero(mesh.num_nodes());
  const auto ops = fem::assemble_operators(mesh, 1, {zero, Vector::Ones(mesh.num_nodes())}, {},
                                           Vector::Ones(mesh.num_dofs()));
  CHECK_THROWS_AS(MeanPreconditioner{ops}, std::runtime_error);
}
