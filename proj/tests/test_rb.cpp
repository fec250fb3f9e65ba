#include "rbsgm/experiment.hpp"
#include "rbsgm/oracle.hpp"
#include "rbsgm/rb.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace rbsgm;

namespace {

Problem small(ProblemKind kind, int m = 2, int n = 5) {
  RunConfig c = RunConfig::defaults(kind);
  c.n = n;
  c.m = m;
  c.p = 2;
  return build_problem(c);
}

Vector dense_snapshot(const fem::PhysicalOperators& pops, const Vector& xi) {
  return oracle::dense_solve(oracle::dense_parametric(pops, xi), pops.load);
}

}  // namespace

TEST_CASE("training set: in range, distinct, reproducible") {
  const auto a = rb::make_training_set(3, 200, 42);
  const auto b = rb::make_training_set(3, 200, 42);
  const auto c = rb::make_training_set(3, 200, 43);
  CHECK(a.size() == 200);
  std::set<std::vector<double>> distinct;
  for (Index k = 0; k < a.size(); ++k) {
    const Vector& xi = a.samples[static_cast<std::size_t>(k)];
    CHECK(xi.size() == 3);
    CHECK(xi.minCoeff() >= -1.0);
    CHECK(xi.maxCoeff() < 1.0);
    CHECK(xi == b.samples[static_cast<std::size_t>(k)]);
    distinct.emplace(xi.data(), xi.data() + 3);
  }
  CHECK(distinct.size() == 200);
  CHECK(a.samples[0] != c.samples[0]);
  CHECK_THROWS_AS(rb::make_training_set(0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(rb::make_training_set(2, 0, 1), std::invalid_argument);
}

TEST_CASE("uniform_symmetric maps the bit range onto [-1, 1)") {
  CHECK(rb::uniform_symmetric(0) == -1.0);
  CHECK(rb::uniform_symmetric(~std::uint64_t{0}) < 1.0);
  CHECK(rb::uniform_symmetric(~std::uint64_t{0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rb::uniform_symmetric(std::uint64_t{1} << 63) == 0.0);
}

TEST_CASE("snapshot solve matches the dense parametric solve") {
  for (ProblemKind kind : {ProblemKind::Diffusion, ProblemKind::Helmholtz}) {
    const Problem pr = small(kind);
    const rb::SnapshotSolver solver(pr.pops);
    for (const auto& xi : rb::make_training_set(2, 5, 7).samples) {
      const Vector ref = dense_snapshot(pr.pops, xi);
      CHECK((solver.solve(xi) - ref).norm() <= 1e-11 * ref.norm());
    }
    const Vector mean = solver.solve(Vector::Zero(2));
    const Vector ref = oracle::dense_solve(oracle::dense_parametric(pr.pops, Vector::Zero(2)), pr.pops.load);
    CHECK((mean - ref).norm() <= 1e-11 * ref.norm());
  }
}

TEST_CASE("snapshot scales as 1/(1 + g xi) for a one-term affine coefficient") {
  const fem::GridMesh mesh = fem::build_mesh({0.0, 1.0, 0.0, 1.0}, 6);
  const Vector one = Vector::Ones(mesh.num_nodes());
  const double g = 0.5;
  const auto pops = fem::assemble_operators(mesh, 1, {one, g * one}, {}, fem::assemble_load(mesh, [](double, double) {
                                              return 1.0;
                                            }));
  const rb::SnapshotSolver solver(pops);
  const Vector u0 = solver.solve(Vector::Zero(1));
  for (double xi : {-0.9, -0.3, 0.4, 0.99}) {
    const Vector u = solver.solve(Vector::Constant(1, xi));
    CHECK((u - u0 / (1.0 + g * xi)).norm() <= 1e-12 * u0.norm());
  }
}

TEST_CASE("reduced basis: orthonormality, deflation, QR and projections") {
  const Problem pr = small(ProblemKind::Helmholtz, 3, 7);
  const rb::SnapshotSolver solver(pr.pops);
  rb::ReducedBasis basis(pr.pops);
  const auto training = rb::make_training_set(3, 25, 3);

  const Vector u0 = solver.solve(training.samples[0]);
  CHECK(basis.extend(u0, training.samples[0], 0) == rb::ReducedBasis::Extension::Added);
  CHECK((basis.q().col(0) - u0 / u0.norm()).norm() <= 1e-14);

  // Duplicates and linear combinations deflate and leave the state untouched.
  CHECK(basis.extend(2.0 * u0, training.samples[0]) == rb::ReducedBasis::Extension::Deflated);
  CHECK(basis.size() == 1);

  for (Index k = 1; k < 20; ++k) basis.extend(solver.solve(training.samples[static_cast<std::size_t>(k)]),
                                              training.samples[static_cast<std::size_t>(k)], k);
  const Index n = basis.size();
  CHECK(n >= 10);
  const Vector combo = basis.snapshots().col(0) - 3.0 * basis.snapshots().col(1);
  CHECK(basis.extend(combo, Vector::Zero(3)) == rb::ReducedBasis::Extension::Deflated);
  CHECK(basis.size() == n);

  const Matrix q = basis.q();
  CHECK((q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((q * basis.r() - basis.snapshots()).norm() <= 1e-12 * basis.snapshots().norm());
  CHECK(basis.selected().size() == static_cast<std::size_t>(n));
  CHECK(basis.selected_indices().size() == static_cast<std::size_t>(n));

  for (std::size_t t = 0; t < pr.pops.a_terms.size(); ++t) {
    const Matrix aq = pr.pops.a_terms[t].mat * q;
    CHECK((basis.a_q(t) - aq).norm() <= 1e-11 * aq.norm());
    CHECK((basis.a_proj(t) - q.transpose() * aq).norm() <= 1e-11 * aq.norm());
  }
  for (std::size_t t = 0; t < pr.pops.b_terms.size(); ++t) {
    const Matrix bq = pr.pops.b_terms[t].mat * q;
    const double scale = std::max(bq.norm(), 1e-300);
    CHECK((basis.b_q(t) - bq).norm() <= 1e-11 * scale);
    CHECK((basis.b_proj(t) - q.transpose() * bq).norm() <= 1e-11 * scale);
  }
  CHECK((Vector(basis.f_proj()) - q.transpose() * pr.pops.load).norm() <= 1e-12 * pr.pops.load.norm());

  const Vector xi = training.samples[22];
  const Matrix direct = q.transpose() * Matrix(pr.pops.parametric(xi)) * q;
  CHECK((basis.reduced_parametric(xi) - direct).norm() <= 1e-11 * direct.norm());
}

TEST_CASE("indicator: cardinality at selected points and snapshot-basis oracle") {
  const Problem pr = small(ProblemKind::Diffusion, 2, 7);
  const rb::SnapshotSolver solver(pr.pops);
  const auto training = rb::make_training_set(2, 30, 11);

  rb::ReducedBasis basis(pr.pops);
  for (std::size_t k : {0u, 1u, 2u}) basis.extend(solver.solve(training.samples[k]), training.samples[k]);
  REQUIRE(basis.size() == 3);

  // Reproduction: at a selected sample the reduced solution is that snapshot.
  for (Index k = 0; k < 3; ++k) {
    const Vector l = *basis.snapshot_coordinates(training.samples[static_cast<std::size_t>(k)]);
    CHECK((l - Vector::Unit(3, k)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(basis.lebesgue_indicator(training.samples[static_cast<std::size_t>(k)]) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }

  // Independent route: Galerkin solve in the raw snapshot basis.
  Matrix u(pr.pops.size(), 3);
  for (Index k = 0; k < 3; ++k) u.col(k) = dense_snapshot(pr.pops, training.samples[static_cast<std::size_t>(k)]);
  for (std::size_t k = 5; k < 10; ++k) {
    const Vector& xi = training.samples[k];
    const Matrix a = oracle::dense_parametric(pr.pops, xi);
    const Vector l_ref = oracle::dense_solve(u.transpose() * a * u, u.transpose() * pr.pops.load);
    const Vector l = *basis.snapshot_coordinates(xi);
    CHECK((l - l_ref).norm() <= 1e-8 * l_ref.norm());
    CHECK(basis.lebesgue_indicator(xi) == doctest::Approx(l_ref.cwiseAbs().sum()).epsilon(1e-8));
  }

  rb::ReducedBasis one(pr.pops);
  one.extend(solver.solve(training.samples[0]), training.samples[0]);
  const Vector l1 = *one.snapshot_coordinates(training.samples[4]);
  const Matrix u1 = u.col(0);
  const Matrix a4 = oracle::dense_parametric(pr.pops, training.samples[4]);
  const double expected = (u1.transpose() * pr.pops.load)(0) / (u1.transpose() * a4 * u1)(0, 0);
  CHECK(l1.size() == 1);
  CHECK(l1(0) == doctest::Approx(expected).epsilon(1e-10));

  rb::ReducedBasis empty(pr.pops);
  CHECK_THROWS_AS(empty.lebesgue_indicator(training.samples[0]), std::logic_error);
}

TEST_CASE("argmax_indicator: lowest index on ties, exclusions honoured") {
  CHECK(rb::argmax_indicator({1.0, 3.0, 2.0, 3.0}) == 1);
  CHECK(rb::argmax_indicator({1.0, 3.0, 2.0, 3.0}, {false, true, false, false}) == 3);
  CHECK(rb::argmax_indicator({5.0, 5.0}, {true, true}) == -1);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(rb::argmax_indicator({1.0, inf, inf}) == 1);
  CHECK(rb::argmax_indicator({}) == -1);
}

TEST_CASE("greedy: determinism, no repeats, indicator capture grows") {
  const Problem pr = small(ProblemKind::Diffusion, 3, 7);
  const auto training = rb::make_training_set(3, 60, 5);
  const auto a = rb::build_greedy_basis(pr.pops, training, 8, 99);
  const auto b = rb::build_greedy_basis(pr.pops, training, 8, 99);
  CHECK(a.size() == 8);
  CHECK(a.selected_indices() == b.selected_indices());
  CHECK(a.q() == b.q());
  const std::set<Index> unique(a.selected_indices().begin(), a.selected_indices().end());
  CHECK(unique.size() == a.selected_indices().size());

  rb::GreedyBuilder builder(pr.pops, training, 99);
  REQUIRE(builder.initialize());
  CHECK(builder.basis().selected_indices().front() == a.selected_indices().front());
  std::vector<double> chosen;
  for (int k = 0; k < 5; ++k) {
    const auto sweep = rb::indicator_sweep(builder.basis(), training);
    const auto step = builder.step();
    REQUIRE(step.has_value());
    const double top = *std::max_element(sweep.begin(), sweep.end());
    CHECK(step->indicator == top);
    chosen.push_back(step->indicator);
  }
  CHECK(builder.available() == training.size() - 6);

  // The selected samples are reproduced, so their indicators drop to one.
  for (const auto& xi : builder.basis().selected())
    CHECK(builder.basis().lebesgue_indicator(xi) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("greedy runs out of candidates cleanly") {
  const Problem pr = small(ProblemKind::Diffusion, 2, 5);
  const auto training = rb::make_training_set(2, 4, 1);
  const auto basis = rb::build_greedy_basis(pr.pops, training, 50, 3);
  CHECK(basis.size() <= 4);
  CHECK(basis.size() >= 1);
}
