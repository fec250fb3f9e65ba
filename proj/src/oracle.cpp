#include "rbsgm/oracle.hpp"

#include "rbsgm/experiment.hpp"
#include "rbsgm/krylov.hpp"
#include "rbsgm/randfield.hpp"
#include "rbsgm/rbsgm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rbsgm::oracle {

QuadratureRule gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (int k = 0; k < points; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= points; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double legendre_orthonormal(int k, double x) {
  double p0 = 1.0;
  if (k == 0) return 1.0;
  double p1 = x;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * k + 1.0) * p1;
}

Matrix quadrature_g(int i, int j, const gpc::GpcBasis& basis) {
  if (i < 0 || j < 0 || i > basis.m || j > basis.m) throw std::out_of_range("quadrature_g: index out of range");
  // Per-dimension integrand degree is at most 2p + 2.
  const QuadratureRule rule = gauss_legendre(basis.p + 2);
  const int deg = basis.p + 1;
  // table[power][a][b] = E[x^power phi_a phi_b] in one variable.
  std::vector<Matrix> table(3, Matrix::Zero(deg, deg));
  for (int power = 0; power < 3; ++power)
    for (int a = 0; a < deg; ++a)
      for (int b = 0; b < deg; ++b)
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double x = rule.nodes[q];
          table[power](a, b) +=
              0.5 * rule.weights[q] * std::pow(x, power) * legendre_orthonormal(a, x) * legendre_orthonormal(b, x);
        }
  const Index np = basis.size();
  Matrix g(np, np);
  for (Index l = 0; l < np; ++l) {
    for (Index n = 0; n < np; ++n) {
      double value = 1.0;
      for (int d = 0; d < basis.m; ++d) {
        const int power = (i == d + 1 ? 1 : 0) + (j == d + 1 ? 1 : 0);
        value *= table[power](basis.indices[l][d], basis.indices[n][d]);
      }
      g(l, n) = value;
    }
  }
  return g;
}

std::vector<double> nystrom_1d(double corr_len, double lo, double hi, int points) {
  const double h = (hi - lo) / points;
  Matrix k(points, points);
  for (int a = 0; a < points; ++a)
    for (int b = 0; b < points; ++b) k(a, b) = h * std::exp(-std::abs(h * (a - b)) / corr_len);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);
  std::vector<double> values(eig.eigenvalues().data(), eig.eigenvalues().data() + points);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

std::vector<double> nystrom_kl_1d(double corr_len, double lo, double hi, int points, int count) {
  const auto coarse = nystrom_1d(corr_len, lo, hi, points);
  const auto fine = nystrom_1d(corr_len, lo, hi, 2 * points);
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
  return out;
}

namespace {

std::vector<double> leading_products(const std::vector<double>& x, const std::vector<double>& y, int count) {
  std::vector<double> products;
  for (double a : x)
    for (double b : y) products.push_back(a * b);
  std::sort(products.begin(), products.end(), std::greater<>());
  products.resize(count);
  return products;
}

}  // namespace

std::vector<double> nystrom_kl_2d(double corr_len, const fem::Rectangle& rect, int points, int count) {
  const int per_axis = std::min(points, count + 1);
  const auto coarse = [&](int n) {
    auto x = nystrom_1d(corr_len, rect.x0, rect.x1, n);
    auto y = nystrom_1d(corr_len, rect.y0, rect.y1, n);
    x.resize(per_axis);
    y.resize(per_axis);
    return leading_products(x, y, count);
  };
  const auto c = coarse(points);
  const auto f = coarse(2 * points);
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = (4.0 * f[k] - c[k]) / 3.0;
  return out;
}

Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

Matrix dense_sg_matrix(const SgSystem& system) {
  const fem::PhysicalOperators& pops = system.pops();
  const gpc::StochGalerkinMatrices& gmats = system.gmats();
  const Index nh = system.physical_size();
  const Index np = system.stochastic_size();
  Matrix out = Matrix::Zero(nh * np, nh * np);
  const auto add_kron = [&](const Matrix& g, const Matrix& a, double w) {
    for (Index l = 0; l < np; ++l)
      for (Index n = 0; n < np; ++n)
        if (g(l, n) != 0.0) out.block(l * nh, n * nh, nh, nh) += w * g(l, n) * a;
  };
  for (const fem::AffineTerm& t : pops.a_terms) add_kron(Matrix(gmats.g(t.i, 0)), Matrix(t.mat), 1.0);
  for (const fem::QuadraticTerm& t : pops.b_terms) {
    add_kron(Matrix(gmats.g(t.i, t.j)), Matrix(t.mat), -1.0);
    if (t.i != t.j) add_kron(Matrix(gmats.g(t.j, t.i)), Matrix(t.mat), -1.0);
  }
  return out;
}

Vector dense_sg_rhs(const SgSystem& system) {
  const Index nh = system.physical_size();
  const Index np = system.stochastic_size();
  Vector b = Vector::Zero(nh * np);
  const Vector h = system.gmats().h();
  for (Index l = 0; l < np; ++l) b.segment(l * nh, nh) = h(l) * system.pops().load;
  return b;
}

Vector dense_solve(const Matrix& a, const Vector& b) { return a.fullPivLu().solve(b); }

namespace {

// Bilinear shape functions of one element at local (s,t) in [0,1]^2, with
// their derivatives in physical coordinates.
struct ShapeEval {
  double value[4];
  double dx[4];
  double dy[4];
};

ShapeEval shape_at(double s, double t, double hx, double hy) {
  ShapeEval e{};
  const double sv[4] = {1 - s, s, s, 1 - s};
  const double tv[4] = {1 - t, 1 - t, t, t};
  const double ds[4] = {-1, 1, 1, -1};
  const double dt[4] = {-1, -1, 1, 1};
  for (int a = 0; a < 4; ++a) {
    e.value[a] = sv[a] * tv[a];
    e.dx[a] = ds[a] * tv[a] / hx;
    e.dy[a] = sv[a] * dt[a] / hy;
  }
  return e;
}

template <class Integrand>
Matrix dense_assemble(const fem::GridMesh& mesh, bool interior_only, Integrand&& integrand) {
  const QuadratureRule rule = gauss_legendre(5);
  const Index nn = mesh.num_nodes();
  Matrix full = Matrix::Zero(nn, nn);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element(e);
    for (int qa = 0; qa < 5; ++qa)
      for (int qb = 0; qb < 5; ++qb) {
        const double s = 0.5 * (rule.nodes[qa] + 1.0);
        const double t = 0.5 * (rule.nodes[qb] + 1.0);
        const double w = 0.25 * rule.weights[qa] * rule.weights[qb] * mesh.hx() * mesh.hy();
        const ShapeEval ev = shape_at(s, t, mesh.hx(), mesh.hy());
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) full(nodes[a], nodes[b]) += w * integrand(nodes, ev, a, b);
      }
  }
  if (!interior_only) return full;
  Matrix out(mesh.num_dofs(), mesh.num_dofs());
  for (Index r = 0; r < mesh.num_dofs(); ++r)
    for (Index c = 0; c < mesh.num_dofs(); ++c) out(r, c) = full(mesh.dof_to_node(r), mesh.dof_to_node(c));
  return out;
}

double interp(const std::array<Index, 4>& nodes, const ShapeEval& ev, const Vector& nodal) {
  double v = 0.0;
  for (int a = 0; a < 4; ++a) v += ev.value[a] * nodal(nodes[a]);
  return v;
}

}  // namespace

Matrix dense_stiffness(const fem::GridMesh& mesh, const Vector& coeff, bool interior_only) {
  return dense_assemble(mesh, interior_only, [&](const std::array<Index, 4>& nodes, const ShapeEval& ev, int a, int b) {
    return interp(nodes, ev, coeff) * (ev.dx[a] * ev.dx[b] + ev.dy[a] * ev.dy[b]);
  });
}

Matrix dense_weighted_mass(const fem::GridMesh& mesh, const Vector& coeff_i, const Vector& coeff_j,
                           bool interior_only) {
  return dense_assemble(mesh, interior_only, [&](const std::array<Index, 4>& nodes, const ShapeEval& ev, int a, int b) {
    return interp(nodes, ev, coeff_i) * interp(nodes, ev, coeff_j) * ev.value[a] * ev.value[b];
  });
}

Matrix dense_parametric(const fem::PhysicalOperators& pops, const Vector& xi) {
  const auto coord = [&](int i) { return i == 0 ? 1.0 : xi(i - 1); };
  Matrix out = Matrix::Zero(pops.size(), pops.size());
  for (const fem::AffineTerm& t : pops.a_terms) out += coord(t.i) * Matrix(t.mat);
  for (const fem::QuadraticTerm& t : pops.b_terms) {
    out -= coord(t.i) * coord(t.j) * Matrix(t.mat);
    if (t.i != t.j) out -= coord(t.j) * coord(t.i) * Matrix(t.mat);
  }
  return out;
}

namespace {

CheckResult check(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

Problem small_problem(ProblemKind kind) {
  RunConfig config = RunConfig::defaults(kind);
  config.n = 5;
  config.m = 2;
  config.p = 2;
  return build_problem(config);
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& engine) {
  Matrix x(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) x(r, c) = rb::uniform_symmetric(engine());
  return x;
}

}  // namespace

std::vector<CheckResult> small_system_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 engine(seed);
  const Problem problem = small_problem(ProblemKind::Diffusion);
  const SgSystem system = make_system(problem, 2);
  const Matrix a = dense_sg_matrix(system);
  const Vector b = dense_sg_rhs(system);
  const Index nh = system.physical_size();
  const Index np = system.stochastic_size();

  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = random_matrix(nh, np, engine);
    worst = std::max(worst, (vec(system.matvec(x)) - a * vec(x)).norm() / (a * vec(x)).norm());
  }
  out.push_back(check("kronecker matvec vs dense (diffusion)", worst, 1e-12));

  krylov::KrylovConfig cfg;
  cfg.tol = 1e-13;
  const FullSgmResult sgm = solve_full_sgm(system, cfg);
  const Vector exact = dense_solve(a, b);
  out.push_back(check("full SGM PCG solve vs dense solve", (vec(sgm.coefficients) - exact).norm() / exact.norm(), 1e-9));

  const rb::TrainingSet training = rb::make_training_set(2, 40, seed);
  const rb::ReducedBasis basis = rb::build_greedy_basis(system.pops(), training, 3, seed);
  krylov::KrylovConfig rcfg;
  rcfg.tol = 1e-6;
  const Matrix reduced = solve_reduced_sg(basis, system.gmats(), rcfg);
  const double cached = global_residual(system, basis, reduced);
  const double dense = (b - a * vec(basis.q() * reduced)).norm() / b.norm();
  out.push_back(check("cached-product residual vs dense residual", std::abs(cached - dense) / dense, 1e-12));
  return out;
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  std::vector<CheckResult> out = small_system_checks(seed);
  std::mt19937_64 engine(seed ^ 0x9e3779b97f4a7c15ULL);

  {
    const Problem problem = small_problem(ProblemKind::Helmholtz);
    const SgSystem system = make_system(problem, 2);
    const Matrix a = dense_sg_matrix(system);
    const Vector b = dense_sg_rhs(system);
    const Matrix x = random_matrix(system.physical_size(), system.stochastic_size(), engine);
    out.push_back(check("kronecker matvec vs dense (helmholtz)", (vec(system.matvec(x)) - a * vec(x)).norm() / (a * vec(x)).norm(), 1e-12));
    const double res = system.residual_norm(x);
    out.push_back(check("residual norm vs dense (helmholtz)", std::abs(res - (b - a * vec(x)).norm()) / res, 1e-12));
    krylov::KrylovConfig cfg;
    cfg.tol = 1e-12;
    cfg.method = krylov::Method::BiCgStab;
    const FullSgmResult sgm = solve_full_sgm(system, cfg);
    const Vector exact = dense_solve(a, b);
    out.push_back(check("full SGM Bi-CGSTAB solve vs dense solve (helmholtz)",
                        (vec(sgm.coefficients) - exact).norm() / exact.norm(), 1e-8));

    const Vector xi = random_matrix(2, 1, engine);
    const rb::SnapshotSolver solver(system.pops());
    const Vector u = solver.solve(xi);
    const Vector ud = dense_solve(dense_parametric(system.pops(), xi), system.pops().load);
    out.push_back(check("snapshot solve vs dense (helmholtz)", (u - ud).norm() / ud.norm(), 1e-11));
  }

  {
    double worst = 0.0;
    for (int m = 1; m <= 49; ++m)
      for (int p = 0; gpc::basis_dimension(m, p) <= 50; ++p) {
        const gpc::GpcBasis basis = gpc::enumerate_indices(m, p);
        for (int i = 0; i <= m; ++i)
          for (int j = 0; j <= m; ++j)
            worst = std::max(worst, (Matrix(gpc::assemble_g(i, j, basis)) - quadrature_g(i, j, basis)).cwiseAbs().maxCoeff());
      }
    out.push_back(check("G_ij vs Gauss quadrature, all n_p <= 50", worst, 1e-13));
  }

  {
    const auto modes = randfield::kl_1d(1.0, -1.0, 1.0, 10);
    const auto ref = nystrom_kl_1d(1.0, -1.0, 1.0, 400, 10);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) worst = std::max(worst, std::abs(modes[k].eigenvalue - ref[k]) / ref[k]);
    out.push_back(check("1D KL eigenvalues vs Nystrom", worst, 1e-5));

    const fem::GridMesh mesh = fem::build_mesh({-1.0, 1.0, -1.0, 1.0}, 9);
    const randfield::KlField field = randfield::kl_2d(1.0, mesh, 10);
    const auto ref2 = nystrom_kl_2d(1.0, mesh.rect(), 60, 10);
    worst = 0.0;
    for (int k = 0; k < 10; ++k) worst = std::max(worst, std::abs(field.eigenvalues[k] - ref2[k]) / ref2[k]);
    out.push_back(check("2D KL eigenvalues vs Nystrom", worst, 1e-4));
  }

  {
    const fem::GridMesh mesh = fem::build_mesh({-1.0, 1.0, -1.0, 1.0}, 4);
    const Vector ci = random_matrix(mesh.num_nodes(), 1, engine);
    const Vector cj = random_matrix(mesh.num_nodes(), 1, engine);
    const Vector ca = random_matrix(mesh.num_nodes(), 1, engine).array() + 2.0;
    out.push_back(check("weighted mass vs dense quadrature",
                        (Matrix(fem::assemble_weighted_mass(mesh, ci, cj)) - dense_weighted_mass(mesh, ci, cj)).cwiseAbs().maxCoeff(),
                        1e-13));
    out.push_back(check("stiffness vs dense quadrature",
                        (Matrix(fem::assemble_stiffness(mesh, ca)) - dense_stiffness(mesh, ca)).cwiseAbs().maxCoeff(), 1e-13));
  }

  {
    const Problem problem = small_problem(ProblemKind::Diffusion);
    const rb::TrainingSet training = rb::make_training_set(2, 40, seed);
    const rb::ReducedBasis basis = rb::build_greedy_basis(problem.pops, training, 3, seed);
    double worst = 0.0;
    for (Index k = 0; k < training.size(); ++k) {
      const Vector& xi = training.samples[static_cast<std::size_t>(k)];
      const Matrix u = basis.snapshots();
      const Matrix a = dense_parametric(problem.pops, xi);
      const Vector l_ref = dense_solve(u.transpose() * a * u, u.transpose() * problem.pops.load);
      const auto l = basis.snapshot_coordinates(xi);
      if (!l) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      worst = std::max(worst, (*l - l_ref).norm() / l_ref.norm());
    }
    out.push_back(check("indicator coordinates vs snapshot-basis solve", worst, 1e-9));
  }
  return out;
}

}  // namespace rbsgm::oracle
