#include "rbsgm/fem.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rbsgm::fem {

namespace {

struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussRule gauss_rule(int npts) {
  if (npts == 2) {
    const double a = 1.0 / std::sqrt(3.0);
    return {{-a, a}, {1.0, 1.0}};
  }
  const double a = std::sqrt(0.6);
  return {{-a, 0.0, a}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
}

constexpr std::array<double, 4> kCornerS{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kCornerT{-1.0, -1.0, 1.0, 1.0};

double shape(int a, double s, double t) { return 0.25 * (1.0 + kCornerS[a] * s) * (1.0 + kCornerT[a] * t); }
double shape_ds(int a, double t) { return 0.25 * kCornerS[a] * (1.0 + kCornerT[a] * t); }
double shape_dt(int a, double s) { return 0.25 * kCornerT[a] * (1.0 + kCornerS[a] * s); }

using ElementMatrix = std::array<std::array<double, 4>, 4>;

void check_nodal(const GridMesh& mesh, const Vector& v, const char* what) {
  if (v.size() != mesh.num_nodes())
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(mesh.num_nodes()) +
                                " nodal values, got " + std::to_string(v.size()));
}

template <class ElementFn>
SparseMatrix assemble_matrix(const GridMesh& mesh, Restriction restriction, ElementFn&& element_matrix) {
  const bool interior = restriction == Restriction::Interior;
  const Index size = interior ? mesh.num_dofs() : mesh.num_nodes();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * 16);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element(e);
    const ElementMatrix ke = element_matrix(nodes);
    for (int a = 0; a < 4; ++a) {
      const Index row = interior ? mesh.node_to_dof(nodes[a]) : nodes[a];
      if (row < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const Index col = interior ? mesh.node_to_dof(nodes[b]) : nodes[b];
        if (col < 0) continue;
        triplets.emplace_back(row, col, ke[a][b]);
      }
    }
  }
  SparseMatrix out(size, size);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace

GridMesh::GridMesh(const Rectangle& rect, int nodes_per_side) : rect_(rect), n_(nodes_per_side) {
  if (nodes_per_side < 3)
    throw std::invalid_argument("build_mesh: need at least 3 nodes per side, got " + std::to_string(nodes_per_side));
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) throw std::invalid_argument("build_mesh: degenerate rectangle");
  hx_ = (rect.x1 - rect.x0) / (n_ - 1);
  hy_ = (rect.y1 - rect.y0) / (n_ - 1);
  node_to_dof_.assign(static_cast<std::size_t>(num_nodes()), -1);
  for (Index k = 0; k < num_nodes(); ++k) {
    if (on_boundary(k)) continue;
    node_to_dof_[static_cast<std::size_t>(k)] = static_cast<Index>(dof_to_node_.size());
    dof_to_node_.push_back(k);
  }
}

std::array<double, 2> GridMesh::node(Index k) const {
  const Index i = k % n_;
  const Index j = k / n_;
  // Pin the far edge exactly so that rectangle bounds are reproduced bit for bit.
  const double x = i == n_ - 1 ? rect_.x1 : rect_.x0 + static_cast<double>(i) * hx_;
  const double y = j == n_ - 1 ? rect_.y1 : rect_.y0 + static_cast<double>(j) * hy_;
  return {x, y};
}

std::array<Index, 4> GridMesh::element(Index e) const {
  const Index i = e % (n_ - 1);
  const Index j = e / (n_ - 1);
  const Index base = j * n_ + i;
  return {base, base + 1, base + n_ + 1, base + n_};
}

bool GridMesh::on_boundary(Index k) const {
  const Index i = k % n_;
  const Index j = k / n_;
  return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
}

Vector GridMesh::restrict_to_dofs(const Vector& nodal) const {
  if (nodal.size() != num_nodes()) throw std::invalid_argument("restrict_to_dofs: size mismatch");
  Vector out(num_dofs());
  for (Index d = 0; d < num_dofs(); ++d) out(d) = nodal(dof_to_node(d));
  return out;
}

Vector GridMesh::extend_to_nodes(const Vector& dofs) const {
  if (dofs.size() != num_dofs()) throw std::invalid_argument("extend_to_nodes: size mismatch");
  Vector out = Vector::Zero(num_nodes());
  for (Index d = 0; d < num_dofs(); ++d) out(dof_to_node(d)) = dofs(d);
  return out;
}

Vector GridMesh::interpolate(const std::function<double(double, double)>& fn) const {
  Vector out(num_nodes());
  for (Index k = 0; k < num_nodes(); ++k) {
    const auto [x, y] = node(k);
    out(k) = fn(x, y);
  }
  return out;
}

GridMesh build_mesh(const Rectangle& rect, int nodes_per_side) { return GridMesh(rect, nodes_per_side); }

SparseMatrix assemble_stiffness(const GridMesh& mesh, const Vector& coeff, Restriction restriction) {
  check_nodal(mesh, coeff, "assemble_stiffness");
  const GaussRule rule = gauss_rule(2);
  const double sx = 2.0 / mesh.hx();
  const double sy = 2.0 / mesh.hy();
  const double det = 0.25 * mesh.hx() * mesh.hy();
  return assemble_matrix(mesh, restriction, [&](const std::array<Index, 4>& nodes) {
    ElementMatrix ke{};
    for (std::size_t qs = 0; qs < rule.points.size(); ++qs) {
      for (std::size_t qt = 0; qt < rule.points.size(); ++qt) {
        const double s = rule.points[qs];
        const double t = rule.points[qt];
        double a = 0.0;
        for (int c = 0; c < 4; ++c) a += coeff(nodes[c]) * shape(c, s, t);
        const double w = rule.weights[qs] * rule.weights[qt] * det * a;
        for (int r = 0; r < 4; ++r) {
          const double dxr = shape_ds(r, t) * sx;
          const double dyr = shape_dt(r, s) * sy;
          for (int c = 0; c < 4; ++c) ke[r][c] += w * (dxr * shape_ds(c, t) * sx + dyr * shape_dt(c, s) * sy);
        }
      }
    }
    return ke;
  });
}

SparseMatrix assemble_weighted_mass(const GridMesh& mesh, const Vector& coeff_i, const Vector& coeff_j,
                                    Restriction restriction) {
  check_nodal(mesh, coeff_i, "assemble_weighted_mass");
  check_nodal(mesh, coeff_j, "assemble_weighted_mass");
  const GaussRule rule = gauss_rule(3);
  const double det = 0.25 * mesh.hx() * mesh.hy();
  return assemble_matrix(mesh, restriction, [&](const std::array<Index, 4>& nodes) {
    ElementMatrix me{};
    for (std::size_t qs = 0; qs < rule.points.size(); ++qs) {
      for (std::size_t qt = 0; qt < rule.points.size(); ++qt) {
        const double s = rule.points[qs];
        const double t = rule.points[qt];
        std::array<double, 4> phi{};
        double ki = 0.0;
        double kj = 0.0;
        for (int c = 0; c < 4; ++c) {
          phi[c] = shape(c, s, t);
          ki += coeff_i(nodes[c]) * phi[c];
          kj += coeff_j(nodes[c]) * phi[c];
        }
        // ki*kj is formed as a product of the two interpolants so that swapping
        // the arguments gives bit-identical matrices.
        const double w = rule.weights[qs] * rule.weights[qt] * det * (ki * kj);
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) me[r][c] += w * phi[r] * phi[c];
      }
    }
    return me;
  });
}

SparseMatrix assemble_mass(const GridMesh& mesh, Restriction restriction) {
  const Vector one = Vector::Ones(mesh.num_nodes());
  return assemble_weighted_mass(mesh, one, one, restriction);
}

Vector assemble_load(const GridMesh& mesh, const std::function<double(double, double)>& source,
                     Restriction restriction) {
  const GaussRule rule = gauss_rule(2);
  const double det = 0.25 * mesh.hx() * mesh.hy();
  Vector full = Vector::Zero(mesh.num_nodes());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element(e);
    const auto [xa, ya] = mesh.node(nodes[0]);
    for (std::size_t qs = 0; qs < rule.points.size(); ++qs) {
      for (std::size_t qt = 0; qt < rule.points.size(); ++qt) {
        const double s = rule.points[qs];
        const double t = rule.points[qt];
        const double x = xa + 0.5 * (s + 1.0) * mesh.hx();
        const double y = ya + 0.5 * (t + 1.0) * mesh.hy();
        const double w = rule.weights[qs] * rule.weights[qt] * det * source(x, y);
        for (int c = 0; c < 4; ++c) full(nodes[c]) += w * shape(c, s, t);
      }
    }
  }
  return restriction == Restriction::Interior ? mesh.restrict_to_dofs(full) : full;
}

double PhysicalOperators::quadratic_weight(const QuadraticTerm& term, const Vector& xi) {
  const double xi_i = term.i == 0 ? 1.0 : xi(term.i - 1);
  const double xi_j = term.j == 0 ? 1.0 : xi(term.j - 1);
  return term.i == term.j ? xi_i * xi_j : 2.0 * xi_i * xi_j;
}

SparseMatrix PhysicalOperators::parametric(const Vector& xi) const {
  if (xi.size() != m) throw std::invalid_argument("PhysicalOperators::parametric: realization has wrong length");
  SparseMatrix out(size(), size());
  for (const AffineTerm& term : a_terms) {
    const double w = term.i == 0 ? 1.0 : xi(term.i - 1);
    if (w != 0.0) out += w * term.mat;
  }
  for (const QuadraticTerm& term : b_terms) {
    const double w = quadratic_weight(term, xi);
    if (w != 0.0) out -= w * term.mat;
  }
  return out;
}

PhysicalOperators assemble_operators(const GridMesh& mesh, int m, const std::vector<Vector>& diffusion,
                                     const std::vector<Vector>& wave, const Vector& load) {
  const auto expected = static_cast<std::size_t>(m + 1);
  if (!diffusion.empty() && diffusion.size() != expected)
    throw std::invalid_argument("assemble_operators: need m+1 diffusion terms");
  if (!wave.empty() && wave.size() != expected) throw std::invalid_argument("assemble_operators: need m+1 wave terms");
  if (load.size() != mesh.num_dofs()) throw std::invalid_argument("assemble_operators: load size mismatch");

  PhysicalOperators ops;
  ops.m = m;
  ops.load = load;
  for (int i = 0; i < static_cast<int>(diffusion.size()); ++i) {
    if (diffusion[static_cast<std::size_t>(i)].isZero(0.0)) continue;
    ops.a_terms.push_back({i, assemble_stiffness(mesh, diffusion[static_cast<std::size_t>(i)])});
  }
  for (int i = 0; i < static_cast<int>(wave.size()); ++i) {
    if (wave[static_cast<std::size_t>(i)].isZero(0.0)) continue;
    for (int j = i; j < static_cast<int>(wave.size()); ++j) {
      if (wave[static_cast<std::size_t>(j)].isZero(0.0)) continue;
      ops.b_terms.push_back(
          {i, j, assemble_weighted_mass(mesh, wave[static_cast<std::size_t>(i)], wave[static_cast<std::size_t>(j)])});
    }
  }
  return ops;
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  const auto old_precision = os.precision(17);
  for (Index r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  os.precision(old_precision);
}

}  // namespace rbsgm::fem
