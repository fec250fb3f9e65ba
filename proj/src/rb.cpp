#include "rbsgm/rb.hpp"

#include "rbsgm/log.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace rbsgm::rb {

double uniform_symmetric(std::uint64_t bits) {
  // 53 random mantissa bits -> [0,1), then affine map to [-1,1).
  const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

TrainingSet make_training_set(int m, int size, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("make_training_set: m must be >= 1");
  if (size < 1) throw std::invalid_argument("make_training_set: size must be >= 1");
  TrainingSet set;
  set.seed = seed;
  std::mt19937_64 engine(seed);
  std::set<std::vector<double>> seen;
  while (set.size() < size) {
    Vector xi(m);
    for (int k = 0; k < m; ++k) xi(k) = uniform_symmetric(engine());
    if (!seen.emplace(xi.data(), xi.data() + m).second) continue;
    set.samples.push_back(std::move(xi));
  }
  return set;
}

std::optional<Vector> SnapshotSolver::try_solve(const Vector& xi) const {
  const Eigen::SparseMatrix<double> a = pops_->parametric(xi);
  const Vector& f = pops_->load;
  Vector u;
  bool ok = false;
  if (pops_->b_terms.empty()) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
    if (llt.info() == Eigen::Success) {
      u = llt.solve(f);
      ok = true;
    }
  }
  if (!ok) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) return std::nullopt;
    u = lu.solve(f);
  }
  const double f_norm = f.norm();
  if (!u.allFinite()) return std::nullopt;
  if (f_norm > 0.0 && (a * u - f).norm() > 1e-8 * f_norm) return std::nullopt;
  return u;
}

Vector SnapshotSolver::solve(const Vector& xi) const {
  auto u = try_solve(xi);
  if (!u) throw std::runtime_error("solve_snapshot: parametric matrix is singular");
  return std::move(*u);
}

ReducedBasis::ReducedBasis(const fem::PhysicalOperators& pops)
    : pops_(&pops), a_q_(pops.a_terms.size()), b_q_(pops.b_terms.size()), a_proj_(pops.a_terms.size()),
      b_proj_(pops.b_terms.size()) {
  reserve(16);
}

void ReducedBasis::reserve(Index capacity) {
  if (capacity <= capacity_) return;
  const Index rows = pops_->size();
  const auto grow_tall = [&](Matrix& mat) {
    mat.conservativeResize(rows, capacity);
    mat.rightCols(capacity - capacity_).setZero();
  };
  const auto grow_square = [&](Matrix& mat) {
    mat.conservativeResize(capacity, capacity);
    mat.rightCols(capacity - capacity_).setZero();
    mat.bottomRows(capacity - capacity_).setZero();
  };
  grow_tall(q_);
  grow_tall(snapshots_);
  grow_square(r_);
  for (auto& mat : a_q_) grow_tall(mat);
  for (auto& mat : b_q_) grow_tall(mat);
  for (auto& mat : a_proj_) grow_square(mat);
  for (auto& mat : b_proj_) grow_square(mat);
  f_proj_.conservativeResize(capacity);
  f_proj_.tail(capacity - capacity_).setZero();
  capacity_ = capacity;
}

ReducedBasis::Extension ReducedBasis::extend(const Vector& snapshot, const Vector& xi, Index sample_index) {
  if (snapshot.size() != physical_size()) throw std::invalid_argument("ReducedBasis::extend: snapshot size mismatch");

  const double snapshot_norm = snapshot.norm();
  Vector q = snapshot;
  Vector coeffs = Vector::Zero(n_ + 1);
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < n_; ++j) {
      const double c = q_.col(j).dot(q);
      q -= c * q_.col(j);
      coeffs(j) += c;
    }
  }
  const double complement = q.norm();
  if (!(complement >= 1e-10 * snapshot_norm) || snapshot_norm == 0.0) {
    log(LogLevel::Info, "reduced basis: snapshot rejected (relative complement " +
                            std::to_string(snapshot_norm > 0.0 ? complement / snapshot_norm : 0.0) + ")");
    return Extension::Deflated;
  }
  q /= complement;
  coeffs(n_) = complement;

  if (n_ + 1 > capacity_) reserve(2 * capacity_);
  const Index n = n_;
  q_.col(n) = q;
  snapshots_.col(n) = snapshot;
  r_.col(n).head(n + 1) = coeffs;

  // Block update: new column from one sparse matvec, new row from the cached products.
  const auto update = [&](const SparseMatrix& op, Matrix& op_q, Matrix& proj) {
    const Vector op_new = op * q;
    if (n > 0) {
      proj.col(n).head(n).noalias() = q_.leftCols(n).transpose() * op_new;
      proj.row(n).head(n).noalias() = q.transpose() * op_q.leftCols(n);
    }
    proj(n, n) = q.dot(op_new);
    op_q.col(n) = op_new;
  };
  for (std::size_t k = 0; k < a_q_.size(); ++k) update(pops_->a_terms[k].mat, a_q_[k], a_proj_[k]);
  for (std::size_t k = 0; k < b_q_.size(); ++k) update(pops_->b_terms[k].mat, b_q_[k], b_proj_[k]);
  f_proj_(n) = q.dot(pops_->load);

  selected_.push_back(xi);
  selected_indices_.push_back(sample_index);
  n_ = n + 1;
  return Extension::Added;
}

Matrix ReducedBasis::reduced_parametric(const Vector& xi) const {
  if (xi.size() != pops_->m) throw std::invalid_argument("ReducedBasis: realization has wrong length");
  Matrix out = Matrix::Zero(n_, n_);
  for (std::size_t k = 0; k < a_proj_.size(); ++k) {
    const int i = pops_->a_terms[k].i;
    const double w = i == 0 ? 1.0 : xi(i - 1);
    if (w != 0.0) out += w * a_proj(k);
  }
  for (std::size_t k = 0; k < b_proj_.size(); ++k) {
    const double w = fem::PhysicalOperators::quadratic_weight(pops_->b_terms[k], xi);
    if (w != 0.0) out -= w * b_proj(k);
  }
  return out;
}

std::optional<Vector> ReducedBasis::snapshot_coordinates(const Vector& xi) const {
  if (n_ == 0) throw std::logic_error("ReducedBasis: indicator needs at least one basis vector");
  const Eigen::PartialPivLU<Matrix> lu(reduced_parametric(xi));
  if (!(lu.rcond() > 1e-15)) return std::nullopt;
  const Vector c = lu.solve(Vector(f_proj()));
  Vector l = r().triangularView<Eigen::Upper>().solve(c);
  if (!l.allFinite()) return std::nullopt;
  return l;
}

double ReducedBasis::lebesgue_indicator(const Vector& xi) const {
  const auto l = snapshot_coordinates(xi);
  if (!l) return std::numeric_limits<double>::infinity();
  return l->cwiseAbs().sum();
}

std::vector<double> indicator_sweep(const ReducedBasis& basis, const TrainingSet& training) {
  std::vector<double> values(training.samples.size());
  const auto count = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t k = 0; k < count; ++k)
    values[static_cast<std::size_t>(k)] = basis.lebesgue_indicator(training.samples[static_cast<std::size_t>(k)]);
  return values;
}

Index argmax_indicator(const std::vector<double>& values, const std::vector<bool>& excluded) {
  Index best = -1;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!excluded.empty() && excluded[k]) continue;
    if (best < 0 || values[k] > values[static_cast<std::size_t>(best)]) best = static_cast<Index>(k);
  }
  return best;
}

Index greedy_select(const ReducedBasis& basis, const TrainingSet& training) {
  if (training.samples.empty()) throw std::invalid_argument("greedy_select: empty training set");
  return argmax_indicator(indicator_sweep(basis, training));
}

GreedyBuilder::GreedyBuilder(const fem::PhysicalOperators& pops, const TrainingSet& training, std::uint64_t seed)
    : training_(&training), seed_(seed), solver_(pops), basis_(pops), excluded_(training.samples.size(), false) {
  if (training.samples.empty()) throw std::invalid_argument("GreedyBuilder: empty training set");
}

Index GreedyBuilder::available() const {
  Index count = 0;
  for (bool e : excluded_) count += e ? 0 : 1;
  return count;
}

bool GreedyBuilder::try_add(Index sample, double indicator) {
  const auto idx = static_cast<std::size_t>(sample);
  excluded_[idx] = true;
  const auto snapshot = solver_.try_solve(training_->samples[idx]);
  if (!snapshot) {
    log(LogLevel::Warning, "greedy: skipping singular candidate " + std::to_string(sample));
    skipped_.push_back(sample);
    return false;
  }
  const bool added = basis_.extend(*snapshot, training_->samples[idx], sample) == ReducedBasis::Extension::Added;
  history_.push_back({sample, indicator, added});
  return true;
}

bool GreedyBuilder::initialize() {
  std::mt19937_64 engine(seed_);
  const auto size = static_cast<std::uint64_t>(training_->size());
  auto start = static_cast<Index>(engine() % size);
  for (Index attempt = 0; attempt < training_->size(); ++attempt) {
    const Index sample = (start + attempt) % training_->size();
    if (excluded_[static_cast<std::size_t>(sample)]) continue;
    if (try_add(sample, std::numeric_limits<double>::quiet_NaN()) && basis_.size() == 1) return true;
  }
  return false;
}

std::optional<GreedyBuilder::Step> GreedyBuilder::step() {
  if (basis_.size() == 0) throw std::logic_error("GreedyBuilder::step called before initialize");
  const std::vector<double> values = indicator_sweep(basis_, *training_);
  for (;;) {
    const Index best = argmax_indicator(values, excluded_);
    if (best < 0) return std::nullopt;
    if (try_add(best, values[static_cast<std::size_t>(best)])) return history_.back();
  }
}

ReducedBasis build_greedy_basis(const fem::PhysicalOperators& pops, const TrainingSet& training, Index dimension,
                                std::uint64_t seed) {
  GreedyBuilder builder(pops, training, seed);
  if (!builder.initialize()) throw std::runtime_error("build_greedy_basis: no usable first snapshot");
  while (builder.basis().size() < dimension) {
    if (!builder.step()) break;
  }
  return builder.basis();
}

}  // namespace rbsgm::rb
