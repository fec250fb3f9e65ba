#include "rbsgm/rbsgm.hpp"

#include "rbsgm/log.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rbsgm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Dense factorization of the projected mean matrix.
class ReducedMeanPreconditioner {
 public:
  explicit ReducedMeanPreconditioner(const Matrix& mean) : llt_(mean) {
    spd_ = llt_.info() == Eigen::Success;
    if (!spd_) {
      lu_.compute(mean);
      if (!(lu_.rcond() > 1e-15)) throw std::runtime_error("reduced mean preconditioner is singular");
    }
  }

  Matrix apply(const Matrix& y) const { return spd_ ? Matrix(llt_.solve(y)) : Matrix(lu_.solve(y)); }

 private:
  Eigen::LLT<Matrix> llt_;
  Eigen::PartialPivLU<Matrix> lu_;
  bool spd_ = false;
};

}  // namespace

void RbsgmConfig::validate() const {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("RbsgmConfig: tol must lie in (0,1)");
  if (ns < 1) throw std::invalid_argument("RbsgmConfig: ns must be >= 1");
  if (nmax < ns) throw std::invalid_argument("RbsgmConfig: need ns <= nmax");
  krylov.validate();
}

RbsgmConfig RbsgmConfig::with_tolerance(double tol, int ns, int nmax, krylov::Method method, std::uint64_t seed) {
  RbsgmConfig config;
  config.tol = tol;
  config.ns = ns;
  config.nmax = nmax;
  config.seed = seed;
  config.krylov.tol = tol / 10.0;
  config.krylov.method = method;
  return config;
}

KroneckerSum<Matrix> reduced_operator(const rb::ReducedBasis& basis, const gpc::StochGalerkinMatrices& gmats) {
  const fem::PhysicalOperators& pops = basis.pops();
  KroneckerSum<Matrix> op(basis.size(), gmats.size());
  for (std::size_t k = 0; k < pops.a_terms.size(); ++k)
    op.add(Matrix(basis.a_proj(k)), gmats.g(pops.a_terms[k].i, 0), 1.0);
  for (std::size_t k = 0; k < pops.b_terms.size(); ++k)
    op.add(Matrix(basis.b_proj(k)), quadratic_stochastic_factor(gmats, pops.b_terms[k]), -1.0);
  return op;
}

Matrix solve_reduced_sg(const rb::ReducedBasis& basis, const gpc::StochGalerkinMatrices& gmats,
                        const krylov::KrylovConfig& config, krylov::SolveReport* report) {
  if (basis.size() == 0) throw std::invalid_argument("solve_reduced_sg: empty reduced basis");
  const KroneckerSum<Matrix> op = reduced_operator(basis, gmats);
  const ReducedMeanPreconditioner pc(basis.reduced_parametric(mean_realization(basis.pops().m)));
  const Matrix rhs = Vector(basis.f_proj()) * gmats.h().transpose();

  auto result = krylov::solve<Matrix>([&](const Matrix& x) { return op.apply(x); },
                                      [&](const Matrix& y) { return pc.apply(y); }, rhs, config);
  if (report) *report = result.report;
  if (!result.report.converged)
    throw std::runtime_error("solve_reduced_sg: Krylov solver stopped with status '" +
                             std::string(krylov::to_string(result.report.status)) + "'");
  return std::move(result.x);
}

double global_residual(const SgSystem& system, const rb::ReducedBasis& basis, const Matrix& reduced) {
  if (reduced.rows() != basis.size() || reduced.cols() != system.stochastic_size())
    throw std::logic_error("global_residual: reduced coefficients do not match the cached basis products");
  const fem::PhysicalOperators& pops = system.pops();
  const gpc::StochGalerkinMatrices& gmats = system.gmats();

  Matrix residual = system.rhs_matrix();
  Matrix mixed(reduced.rows(), reduced.cols());
  for (std::size_t k = 0; k < pops.a_terms.size(); ++k) {
    mixed.noalias() = reduced * gmats.g(pops.a_terms[k].i, 0).transpose();
    residual.noalias() -= basis.a_q(k) * mixed;
  }
  for (std::size_t k = 0; k < pops.b_terms.size(); ++k) {
    mixed.noalias() = reduced * quadratic_stochastic_factor(gmats, pops.b_terms[k]).transpose();
    residual.noalias() += basis.b_q(k) * mixed;
  }
  return residual.norm() / system.rhs_matrix().norm();
}

int secant_predict(int r1, double h1, int r2, double h2, double tol, int ns, int nmax) {
  const int upper = std::max(nmax, r2 + 1);
  if (!(h2 < h1)) return std::min(r2 + ns, upper);
  const double target = std::log10(tol);
  const double r = r1 + (r2 - r1) / (h2 - h1) * (target - h1);
  // Guard the conversion: a nearly flat secant can send r far beyond any cap.
  const double capped = std::min(std::ceil(r), static_cast<double>(upper));
  return std::clamp(static_cast<int>(capped), r2 + 1, upper);
}

RbsgmReport run_rbsgm(const SgSystem& system, const rb::TrainingSet& training, const RbsgmConfig& config) {
  config.validate();
  RbsgmReport report;
  rb::GreedyBuilder builder(system.pops(), training, config.seed);

  auto clock = Clock::now();
  if (!builder.initialize()) {
    report.failure = "no candidate produced a usable first snapshot";
    return report;
  }
  report.basis_seconds += seconds_since(clock);

  Matrix reduced;
  // Reduced solve plus cheap global residual for the current basis.
  const auto evaluate = [&](StageRecord& record) {
    krylov::SolveReport solve_report;
    auto start = Clock::now();
    reduced = solve_reduced_sg(builder.basis(), system.gmats(), config.krylov, &solve_report);
    report.solve_seconds += seconds_since(start);
    start = Clock::now();
    const double relres = global_residual(system, builder.basis(), reduced);
    report.residual_seconds += seconds_since(start);
    ++report.residual_evaluations;
    record.r = static_cast<int>(builder.basis().size());
    record.relres = relres;
    record.krylov_iterations = solve_report.iterations;
    return relres;
  };

  int st = 1;
  StageRecord first;
  double res = 0.0;
  try {
    res = evaluate(first);
  } catch (const std::runtime_error& err) {
    report.failure = err.what();
    return report;
  }
  int r1 = 1;
  double h1 = std::log10(res);
  first.st = st;
  report.stages.push_back(first);

  bool exhausted = false;
  while (builder.basis().size() < config.nmax && res > config.tol && !exhausted) {
    clock = Clock::now();
    for (int k = 0; builder.basis().size() < config.nmax && k < st * config.ns; ++k) {
      const auto step = builder.step();
      if (!step) {
        exhausted = true;
        break;
      }
      if (!step->added) ++report.deflations;
    }
    report.basis_seconds += seconds_since(clock);

    StageRecord record;
    try {
      res = evaluate(record);
    } catch (const std::runtime_error& err) {
      report.failure = err.what();
      break;
    }
    const int r2 = record.r;
    const double h2 = std::log10(res);
    if (res > config.tol) {
      const int predicted = secant_predict(r1, h1, r2, h2, config.tol, config.ns, config.nmax);
      st = (predicted - r2) / config.ns + 1;
      record.predicted_r = predicted;
    }
    r1 = r2;
    h1 = h2;
    record.st = st;
    report.stages.push_back(record);
    log(LogLevel::Info, "rbsgm: r=" + std::to_string(r2) + " relres=" + std::to_string(res));
  }
  if (exhausted && res > config.tol && report.failure.empty()) report.failure = "training set exhausted";

  const rb::ReducedBasis& basis = builder.basis();
  report.converged = res <= config.tol;
  report.final_relres = res;
  report.final_r = static_cast<int>(basis.size());
  report.selected_indices = basis.selected_indices();
  report.selected_samples = basis.selected();
  report.skipped_singular = builder.skipped_singular();
  if (reduced.rows() == basis.size()) {
    report.reduced_coefficients = reduced;
    report.coefficients = basis.q() * reduced;
  }
  return report;
}

}  // namespace rbsgm
