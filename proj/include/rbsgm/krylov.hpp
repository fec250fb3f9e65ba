#pragma once

#include "rbsgm/types.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rbsgm::krylov {

enum class Method { Cg, BiCgStab };

enum class Status {
  Converged,
  MaxIterations,
  Breakdown,  // Bi-CGSTAB rho or omega vanished twice
  NotSpd,     // CG met non-positive curvature
};

std::string_view to_string(Method method);
std::string_view to_string(Status status);
Method parse_method(std::string_view name);

struct KrylovConfig {
  double tol = 1e-8;  // on the true relative residual ||b - A x|| / ||b||
  int maxit = 5000;
  Method method = Method::Cg;

  void validate() const {
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("KrylovConfig: tol must lie in (0,1)");
    if (maxit < 1) throw std::invalid_argument("KrylovConfig: maxit must be >= 1");
  }
};

struct SolveReport {
  int iterations = 0;
  /// True relative residual, entry 0 for the zero initial guess.
  std::vector<double> history;
  bool converged = false;
  Status status = Status::MaxIterations;
  int restarts = 0;
};

template <class Vec>
struct SolveResult {
  Vec x;
  SolveReport report;
};

template <class Vec>
using LinearMap = std::function<Vec(const Vec&)>;

/// Called after every iteration with the iteration number and current iterate.
template <class Vec>
using Observer = std::function<void(int, const Vec&)>;

namespace detail {

template <class Vec>
double dot(const Vec& a, const Vec& b) {
  return a.cwiseProduct(b).sum();
}

template <class Vec>
Vec zeros_like(const Vec& v) {
  return Vec::Zero(v.rows(), v.cols());
}

template <class Vec>
bool trivial_rhs(const Vec& rhs, SolveResult<Vec>& out) {
  if (rhs.norm() != 0.0) return false;
  out.x = zeros_like(rhs);
  out.report.history = {0.0};
  out.report.converged = true;
  out.report.status = Status::Converged;
  return true;
}

}  // namespace detail

/// Preconditioned conjugate gradients from a zero initial guess.
template <class Vec>
SolveResult<Vec> pcg(const LinearMap<Vec>& apply_a, const LinearMap<Vec>& apply_pinv, const Vec& rhs,
                     const KrylovConfig& config, const Observer<Vec>& observer = {}) {
  config.validate();
  SolveResult<Vec> out;
  if (detail::trivial_rhs(rhs, out)) return out;

  const double rhs_norm = rhs.norm();
  Vec x = detail::zeros_like(rhs);
  Vec r = rhs;
  Vec z = apply_pinv(r);
  Vec p = z;
  double rz = detail::dot(r, z);
  out.report.history.push_back(1.0);

  for (int k = 1; k <= config.maxit; ++k) {
    const Vec q = apply_a(p);
    const double curvature = detail::dot(p, q);
    if (!(curvature > 0.0)) {
      out.report.status = Status::NotSpd;
      break;
    }
    const double alpha = rz / curvature;
    x += alpha * p;
    r -= alpha * q;
    out.report.iterations = k;

    const double relres = (rhs - apply_a(x)).norm() / rhs_norm;
    out.report.history.push_back(relres);
    if (observer) observer(k, x);
    if (relres <= config.tol) {
      out.report.converged = true;
      out.report.status = Status::Converged;
      break;
    }

    z = apply_pinv(r);
    const double rz_next = detail::dot(r, z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  out.x = std::move(x);
  return out;
}

/// Right-preconditioned Bi-CGSTAB from a zero initial guess. A breakdown
/// (rho or omega vanishing) restarts once from the current iterate.
template <class Vec>
SolveResult<Vec> bicgstab(const LinearMap<Vec>& apply_a, const LinearMap<Vec>& apply_pinv, const Vec& rhs,
                          const KrylovConfig& config, const Observer<Vec>& observer = {}) {
  config.validate();
  SolveResult<Vec> out;
  if (detail::trivial_rhs(rhs, out)) return out;

  constexpr double kBreakdown = 1e-14;
  const double rhs_norm = rhs.norm();
  Vec x = detail::zeros_like(rhs);
  Vec r = rhs;
  Vec r_hat = r;
  Vec p = detail::zeros_like(rhs);
  Vec v = detail::zeros_like(rhs);
  double rho_prev = 1.0;
  double alpha = 1.0;
  double omega = 1.0;
  bool fresh = true;
  out.report.history.push_back(1.0);

  const auto restart = [&]() {
    if (out.report.restarts > 0) return false;
    ++out.report.restarts;
    r = rhs - apply_a(x);
    r_hat = r;
    fresh = true;
    return true;
  };

  int k = 0;
  while (k < config.maxit) {
    const double rho = detail::dot(r_hat, r);
    if (std::abs(rho) <= kBreakdown * r_hat.norm() * r.norm()) {
      if (restart()) continue;
      out.report.status = Status::Breakdown;
      break;
    }
    if (fresh) {
      p = r;
      fresh = false;
    } else {
      p = r + ((rho / rho_prev) * (alpha / omega)) * (p - omega * v);
    }
    ++k;
    out.report.iterations = k;

    const Vec p_hat = apply_pinv(p);
    v = apply_a(p_hat);
    const double denom = detail::dot(r_hat, v);
    if (std::abs(denom) <= kBreakdown * r_hat.norm() * v.norm() || denom == 0.0) {
      if (restart()) continue;
      out.report.status = Status::Breakdown;
      break;
    }
    alpha = rho / denom;
    Vec s = r - alpha * v;

    if (s.norm() / rhs_norm <= config.tol) {
      Vec candidate = x + alpha * p_hat;
      const double relres = (rhs - apply_a(candidate)).norm() / rhs_norm;
      if (relres <= config.tol) {
        x = std::move(candidate);
        out.report.history.push_back(relres);
        if (observer) observer(k, x);
        out.report.converged = true;
        out.report.status = Status::Converged;
        break;
      }
    }

    const Vec s_hat = apply_pinv(s);
    const Vec t = apply_a(s_hat);
    const double tt = detail::dot(t, t);
    omega = tt > 0.0 ? detail::dot(t, s) / tt : 0.0;
    x += alpha * p_hat + omega * s_hat;
    r = s - omega * t;
    rho_prev = rho;

    const double relres = (rhs - apply_a(x)).norm() / rhs_norm;
    out.report.history.push_back(relres);
    if (observer) observer(k, x);
    if (relres <= config.tol) {
      out.report.converged = true;
      out.report.status = Status::Converged;
      break;
    }
    if (std::abs(omega) <= kBreakdown) {
      if (restart()) continue;
      out.report.status = Status::Breakdown;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

/// Dispatches on `config.method`.
template <class Vec>
SolveResult<Vec> solve(const LinearMap<Vec>& apply_a, const LinearMap<Vec>& apply_pinv, const Vec& rhs,
                       const KrylovConfig& config, const Observer<Vec>& observer = {}) {
  return config.method == Method::Cg ? pcg(apply_a, apply_pinv, rhs, config, observer)
                                     : bicgstab(apply_a, apply_pinv, rhs, config, observer);
}

inline std::string_view to_string(Method method) { return method == Method::Cg ? "cg" : "bicgstab"; }

inline std::string_view to_string(Status status) {
  switch (status) {
    case Status::Converged:
      return "converged";
    case Status::MaxIterations:
      return "max_iterations";
    case Status::Breakdown:
      return "breakdown";
    case Status::NotSpd:
      return "operator_not_spd";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "cg" || name == "pcg") return Method::Cg;
  if (name == "bicgstab") return Method::BiCgStab;
  throw std::invalid_argument("unknown Krylov method '" + std::string(name) + "'");
}

}  // namespace rbsgm::krylov
