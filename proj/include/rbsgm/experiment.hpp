#pragma once

#include "rbsgm/fem.hpp"
#include "rbsgm/krylov.hpp"
#include "rbsgm/postproc.hpp"
#include "rbsgm/randfield.hpp"
#include "rbsgm/rbsgm.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbsgm {

enum class ProblemKind { Diffusion, Helmholtz };
enum class RunMode { Sgm, Rbsgm, Compare };
enum class SourceKind { Unit, Gaussian };

/// Raised for anything wrong with a run file or its values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment. Defaults follow the diffusion test problem; the
/// Helmholtz-type problem starts from `RunConfig::defaults(Helmholtz)`.
struct RunConfig {
  ProblemKind problem = ProblemKind::Diffusion;
  fem::Rectangle rect{-1.0, 1.0, -1.0, 1.0};
  int n = 33;
  int m = 5;
  int p = 5;
  double mu = 0.2;
  double sigma = 0.1;
  double corr_len = 1.0;
  SourceKind source = SourceKind::Unit;
  double source_width = 32.0;  // exponent scale of the Gaussian source
  double tol = 1e-4;
  int ns = 15;
  int nmax = 500;
  int training_size = 500;
  std::uint64_t seed = 2022;
  RunMode mode = RunMode::Rbsgm;
  krylov::Method krylov = krylov::Method::Cg;
  int maxit = 5000;
  bool reference = true;
  int reference_p = 6;
  double reference_tol = 1e-7;
  /// Diffusion only: reject (true) or merely warn about (false) a coefficient
  /// whose worst-case value over the parameter box is not positive.
  bool positivity_strict = true;

  static RunConfig defaults(ProblemKind kind);
  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Parses the flat `key = value` run-file format ('#' starts a comment).
/// `problem` selects the defaults; unknown keys are errors.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(ProblemKind kind);
std::string to_string(RunMode mode);

/// Mesh, random field and physical operators shared by every gPC order.
struct Problem {
  fem::GridMesh mesh;
  randfield::KlField field;
  fem::PhysicalOperators pops;
  SparseMatrix mass;  // unit mass on interior DOFs
  double field_worst_case = 0.0;
};

/// Assembles the problem. For diffusion, throws ConfigError unless the
/// coefficient is positive for every admissible realization (or only logs a
/// warning when `positivity_strict` is off).
Problem build_problem(const RunConfig& config);
SgSystem make_system(const Problem& problem, int p);

struct ExperimentResult {
  RunConfig config;
  std::optional<RbsgmReport> rbsgm;
  std::optional<FullSgmResult> sgm;
  std::optional<FullSgmResult> reference;
  std::optional<ErrorMetrics> rbsgm_errors;
  std::optional<ErrorMetrics> sgm_errors;
  std::optional<ErrorMetrics> rbsgm_vs_sgm;
  /// Global relative residual of the lifted RBSGM solution by direct matvec.
  std::optional<double> rbsgm_direct_relres;
  SolutionStats stats;
  /// min over nodes and parameter box of the random field.
  double field_worst_case = 0.0;
  double rbsgm_seconds = 0.0;
  int exit_code = 0;
};

ExperimentResult run_experiment(const RunConfig& config, const Problem& problem);
ExperimentResult run_experiment(const RunConfig& config);

nlohmann::json to_json(const ExperimentResult& result);

/// residual_curve.csv: r, relres, predicted_r, st (one row per stage).
void write_residual_curve(std::ostream& os, const RbsgmReport& report);
/// node, x, y, value over every mesh node (boundary nodes are 0).
void write_nodal_csv(std::ostream& os, const fem::GridMesh& mesh, const Vector& dofs);

/// Writes report.json, residual_curve.csv (RBSGM runs), stats_mean.csv and stats_var.csv.
void write_artifacts(const ExperimentResult& result, const Problem& problem, const std::filesystem::path& out_dir);

struct SweepRow {
  int m = 0;
  int n = 0;
  double tol = 0.0;
  std::string status;
  int r = 0;
  int residual_evaluations = 0;
  double rbsgm_seconds = 0.0;
  double sgm_seconds = 0.0;
  double err_m = 0.0;
  double err_v = 0.0;
};

/// Cross product of the axes in (m, n, tol) order; failed cells are kept
/// with their status and the sweep carries on.
std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<int>& ms, const std::vector<int>& ns,
                            const std::vector<double>& tols);
/// Wall-time columns are hardware dependent and not reproducible.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace rbsgm
