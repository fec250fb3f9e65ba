#include "rbsgm/experiment.hpp"

#include "rbsgm/csv.hpp"
#include "rbsgm/log.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace rbsgm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("'" + key + "': trailing characters in '" + value + "'");
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("'" + key + "': value out of range");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + value + "'");
}

ProblemKind parse_problem(const std::string& value) {
  if (value == "diffusion") return ProblemKind::Diffusion;
  if (value == "helmholtz" || value == "helmholtz-dirichlet") return ProblemKind::Helmholtz;
  throw ConfigError("'problem': expected diffusion or helmholtz-dirichlet, got '" + value + "'");
}

RunMode parse_mode(const std::string& value) {
  if (value == "sgm") return RunMode::Sgm;
  if (value == "rbsgm") return RunMode::Rbsgm;
  if (value == "compare") return RunMode::Compare;
  throw ConfigError("'mode': expected sgm, rbsgm or compare, got '" + value + "'");
}

SourceKind parse_source(const std::string& value) {
  if (value == "unit") return SourceKind::Unit;
  if (value == "gaussian") return SourceKind::Gaussian;
  throw ConfigError("'source': expected unit or gaussian, got '" + value + "'");
}

fem::Rectangle parse_rectangle(const std::string& value) {
  std::vector<double> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(parse_double("rectangle", trim(item)));
  if (parts.size() != 4) throw ConfigError("'rectangle': expected x0, x1, y0, y1");
  return {parts[0], parts[1], parts[2], parts[3]};
}

nlohmann::json solve_report_json(const krylov::SolveReport& report) {
  return {{"iterations", report.iterations},
          {"converged", report.converged},
          {"status", std::string(krylov::to_string(report.status))},
          {"restarts", report.restarts},
          {"final_relres", report.history.empty() ? 1.0 : report.history.back()}};
}

nlohmann::json errors_json(const ErrorMetrics& e) { return {{"err_mean", e.err_mean}, {"err_var", e.err_var}}; }

double ratio_or_nan(double a, double b) { return b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

RunConfig RunConfig::defaults(ProblemKind kind) {
  RunConfig config;
  if (kind == ProblemKind::Helmholtz) {
    config.problem = kind;
    config.rect = {0.0, 1.0, 0.0, 1.0};
    config.mu = 4.0 * 2.0 * std::numbers::pi;
    config.sigma = 0.1 * config.mu;
    config.corr_len = 4.0;
    config.source = SourceKind::Gaussian;
    config.ns = 10;
    config.training_size = 400;
    config.krylov = krylov::Method::BiCgStab;
  }
  return config;
}

void RunConfig::validate() const {
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) throw ConfigError("rectangle must have positive extent");
  if (n < 3) throw ConfigError("n must be >= 3");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (p < 0) throw ConfigError("p must be >= 0");
  if (!(corr_len > 0.0)) throw ConfigError("corr_len must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("tol must lie in (0,1)");
  if (ns < 1) throw ConfigError("ns must be >= 1");
  if (nmax < ns) throw ConfigError("nmax must be >= ns");
  if (training_size < 1) throw ConfigError("training_size must be >= 1");
  if (maxit < 1) throw ConfigError("maxit must be >= 1");
  if (reference && reference_p < 0) throw ConfigError("reference_p must be >= 0");
  if (reference && !(reference_tol > 0.0 && reference_tol < 1.0)) throw ConfigError("reference_tol must lie in (0,1)");
  if (source == SourceKind::Gaussian && !(source_width > 0.0)) throw ConfigError("source_width must be positive");
}

RunConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!seen.emplace(key, lineno).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(value));
  }

  ProblemKind kind = ProblemKind::Diffusion;
  for (const auto& [key, value] : entries)
    if (key == "problem") kind = parse_problem(value);
  RunConfig config = RunConfig::defaults(kind);
  bool sigma_given = false;
  bool mu_given = false;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"problem", [](const std::string&, const std::string&) {}},
      {"rectangle", [&](const std::string&, const std::string& v) { config.rect = parse_rectangle(v); }},
      {"n", [&](const std::string& k, const std::string& v) { config.n = parse_int(k, v); }},
      {"m", [&](const std::string& k, const std::string& v) { config.m = parse_int(k, v); }},
      {"p", [&](const std::string& k, const std::string& v) { config.p = parse_int(k, v); }},
      {"mu", [&](const std::string& k, const std::string& v) { config.mu = parse_double(k, v); mu_given = true; }},
      {"sigma", [&](const std::string& k, const std::string& v) { config.sigma = parse_double(k, v); sigma_given = true; }},
      {"corr_len", [&](const std::string& k, const std::string& v) { config.corr_len = parse_double(k, v); }},
      {"source", [&](const std::string&, const std::string& v) { config.source = parse_source(v); }},
      {"source_width", [&](const std::string& k, const std::string& v) { config.source_width = parse_double(k, v); }},
      {"tol", [&](const std::string& k, const std::string& v) { config.tol = parse_double(k, v); }},
      {"ns", [&](const std::string& k, const std::string& v) { config.ns = parse_int(k, v); }},
      {"nmax", [&](const std::string& k, const std::string& v) { config.nmax = parse_int(k, v); }},
      {"training_size", [&](const std::string& k, const std::string& v) { config.training_size = parse_int(k, v); }},
      {"seed",
       [&](const std::string& k, const std::string& v) {
         const long long s = parse_integer(k, v);
         if (s < 0) throw ConfigError("'seed' must be non-negative");
         config.seed = static_cast<std::uint64_t>(s);
       }},
      {"mode", [&](const std::string&, const std::string& v) { config.mode = parse_mode(v); }},
      {"krylov",
       [&](const std::string&, const std::string& v) {
         try {
           config.krylov = krylov::parse_method(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(std::string("'krylov': ") + e.what());
         }
       }},
      {"maxit", [&](const std::string& k, const std::string& v) { config.maxit = parse_int(k, v); }},
      {"reference", [&](const std::string& k, const std::string& v) { config.reference = parse_bool(k, v); }},
      {"reference_p", [&](const std::string& k, const std::string& v) { config.reference_p = parse_int(k, v); }},
      {"reference_tol", [&](const std::string& k, const std::string& v) { config.reference_tol = parse_double(k, v); }},
      {"positivity_check",
       [&](const std::string&, const std::string& v) {
         if (v == "strict") config.positivity_strict = true;
         else if (v == "warn") config.positivity_strict = false;
         else throw ConfigError("positivity_check must be 'strict' or 'warn', got '" + v + "'");
       }},
  };
  for (const auto& [key, value] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("line " + std::to_string(seen[key]) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  // The Helmholtz-type problem ties the default standard deviation to the mean wavenumber.
  if (kind == ProblemKind::Helmholtz && mu_given && !sigma_given) config.sigma = 0.1 * config.mu;
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_config(in);
}

std::string to_string(ProblemKind kind) { return kind == ProblemKind::Diffusion ? "diffusion" : "helmholtz-dirichlet"; }

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Sgm:
      return "sgm";
    case RunMode::Rbsgm:
      return "rbsgm";
    case RunMode::Compare:
      return "compare";
  }
  return "unknown";
}

Problem build_problem(const RunConfig& config) {
  config.validate();
  fem::GridMesh mesh = fem::build_mesh(config.rect, config.n);
  randfield::KlField field = randfield::kl_2d(config.corr_len, mesh, config.m, config.mu, config.sigma);
  const double worst = randfield::worst_case_minimum(field);

  std::vector<Vector> terms;
  for (int i = 0; i <= config.m; ++i) terms.push_back(field.term(i));

  const double cx = 0.5 * (config.rect.x0 + config.rect.x1);
  const double cy = 0.5 * (config.rect.y0 + config.rect.y1);
  const double width2 = config.source_width * config.source_width;
  const Vector load =
      config.source == SourceKind::Unit
          ? fem::assemble_load(mesh, [](double, double) { return 1.0; })
          : fem::assemble_load(mesh, [&](double x, double y) {
              return std::exp(-width2 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
            });

  fem::PhysicalOperators pops;
  if (config.problem == ProblemKind::Diffusion) {
    if (!(worst > 0.0)) {
      const std::string msg = "diffusion coefficient is not uniformly positive (worst case " + std::to_string(worst) + ")";
      if (config.positivity_strict) throw ConfigError(msg);
      log(LogLevel::Warning, msg);
    }
    pops = fem::assemble_operators(mesh, config.m, terms, {}, load);
  } else {
    std::vector<Vector> unit_diffusion(static_cast<std::size_t>(config.m) + 1, Vector::Zero(mesh.num_nodes()));
    unit_diffusion[0].setOnes();
    pops = fem::assemble_operators(mesh, config.m, unit_diffusion, terms, load);
  }
  SparseMatrix mass = fem::assemble_mass(mesh);
  return Problem{std::move(mesh), std::move(field), std::move(pops), std::move(mass), worst};
}

SgSystem make_system(const Problem& problem, int p) {
  return SgSystem(gpc::StochGalerkinMatrices(gpc::enumerate_indices(problem.pops.m, p)), problem.pops);
}

ExperimentResult run_experiment(const RunConfig& config, const Problem& problem) {
  ExperimentResult result;
  result.config = config;
  result.field_worst_case = problem.field_worst_case;
  krylov::KrylovConfig krylov_config;
  krylov_config.method = config.krylov;
  krylov_config.maxit = config.maxit;
  krylov_config.tol = config.tol;

  const SgSystem system = make_system(problem, config.p);
  bool ok = true;

  if (config.mode == RunMode::Rbsgm || config.mode == RunMode::Compare) {
    const rb::TrainingSet training = rb::make_training_set(config.m, config.training_size, config.seed);
    RbsgmConfig rb_config = RbsgmConfig::with_tolerance(config.tol, config.ns, config.nmax, config.krylov, config.seed);
    rb_config.krylov.maxit = config.maxit;
    const auto start = std::chrono::steady_clock::now();
    result.rbsgm = run_rbsgm(system, training, rb_config);
    result.rbsgm_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ok = ok && result.rbsgm->converged;
    if (result.rbsgm->coefficients.size() > 0) {
      result.rbsgm_direct_relres =
          system.residual_norm(result.rbsgm->coefficients) / system.rhs_matrix().norm();
      result.stats = stats_from_coefficients(result.rbsgm->coefficients);
    }
  }
  if (config.mode == RunMode::Sgm || config.mode == RunMode::Compare) {
    result.sgm = solve_full_sgm(system, krylov_config);
    ok = ok && result.sgm->report.converged;
    if (config.mode == RunMode::Sgm) result.stats = stats_from_coefficients(result.sgm->coefficients);
  }

  if (config.reference) {
    krylov::KrylovConfig ref_config = krylov_config;
    ref_config.tol = config.reference_tol;
    result.reference = solve_full_sgm(make_system(problem, config.reference_p), ref_config);
    if (!result.reference->report.converged) log(LogLevel::Warning, "reference solve did not converge");
    const SolutionStats ref_stats = stats_from_coefficients(result.reference->coefficients);
    if (result.rbsgm && result.rbsgm->coefficients.size() > 0)
      result.rbsgm_errors = relative_errors(stats_from_coefficients(result.rbsgm->coefficients), ref_stats, problem.mass);
    if (result.sgm)
      result.sgm_errors = relative_errors(stats_from_coefficients(result.sgm->coefficients), ref_stats, problem.mass);
  }
  if (result.rbsgm && result.sgm && result.rbsgm->coefficients.size() > 0)
    result.rbsgm_vs_sgm = relative_errors(stats_from_coefficients(result.rbsgm->coefficients),
                                          stats_from_coefficients(result.sgm->coefficients), problem.mass);
  result.exit_code = ok ? 0 : 2;
  return result;
}

ExperimentResult run_experiment(const RunConfig& config) { return run_experiment(config, build_problem(config)); }

nlohmann::json to_json(const ExperimentResult& result) {
  const RunConfig& c = result.config;
  nlohmann::json j;
  j["config"] = {{"problem", to_string(c.problem)},
                 {"rectangle", {c.rect.x0, c.rect.x1, c.rect.y0, c.rect.y1}},
                 {"n", c.n},
                 {"nominal_nh", c.n * c.n},
                 {"interior_dofs", (c.n - 2) * (c.n - 2)},
                 {"m", c.m},
                 {"p", c.p},
                 {"mu", c.mu},
                 {"sigma", c.sigma},
                 {"corr_len", c.corr_len},
                 {"tol", c.tol},
                 {"ns", c.ns},
                 {"nmax", c.nmax},
                 {"training_size", c.training_size},
                 {"seed", c.seed},
                 {"mode", to_string(c.mode)},
                 {"krylov", std::string(krylov::to_string(c.krylov))},
                 {"reference", c.reference},
                 {"reference_p", c.reference_p},
                 {"reference_tol", c.reference_tol},
                 {"positivity_check", c.positivity_strict ? "strict" : "warn"}};
  j["field_worst_case"] = result.field_worst_case;
  j["exit_code"] = result.exit_code;
  j["timing_note"] = "wall-clock seconds are hardware dependent and not reproducible";

  if (result.rbsgm) {
    const RbsgmReport& r = *result.rbsgm;
    nlohmann::json stages = nlohmann::json::array();
    for (const StageRecord& s : r.stages)
      stages.push_back({{"r", s.r},
                        {"relres", s.relres},
                        {"predicted_r", s.predicted_r},
                        {"st", s.st},
                        {"krylov_iterations", s.krylov_iterations}});
    nlohmann::json samples = nlohmann::json::array();
    for (const Vector& xi : r.selected_samples) samples.push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
    j["rbsgm"] = {{"converged", r.converged},
                  {"final_relres", r.final_relres},
                  {"final_r", r.final_r},
                  {"residual_evaluations", r.residual_evaluations},
                  {"stages", stages},
                  {"selected_indices", r.selected_indices},
                  {"selected_samples", samples},
                  {"skipped_singular", r.skipped_singular},
                  {"deflations", r.deflations},
                  {"failure", r.failure},
                  {"seconds", result.rbsgm_seconds},
                  {"basis_seconds", r.basis_seconds},
                  {"reduced_solve_seconds", r.solve_seconds},
                  {"residual_seconds", r.residual_seconds}};
    if (result.rbsgm_direct_relres) j["rbsgm"]["direct_relres"] = *result.rbsgm_direct_relres;
  }
  if (result.sgm) {
    j["sgm"] = solve_report_json(result.sgm->report);
    j["sgm"]["seconds"] = result.sgm->seconds;
  }
  if (result.reference) {
    j["reference"] = solve_report_json(result.reference->report);
    j["reference"]["seconds"] = result.reference->seconds;
  }
  nlohmann::json errors = nlohmann::json::object();
  if (result.rbsgm_errors) errors["rbsgm"] = errors_json(*result.rbsgm_errors);
  if (result.sgm_errors) errors["sgm"] = errors_json(*result.sgm_errors);
  if (result.rbsgm_vs_sgm) errors["rbsgm_vs_sgm"] = errors_json(*result.rbsgm_vs_sgm);
  if (result.rbsgm_errors && result.sgm_errors)
    errors["ratio_rbsgm_over_sgm"] = {
        {"err_mean", ratio_or_nan(result.rbsgm_errors->err_mean, result.sgm_errors->err_mean)},
        {"err_var", ratio_or_nan(result.rbsgm_errors->err_var, result.sgm_errors->err_var)}};
  j["errors"] = errors;
  return j;
}

void write_residual_curve(std::ostream& os, const RbsgmReport& report) {
  csv::write_row(os, {"r", "relres", "predicted_r", "st"});
  for (const StageRecord& s : report.stages)
    csv::write_row(os, {std::to_string(s.r), csv::format_double(s.relres), std::to_string(s.predicted_r),
                        std::to_string(s.st)});
}

void write_nodal_csv(std::ostream& os, const fem::GridMesh& mesh, const Vector& dofs) {
  const Vector nodal = mesh.extend_to_nodes(dofs);
  csv::write_row(os, {"node", "x", "y", "value"});
  for (Index k = 0; k < mesh.num_nodes(); ++k) {
    const auto [x, y] = mesh.node(k);
    csv::write_row(os, {std::to_string(k), csv::format_double(x), csv::format_double(y), csv::format_double(nodal(k))});
  }
}

void write_artifacts(const ExperimentResult& result, const Problem& problem, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto open = [&](const char* name) {
    std::ofstream os(out_dir / name);
    if (!os) throw std::runtime_error("cannot write " + (out_dir / name).string());
    return os;
  };
  {
    auto os = open("report.json");
    os << to_json(result).dump(2) << '\n';
  }
  if (result.rbsgm) {
    auto os = open("residual_curve.csv");
    write_residual_curve(os, *result.rbsgm);
  }
  if (result.stats.mean.size() == problem.mesh.num_dofs()) {
    auto mean = open("stats_mean.csv");
    write_nodal_csv(mean, problem.mesh, result.stats.mean);
    auto var = open("stats_var.csv");
    write_nodal_csv(var, problem.mesh, result.stats.variance);
  }
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<int>& ms, const std::vector<int>& ns,
                            const std::vector<double>& tols) {
  std::vector<SweepRow> rows;
  for (int m : ms) {
    for (int n : ns) {
      for (double tol : tols) {
        SweepRow row;
        row.m = m;
        row.n = n;
        row.tol = tol;
        try {
          RunConfig config = base;
          config.m = m;
          config.n = n;
          config.tol = tol;
          if (config.mode == RunMode::Sgm) config.mode = RunMode::Compare;
          const ExperimentResult result = run_experiment(config);
          row.status = result.exit_code == 0 ? "converged" : "unconverged";
          if (result.rbsgm) {
            row.r = result.rbsgm->final_r;
            row.residual_evaluations = result.rbsgm->residual_evaluations;
            row.rbsgm_seconds = result.rbsgm_seconds;
          }
          if (result.sgm) row.sgm_seconds = result.sgm->seconds;
          const auto& errors = result.rbsgm_errors ? result.rbsgm_errors : result.rbsgm_vs_sgm;
          row.err_m = errors ? errors->err_mean : std::numeric_limits<double>::quiet_NaN();
          row.err_v = errors ? errors->err_var : std::numeric_limits<double>::quiet_NaN();
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
          row.err_m = row.err_v = std::numeric_limits<double>::quiet_NaN();
          log(LogLevel::Warning, "sweep cell m=" + std::to_string(m) + " n=" + std::to_string(n) + " failed: " + e.what());
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  csv::write_row(os, {"m", "n", "tol", "status", "r", "residual_evaluations", "rbsgm_seconds_nonreproducible",
                      "sgm_seconds_nonreproducible", "err_m", "err_v"});
  for (const SweepRow& row : rows) {
    std::string status = row.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    csv::write_row(os, {std::to_string(row.m), std::to_string(row.n), csv::format_double(row.tol), status,
                        std::to_string(row.r), std::to_string(row.residual_evaluations),
                        csv::format_double(row.rbsgm_seconds), csv::format_double(row.sgm_seconds),
                        csv::format_double(row.err_m), csv::format_double(row.err_v)});
  }
}

}  // namespace rbsgm
