// rbsgmkit: run, sweep and oracle-check front end.
//
// Exit codes: 0 converged, 2 stopped at nmax (or any cell unconverged in a
// sweep), 1 configuration error (nothing written), 3 oracle mismatch.

#include "rbsgm/experiment.hpp"
#include "rbsgm/log.hpp"
#include "rbsgm/oracle.hpp"

#include <CLI11.hpp>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct CommonOptions {
  std::string config;
  std::string out = "out";
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Run file (flat key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--threads", opts.threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", opts.seed, "Seed override");
}

void apply_threads(int threads) {
  if (threads <= 0) return;
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
  Eigen::setNbThreads(threads);
}

rbsgm::RunConfig resolve_config(const CommonOptions& opts) {
  rbsgm::RunConfig config = opts.config.empty() ? rbsgm::RunConfig{} : rbsgm::load_config(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  config.validate();
  return config;
}

int cmd_run(const CommonOptions& opts) {
  rbsgm::RunConfig config;
  std::optional<rbsgm::Problem> problem;
  try {
    config = resolve_config(opts);
    problem.emplace(rbsgm::build_problem(config));
  } catch (const rbsgm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const rbsgm::ExperimentResult result = rbsgm::run_experiment(config, *problem);
  rbsgm::write_artifacts(result, *problem, opts.out);
  if (result.rbsgm) {
    std::cerr << "rbsgm: r=" << result.rbsgm->final_r << " relres=" << result.rbsgm->final_relres
              << " residual evaluations=" << result.rbsgm->residual_evaluations
              << (result.rbsgm->converged ? " converged" : " NOT converged") << '\n';
    if (!result.rbsgm->failure.empty()) std::cerr << "rbsgm: " << result.rbsgm->failure << '\n';
  }
  if (result.sgm)
    std::cerr << "sgm: iterations=" << result.sgm->report.iterations
              << (result.sgm->report.converged ? " converged" : " NOT converged") << '\n';
  return result.exit_code;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* axis) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    T value{};
    try {
      if constexpr (std::is_integral_v<T>)
        value = static_cast<T>(std::stoi(item, &used));
      else
        value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw rbsgm::ConfigError(std::string("bad --") + axis + " entry '" + item + "'");
    out.push_back(value);
  }
  if (out.empty()) throw rbsgm::ConfigError(std::string("empty --") + axis + " list");
  return out;
}

int cmd_sweep(const CommonOptions& opts, const std::string& ms_text, const std::string& ns_text,
              const std::string& tols_text) {
  rbsgm::RunConfig config;
  std::vector<int> ms;
  std::vector<int> ns;
  std::vector<double> tols;
  try {
    config = resolve_config(opts);
    ms = ms_text.empty() ? std::vector<int>{config.m} : parse_list<int>(ms_text, "m");
    ns = ns_text.empty() ? std::vector<int>{config.n} : parse_list<int>(ns_text, "n");
    tols = tols_text.empty() ? std::vector<double>{config.tol} : parse_list<double>(tols_text, "tol");
    for (int m : ms)
      for (int n : ns)
        for (double tol : tols) {
          rbsgm::RunConfig cell = config;
          cell.m = m;
          cell.n = n;
          cell.tol = tol;
          cell.validate();
        }
  } catch (const rbsgm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto rows = rbsgm::sweep(config, ms, ns, tols);
  std::filesystem::create_directories(opts.out);
  std::ofstream os(std::filesystem::path(opts.out) / "sweep.csv");
  rbsgm::write_sweep_csv(os, rows);
  bool all = true;
  for (const auto& row : rows) all = all && row.status == "converged";
  std::cerr << "sweep: " << rows.size() << " cells written to " << (std::filesystem::path(opts.out) / "sweep.csv").string()
            << '\n';
  return all ? 0 : 2;
}

int cmd_oracle(std::uint64_t seed) {
  const auto checks = rbsgm::oracle::run_all_checks(seed);
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%s  %-55s  value=%.3e  threshold=%.1e\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.threshold);
    all = all && c.passed;
  }
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced basis stochastic Galerkin solver"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one experiment from a run file");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string ms;
  std::string ns;
  std::string tols;
  auto* sweep = app.add_subcommand("sweep", "Cross product of m, n and tol values");
  add_common(sweep, sweep_opts);
  sweep->add_option("--m", ms, "Comma-separated m values");
  sweep->add_option("--n", ns, "Comma-separated nodes-per-side values");
  sweep->add_option("--tol", tols, "Comma-separated tolerances");

  CommonOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle-check", "Run the small-instance dense oracle suites");
  add_common(oracle, oracle_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (verbose) rbsgm::set_log_level(rbsgm::LogLevel::Info);

  try {
    if (*run) {
      apply_threads(run_opts.threads);
      return cmd_run(run_opts);
    }
    if (*sweep) {
      apply_threads(sweep_opts.threads);
      return cmd_sweep(sweep_opts, ms, ns, tols);
    }
    apply_threads(oracle_opts.threads);
    return cmd_oracle(oracle_opts.seed.value_or(2022));
  } catch (const rbsgm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
