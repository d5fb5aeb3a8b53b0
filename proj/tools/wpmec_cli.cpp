#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wpmec/harness.hpp"

using namespace wpmec;

namespace {

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kTolerance = 4 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<std::string> out;
  std::optional<std::string> schemes;
  std::optional<double> tol;
  std::optional<unsigned> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value config file");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--realizations", realizations, "channel realizations (instances for oracle-check)");
    app->add_option("--out", out, "output path");
    app->add_option("--schemes", schemes, "comma list of scheme ids");
    app->add_option("--tol", tol, "dual solver tolerance");
    app->add_option("--threads", threads, "worker threads, 0 = all cores");
  }

  ExperimentConfig load() const {
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
    if (seed) cfg.seed = *seed;
    if (realizations) cfg.realizations = *realizations;
    if (out) cfg.output = *out;
    if (schemes) set_config_value(cfg, "schemes", *schemes);
    if (tol) cfg.tol = *tol;
    if (threads) cfg.threads = *threads;
    cfg.validate();
    return cfg;
  }
};

SolveOptions options_for(const ExperimentConfig& cfg) {
  SolveOptions o;
  o.dual.tol = cfg.tol;
  return o;
}

void print_allocation(const SchemeResult& r, const SystemParams& p) {
  const auto& a = r.allocation;
  std::printf("%-13s objective %.9g J  status %s", r.scheme.c_str(), r.objective, to_string(r.status));
  if (std::isfinite(r.dual_value)) std::printf("  dual %.9g J", r.dual_value);
  std::printf("\n");
  if (!r.feasible) {
    std::printf("  infeasible: %s\n", r.diagnostics.c_str());
    return;
  }
  std::printf("  %4s %14s %14s %14s %14s %14s\n", "user", "t (s)", "l (bits)", "f (Hz)", "E_i (J)", "residual (J)");
  for (std::size_t i = 0; i < p.num_users(); ++i)
    std::printf("  %4zu %14.6g %14.6g %14.6g %14.6g %14.6g\n", i + 1, a.time[i], a.offloaded[i],
                a.frequency[i], a.energy[i].harvested, a.energy[i].residual());
  const auto eig = hermitian_eig(a.covariance);
  std::printf("  tr(Q) = %.6g W, energy beam powers:", a.covariance.trace());
  for (auto it = eig.values.rbegin(); it != eig.values.rend(); ++it) std::printf(" %.4g", std::max(0.0, *it));
  std::printf("\n");
}

int cmd_solve(const CommonFlags& f, std::size_t realization) {
  const auto cfg = f.load();
  const auto& p = cfg.base;
  const auto seed = realization_seed(cfg.seed, realization);
  const auto ch = gen_channels(seed, p);
  std::printf("K = %zu, N = %zu, T = %g s, seed %llu\n", p.num_users(), p.antennas, p.block_length,
              static_cast<unsigned long long>(seed));
  const auto opts = options_for(cfg);
  const auto rep = solve_joint(p, ch, opts);
  int code = kOk;
  for (const auto& id : cfg.schemes) {
    SchemeResult r;
    if (id == "joint") {
      r = run_scheme("joint", p, ch, opts);
      print_allocation(r, p);
      std::printf("  dual iterations %zu, restarts %d, gap %.3e, max KKT product %.3e, time slack %.3g s\n",
                  rep.dual.iterations, rep.dual.restarts, rep.relative_gap, rep.kkt.max_product(),
                  rep.kkt.time_slack);
    } else {
      r = run_scheme(id, p, ch, opts);
      print_allocation(r, p);
    }
    if (id == "joint" && !r.feasible) code = kInfeasible;
    if (id == "joint" && r.status == SolveStatus::infeasible) code = kInfeasible;
    if (id == "joint" && code == kOk && r.status != SolveStatus::converged) code = kTolerance;
  }
  return code;
}

int cmd_sweep(const CommonFlags& f) {
  const auto cfg = f.load();
  const auto res = run_sweep(cfg);
  std::printf("%-8s %-13s %8s %8s %16s\n", cfg.sweep_var.c_str(), "scheme", "feasible", "flagged", "mean objective");
  std::size_t joint_flagged = 0;
  for (const auto& s : res.summary) {
    std::printf("%-8g %-13s %8zu %8zu %16.9g\n", s.sweep_value, s.scheme.c_str(), s.feasible, s.flagged,
                s.mean_objective);
    if (s.scheme == "joint") joint_flagged += s.flagged;
  }
  std::printf("%zu rows -> %s, dominance violations %zu\n", res.rows, cfg.output.c_str(), res.dominance_violations);
  return (res.dominance_violations > 0 || joint_flagged > 0) ? kTolerance : kOk;
}

int cmd_tables(const CommonFlags& f) {
  std::filesystem::path dir = f.out ? *f.out : ".";
  std::filesystem::create_directories(dir);
  int code = kOk;
  for (auto kind : {TableKind::distance, TableKind::task_size}) {
    auto cfg = table_config(kind, f.realizations.value_or(100), f.seed.value_or(1));
    if (f.tol) cfg.tol = *f.tol;
    if (f.threads) cfg.threads = *f.threads;
    const auto path = dir / cfg.output;
    std::ofstream file(path);
    if (!file) throw ConfigError("cannot write " + path.string());
    std::ostringstream csv;
    const auto res = run_tables(cfg, csv);
    file << csv.str();
    std::cout << csv.str() << '\n';
    if (res.flagged > 0) code = kTolerance;
  }
  return code;
}

int cmd_oracle(const CommonFlags& f) {
  SolveOptions opts;
  if (f.tol) opts.dual.tol = *f.tol;
  const auto rows = oracle_cross_check(f.realizations.value_or(20), f.seed.value_or(1), opts);
  int code = kOk;
  for (const auto& c : rows) {
    const bool ok = c.relative <= 1e-3;
    std::printf("%3zu N=%zu T=%.3f R=%.0f d=%.2f  joint %.9g  oracle %.9g  rel %.2e  %s\n", c.index,
                c.params.antennas, c.params.block_length, c.params.users[0].task_bits, c.params.users[0].distance,
                c.joint, c.oracle, c.relative, ok ? "ok" : "MISMATCH");
    if (!ok) code = kTolerance;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint computation offloading and energy beamforming for wireless powered MEC"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::size_t realization = 0;
  auto* solve = app.add_subcommand("solve", "solve one instance and print the allocation");
  auto* sweep = app.add_subcommand("sweep", "parameter sweep over realizations and schemes, CSV out");
  auto* tables = app.add_subcommand("tables", "offloaded bits and residual energy tables (K = 2)");
  auto* oracle = app.add_subcommand("oracle-check", "single-user cross-check against a grid search");
  auto* selftest = app.add_subcommand("selftest", "quick property suite");
  for (auto* c : {solve, sweep, tables, oracle, selftest}) flags.attach(c);
  solve->add_option("--realization", realization, "which channel realization of the seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*solve) return cmd_solve(flags, realization);
    if (*sweep) return cmd_sweep(flags);
    if (*tables) return cmd_tables(flags);
    if (*oracle) return cmd_oracle(flags);
    if (*selftest) return run_selftest(std::cout, flags.seed.value_or(1)) ? kOk : kTolerance;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidParameters& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleProblem& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
