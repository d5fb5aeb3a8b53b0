#pragma once

// Monte-Carlo experiment driver: seeded Rayleigh channels, config files,
// parameter sweeps over schemes, CSV output and the two offloading tables.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wpmec/benchmarks.hpp"
#include "wpmec/model.hpp"
#include "wpmec/primal_recovery.hpp"

namespace wpmec {

inline constexpr double kReferenceGain = 6.25e-4;  // θ₀, power gain at 1 m
inline constexpr double kPathLossExponent = 3.0;

/// Realization seed derived from the master seed. Deliberately independent of
/// the sweep index, so every sweep value sees the same fading draws.
std::uint64_t realization_seed(std::uint64_t master, std::size_t realization);

/// h_i, g_i = √(θ₀ d_i^{-γ}) · CN(0, I_N), user i drawn from its own stream of
/// `seed`. Adding users or changing distances leaves the other draws intact.
ChannelSet gen_channels(std::uint64_t seed, std::size_t antennas, std::span<const double> distances,
                        double reference_gain = kReferenceGain, double exponent = kPathLossExponent);

ChannelSet gen_channels(std::uint64_t seed, const SystemParams& params);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  SystemParams base = SystemParams::homogeneous(2);
  std::string sweep_var = "T";  // T | K | R | B | d2 | R2
  std::vector<double> sweep_values = {0.5};
  std::size_t realizations = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> schemes = {"joint"};
  std::string output = "sweep.csv";
  double tol = 1e-10;  // dual solver stopping tolerance
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// `key = value` lines, `#` comments. Unknown keys throw ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Applies one key to `cfg`; the same keys the file format accepts.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Base parameters with the sweep variable set to `value`.
SystemParams apply_sweep(const SystemParams& base, std::string_view var, double value);

struct RealizationRecord {
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  std::vector<SchemeResult> results;
  bool dominance_ok = true;
};

/// Runs the requested schemes on one instance; joint is always solved (first)
/// so dominance can be checked.
RealizationRecord run_point(const SystemParams& params, const ChannelSet& channels,
                            std::span<const std::string> schemes, const SolveOptions& options = {});

struct SchemeSummary {
  double sweep_value = 0.0;
  std::string scheme;
  std::size_t feasible = 0;
  std::size_t flagged = 0;  // rows with status != 0
  double mean_objective = 0.0;
  std::vector<double> mean_offloaded;
  std::vector<double> mean_residual;
};

struct SweepOutcome {
  std::vector<SchemeSummary> summary;
  std::size_t rows = 0;
  std::size_t dominance_violations = 0;
  std::size_t flagged = 0;
  std::size_t infeasible = 0;

  const SchemeSummary* find(double sweep_value, std::string_view scheme) const;
};

/// Streams one CSV row per (sweep value, realization, scheme) to `csv` and
/// returns per-scheme means. `summary_csv`, when given, receives the means.
SweepOutcome run_sweep(const ExperimentConfig& cfg, std::ostream& csv, std::ostream* summary_csv = nullptr);
/// Same, writing to cfg.output and <stem>_summary.csv next to it.
SweepOutcome run_sweep(const ExperimentConfig& cfg);

enum class TableKind { distance, task_size };

/// K = 2, d₁ = 2 m, T = 0.2 s, R₁ = 20 kbit; sweeps d₂ ∈ {2..8} m with
/// R₂ = 20 kbit, or R₂ ∈ {10, 20, 30, 40} kbit with d₂ = 6 m.
ExperimentConfig table_config(TableKind kind, std::size_t realizations = 100, std::uint64_t seed = 1);

/// Joint design only; one row per sweep value with mean ℓ and residual energy per user.
SweepOutcome run_tables(const ExperimentConfig& cfg, std::ostream& csv);

struct OracleComparison {
  std::size_t index = 0;
  SystemParams params;
  double joint = 0.0;
  double oracle = 0.0;
  double relative = 0.0;  // |joint − oracle| / max(|oracle|, 1e-12)
  SolveStatus status = SolveStatus::converged;
};

/// Random single-user instances, N alternating 1 and 2, with T, R and d drawn
/// so that both local and offloading optima occur; joint vs grid_oracle_k1.
std::vector<OracleComparison> oracle_cross_check(std::size_t instances, std::uint64_t seed,
                                                 const SolveOptions& options = {});

/// Quick property suite: one `ok`/`FAIL` line per check on `log`. True if all pass.
bool run_selftest(std::ostream& log, std::uint64_t seed = 1);

}  // namespace wpmec
