#pragma once

// From an optimal dual point back to a primal allocation: closed-form
// (t, ℓ, f), then the energy covariance from a small SDP, then a KKT report.

#include <span>
#include <vector>

#include "wpmec/dual_solver.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

struct SdpOptions {
  double tol = 1e-7;       // stop once the barrier gap m/τ ≤ tol·(T tr Q)
  int max_newton = 60;     // per centering step
  int max_outer = 40;
};

struct SdpSolution {
  HermitianMatrix covariance;
  std::vector<double> multipliers;  // ν_i ≥ 0
  std::vector<double> slack;        // T ζ tr(Q H_i) − c_i
  double primal_objective = 0.0;    // T tr(Q)
  double dual_objective = 0.0;      // Σ ν_i c_i
  SolveStatus status = SolveStatus::converged;
  int newton_steps = 0;
};

/// min T tr(Q) s.t. T ζ tr(Q H_i) ≥ c_i, Q ⪰ 0, by a log-barrier Newton method.
/// Throws InfeasibleProblem when some c_i > 0 meets h_i = 0 or c_i is infinite.
SdpSolution solve_wpt_sdp(std::span<const double> requirement, const ChannelSet& channels,
                          double block_length, double eh_efficiency, const SdpOptions& options = {});

struct KktReport {
  std::vector<double> eh_slack;            // E_i − E_loc − E_offl (J)
  std::vector<double> eh_products;         // λ_i · eh_slack_i
  double time_slack = 0.0;                 // T − Σt
  double time_product = 0.0;               // μ · time_slack
  std::vector<double> time_stationarity;   // ∂L/∂t_i (W), zero or boundary-compatible at optimum
  std::vector<double> bits_stationarity;   // ∂L/∂ℓ_i (J/bit)
  double primal_violation = 0.0;

  double max_product() const;
};

KktReport kkt_residuals(const Allocation& alloc, const DualPoint& dual, const SystemParams& params,
                        const ChannelSet& channels);

/// (t, ℓ) from the subproblem minimizers at `dual`, with the covariance from the SDP.
/// If Σt exceeds T (the dual point is only approximately optimal) every t_i is
/// scaled by T/Σt.
Allocation recover_primal(const DualPoint& dual, const SystemParams& params,
                          const ChannelSet& channels, const SdpOptions& sdp = {});

/// Builds an allocation from decided (t, ℓ): requirements, SDP, bookkeeping.
struct CoveredAllocation {
  Allocation allocation;
  SdpSolution sdp;
  bool time_rescaled = false;
};
CoveredAllocation cover_requirements(std::vector<double> time, std::vector<double> offloaded,
                                     const SystemParams& params, const ChannelSet& channels,
                                     const SdpOptions& sdp = {});

struct SolveOptions {
  DualSolverOptions dual;
  SdpOptions sdp;
  double gap_tol = 1e-4;  // relative duality gap above which the status is `tolerance`
};

struct SolveReport {
  Allocation allocation;
  DualResult dual;
  SdpSolution sdp;
  KktReport kkt;
  double primal_objective = 0.0;
  double dual_value = 0.0;
  double relative_gap = 0.0;  // |primal − dual| / max(|primal|, tiny)
  bool time_rescaled = false;
  SolveStatus status = SolveStatus::converged;
};

SolveReport solve_joint(const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options = {});

/// |p − d| / max(|p|, |d|), zero when both vanish.
double relative_gap(double primal, double dual);

}  // namespace wpmec
