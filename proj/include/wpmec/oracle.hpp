#pragma once

// Brute-force references for cross-checking the solver: a refined grid
// search for one user, a Jensen sampler for the uniform-frequency claim, a
// weak-duality sampler, and an ellipsoid solve of the SDP dual.

#include <cstdint>
#include <span>

#include "wpmec/dual_solver.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

struct OracleResult {
  Allocation allocation;
  double objective = 0.0;
  bool feasible = true;
  std::vector<double> pass_objectives;  // best objective after each pass
};

/// Exhaustive (ℓ, t) grid for K = 1, Q from the rank-one closed form, then
/// `zooms` passes each shrinking the window ×10 around the incumbent.
OracleResult grid_oracle_k1(const SystemParams& params, const ChannelSet& channels,
                            std::size_t resolution = 200, int zooms = 2);

/// min over samples of Σ κ f_n² / (M κ (M/T)²) for random f with Σ 1/f_n ≤ T.
double jensen_sampler(std::size_t cycles, double block_length, double capacitance,
                      std::size_t samples, std::uint64_t seed = 1);

struct WeakDualityCheck {
  bool holds = true;
  double dual_value = 0.0;
  double min_primal = 0.0;  // smallest sampled feasible objective (inf if n = 0)
};

/// Φ(point) ≤ objective for n random feasible allocations.
WeakDualityCheck weak_duality_sampler(const SystemParams& params, const ChannelSet& channels,
                                      const DualPoint& point, std::size_t n, std::uint64_t seed = 1);

/// The SDP dual max Σ ν_i c_i s.t. I − ζ Σ ν_i H_i ⪰ 0, ν ≥ 0, as a dual
/// decomposition: reuses the PSD cut and the ellipsoid method.
class SdpDualDecomposition : public DualDecomposition {
 public:
  SdpDualDecomposition(std::vector<double> requirement, const ChannelSet& channels, double eh_efficiency);

  std::size_t num_users() const override { return requirement_.size(); }
  bool is_active(std::size_t i) const override { return requirement_[i] > 0.0; }
  bool has_time_budget() const override { return false; }
  double block_length() const override { return 1.0; }
  DualEvaluation evaluate(const DualPoint& p) const override;
  LambdaConstraint lambda_constraint(std::span<const double> lambda) const override;
  std::vector<double> lambda_bounds() const override;
  DualPoint initial_center() const override;

 private:
  std::vector<double> requirement_;
  const ChannelSet& channels_;
  double eh_efficiency_;
};

/// Optimal value of the covariance SDP computed from its dual; it does not
/// depend on T once the requirements are fixed.
double sdp_value_by_ellipsoid(std::span<const double> requirement, const ChannelSet& channels,
                              double eh_efficiency, double tol = 1e-9);

}  // namespace wpmec
