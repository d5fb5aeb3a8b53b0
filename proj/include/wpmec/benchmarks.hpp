#pragma once

// The joint design and the five restricted comparison schemes. Every scheme
// returns an allocation that is feasible for the full problem, so its
// objective can only be at or above the joint optimum.

#include <string>
#include <string_view>
#include <vector>

#include "wpmec/dual_solver.hpp"
#include "wpmec/primal_recovery.hpp"

namespace wpmec {

inline constexpr std::string_view kSchemeIds[] = {"joint",    "local_only", "offload_only",
                                                   "isotropic", "separate",   "equal_time"};

bool is_scheme_id(std::string_view id);

struct SchemeResult {
  std::string scheme;
  Allocation allocation;
  double objective = 0.0;
  bool feasible = true;
  SolveStatus status = SolveStatus::converged;
  double dual_value = 0.0;  // lower bound from the scheme's own dual, when it has one
  std::string diagnostics;
};

/// ℓ = 0 for everyone; only WPT is optimized.
SchemeResult local_only(const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options = {});

/// ℓ = R, no local computing; (t, Q) optimized.
SchemeResult offload_only(const SystemParams& params, const ChannelSet& channels,
                          const SolveOptions& options = {});

/// Q = pI; (t, ℓ, p) optimized.
SchemeResult isotropic_wpt(const SystemParams& params, const ChannelSet& channels,
                           const SolveOptions& options = {});

/// Users first minimize their own sum energy under the TDMA budget, then the
/// AP covers whatever that requires.
SchemeResult separate_design(const SystemParams& params, const ChannelSet& channels,
                             const SolveOptions& options = {});

/// t_i = T/K' for the K' users with a task; (ℓ, Q) optimized.
SchemeResult equal_time(const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options = {});

SchemeResult joint_design(const SystemParams& params, const ChannelSet& channels,
                          const SolveOptions& options = {});

/// Dispatch by scheme id; throws std::invalid_argument on an unknown id.
SchemeResult run_scheme(std::string_view id, const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options = {});

/// Decompositions behind the restricted schemes, exposed for testing.
class OffloadOnlyDecomposition : public JointDecomposition {
 public:
  using JointDecomposition::JointDecomposition;
  DualEvaluation evaluate(const DualPoint& p) const override;
};

class IsotropicDecomposition : public JointDecomposition {
 public:
  using JointDecomposition::JointDecomposition;
  LambdaConstraint lambda_constraint(std::span<const double> lambda) const override;
  std::vector<double> lambda_bounds() const override;
};

class EqualTimeDecomposition : public JointDecomposition {
 public:
  EqualTimeDecomposition(const SystemParams& params, const ChannelSet& channels);
  bool has_time_budget() const override { return false; }
  DualEvaluation evaluate(const DualPoint& p) const override;
  double slot() const { return slot_; }

 private:
  double slot_ = 0.0;
};

/// Minimizer over ℓ ∈ [ℓ_min, R] of αℓ + λ c(t, ℓ) at a fixed slot t > 0.
double equal_time_bits(double lambda, double slot, const UserParams& user, double uplink_gain,
                       const SystemParams& params);

}  // namespace wpmec
