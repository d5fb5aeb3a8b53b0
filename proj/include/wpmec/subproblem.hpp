#pragma once

// Per-user closed forms: uniform CPU frequency, the Lambert-W offloading
// rate, and the minimizer of each user's term of the partial Lagrangian.

#include "wpmec/model.hpp"

namespace wpmec {

struct UserSubSolution {
  double time = 0.0;       // t*
  double offloaded = 0.0;  // ℓ*
  double rate = 0.0;       // r*
  double value = 0.0;      // α ℓ* + λ c(t*, ℓ*) + μ t*
  double energy = 0.0;     // c(t*, ℓ*): local + offloading energy at the minimizer
};

/// f = C (R − ℓ) / T
double optimal_cpu_frequency(double offloaded, const UserParams& user, double block_length);

/// β(x) − x β′(x), evaluated without the cancellation of the direct form.
double beta_gap(double rate, double noise_power, double bandwidth);

/// x ≥ 0 solving β(x) − x β′(x) = y for y ≤ 0.
double inverse_beta_gap(double y, double noise_power, double bandwidth);

/// r* = (B / ln 2)(W₀((g̃/(σ² e))(μ/λ + p_c) − 1/e) + 1), for λ > 0.
double offload_rate_star(double lambda, double mu, double uplink_gain, double circuit_power,
                         double noise_power, double bandwidth);

/// Objective of the user's subproblem at an arbitrary (t, ℓ).
double subproblem_value(double lambda, double mu, const UserParams& user, double uplink_gain,
                        const SystemParams& params, double time, double offloaded);

/// Minimizes α ℓ + λ [κC³(R−ℓ)³/T² + (t/g̃)β(ℓ/t) + p_c t] + μ t over t ≥ 0 and
/// ℓ ∈ [ℓ_min, R], where ℓ_min keeps the CPU at or below f_max.
///
/// λ = 0 yields (0, 0) when ℓ_min = 0. When ℓ_min > 0 the infimum α ℓ_min is
/// approached only as t → 0, so the returned point has t = 0 and an infinite
/// `energy`; callers treat that as "λ must grow".
UserSubSolution user_subproblem(double lambda, double mu, const UserParams& user,
                                double uplink_gain, const SystemParams& params);

}  // namespace wpmec
