#include "wpmec/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wpmec {

double optimal_cpu_frequency(double offloaded, const UserParams& user, double block_length) {
  return user.cycles_per_bit * std::max(user.task_bits - offloaded, 0.0) / block_length;
}

double beta_gap(double rate, double noise_power, double bandwidth) {
  // With u = x ln2 / B: β(x) − xβ′(x) = −σ² ((u − 1)eᵘ + 1).
  const double u = rate * std::numbers::ln2 / bandwidth;
  if (std::abs(u) < 0.05) {
    double term = u * u / 2.0;
    double sum = term;
    for (int k = 3; k <= 12; ++k) {
      term *= u / k;
      sum += (k - 1) * term;
    }
    return -noise_power * sum;
  }
  return -noise_power * ((u - 1.0) * std::exp(u) + 1.0);
}

double inverse_beta_gap(double y, double noise_power, double bandwidth) {
  if (y > 0.0) throw std::domain_error("inverse_beta_gap: y must be <= 0");
  return bandwidth / std::numbers::ln2 * shifted_lambert_w0(-y / noise_power);
}

double offload_rate_star(double lambda, double mu, double uplink_gain, double circuit_power,
                         double noise_power, double bandwidth) {
  if (!(lambda > 0.0)) throw std::invalid_argument("offload_rate_star: lambda must be > 0");
  if (mu < 0.0) throw std::invalid_argument("offload_rate_star: mu must be >= 0");
  // e·(argument of W₀) + 1 = g̃ (μ/λ + p_c) / σ²
  const double q = uplink_gain * (mu / lambda + circuit_power) / noise_power;
  if (!(q > 0.0)) throw std::invalid_argument("offload_rate_star: degenerate input (zero circuit power and mu)");
  return bandwidth / std::numbers::ln2 * shifted_lambert_w0(q);
}

double subproblem_value(double lambda, double mu, const UserParams& user, double uplink_gain,
                        const SystemParams& params, double time, double offloaded) {
  const double c = required_energy(user, params, uplink_gain, time, offloaded);
  double v = params.energy_per_bit * offloaded + mu * time;
  if (lambda > 0.0) v += lambda * c;
  else if (!std::isfinite(c)) v = kInfeasibleEnergy;
  return v;
}

UserSubSolution user_subproblem(double lambda, double mu, const UserParams& user,
                                double uplink_gain, const SystemParams& params) {
  if (lambda < 0.0 || mu < 0.0)
    throw std::invalid_argument("user_subproblem: dual variables must be non-negative");
  const double T = params.block_length;
  const double lmin = min_offloaded_bits(user, T);

  UserSubSolution s;
  if (lambda == 0.0) {
    if (lmin > 0.0) {
      s.offloaded = lmin;
      s.value = params.energy_per_bit * lmin;
      s.energy = kInfeasibleEnergy;
      s.rate = kInfeasibleEnergy;
      return s;
    }
    s.energy = local_energy(0.0, user, T).energy;
    return s;
  }

  s.rate = offload_rate_star(lambda, mu, uplink_gain, user.circuit_power, params.noise_power,
                             params.bandwidth);
  const double c3 = user.cycles_per_bit * user.cycles_per_bit * user.cycles_per_bit;
  const double marginal = params.energy_per_bit / lambda +
                          beta_prime(s.rate, params.noise_power, params.bandwidth) / uplink_gain;
  const double kept = std::sqrt(T * T / (3.0 * user.capacitance * c3) * marginal);
  s.offloaded = std::clamp(user.task_bits - kept, lmin, user.task_bits);
  s.time = s.offloaded > 0.0 ? s.offloaded / s.rate : 0.0;
  s.energy = required_energy(user, params, uplink_gain, s.time, s.offloaded);
  s.value = params.energy_per_bit * s.offloaded + lambda * s.energy + mu * s.time;
  return s;
}

}  // namespace wpmec
