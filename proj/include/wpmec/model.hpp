#pragma once

// Problem data and the per-block energy / rate formulas of the wireless
// powered multiuser MEC system. Units are fixed throughout: seconds, Hz,
// Watts, Joules, bits.

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpmec/numerics.hpp"

namespace wpmec {

class InvalidParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Energy evaluators return this instead of throwing when an operating point
/// is physically impossible (e.g. bits pushed through a zero-length slot).
inline constexpr double kInfeasibleEnergy = std::numeric_limits<double>::infinity();

struct UserParams {
  double task_bits = 1e4;         // R
  double cycles_per_bit = 1e3;    // C
  double capacitance = 1e-28;     // κ
  double circuit_power = 1e-4;    // p_c (W)
  double max_frequency = 1e10;    // f_max (Hz)
  double distance = 5.0;          // d (m)

  void validate() const;
};

struct SystemParams {
  std::size_t antennas = 4;      // N
  double block_length = 0.5;     // T (s)
  double bandwidth = 2e6;        // B (Hz)
  double noise_power = 1e-9;     // σ² (W)
  double eh_efficiency = 0.3;    // ζ
  double energy_per_bit = 1e-4;  // α (J/bit)
  double capacity_gap = 1.0;     // Γ, pinned to 1
  std::vector<UserParams> users;

  std::size_t num_users() const { return users.size(); }
  void validate() const;

  /// Homogeneous setup used by the numerical experiments: N = 4, ζ = 0.3,
  /// C = 10³, κ = 10⁻²⁸, p_c = 10⁻⁴ W, α = 10⁻⁴ J/bit, σ² = 10⁻⁹ W,
  /// B = 2 MHz, every user at 5 m with a 10 kbit task.
  static SystemParams homogeneous(std::size_t num_users, double block_length = 0.5,
                                  double task_bits = 1e4);
};

/// Downlink vectors h_i, uplink vectors g_i, and the derived H_i = h_i h_iᴴ
/// and g̃_i = ‖g_i‖².
class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(std::vector<ComplexVector> downlink, std::vector<ComplexVector> uplink);

  std::size_t num_users() const { return downlink_.size(); }
  std::size_t antennas() const { return downlink_.empty() ? 0 : downlink_.front().dim(); }

  const ComplexVector& downlink(std::size_t i) const { return downlink_[i]; }
  const ComplexVector& uplink(std::size_t i) const { return uplink_[i]; }
  const HermitianMatrix& downlink_outer(std::size_t i) const { return downlink_outer_[i]; }
  double downlink_gain(std::size_t i) const { return downlink_gain_[i]; }  // ‖h_i‖²
  double uplink_gain(std::size_t i) const { return uplink_gain_[i]; }      // g̃_i

  /// Throws InvalidParameters unless dimensions match (N, K) and every g̃_i > 0.
  void validate(const SystemParams& params) const;

 private:
  std::vector<ComplexVector> downlink_;
  std::vector<ComplexVector> uplink_;
  std::vector<HermitianMatrix> downlink_outer_;
  std::vector<double> downlink_gain_;
  std::vector<double> uplink_gain_;
};

struct UserEnergy {
  double local = 0.0;      // E_loc
  double offload = 0.0;    // E_offl
  double harvested = 0.0;  // E_i

  double consumed() const { return local + offload; }
  double residual() const { return harvested - local - offload; }
};

struct Allocation {
  HermitianMatrix covariance;      // Q
  std::vector<double> time;        // t_i
  std::vector<double> offloaded;   // ℓ_i
  std::vector<double> frequency;   // f_i, common to every cycle of user i
  double objective = 0.0;          // T tr(Q) + α Σ ℓ_i
  std::vector<UserEnergy> energy;
};

/// β(x) = σ²(2^{x/B} − 1)
double beta(double rate, double noise_power, double bandwidth);
/// β′(x) = (σ² ln 2 / B) 2^{x/B}
double beta_prime(double rate, double noise_power, double bandwidth);

/// T ζ tr(Q H_i)
double harvested_energy(const HermitianMatrix& covariance, const HermitianMatrix& downlink_outer,
                        double block_length, double eh_efficiency);

/// (t/g̃) β(ℓ/t) + p_c t, with β(ℓ/t) := 0 when ℓ = 0 or t = 0. A zero-length
/// slot carrying bits is reported as kInfeasibleEnergy.
double offload_energy(double time, double bits, double uplink_gain, double circuit_power,
                      double noise_power, double bandwidth);

struct LocalComputing {
  double energy = 0.0;     // κ C³ (R − ℓ)³ / T²
  double frequency = 0.0;  // C (R − ℓ) / T
  bool within_max_frequency = true;
};

LocalComputing local_energy(double offloaded_bits, const UserParams& user, double block_length);

/// Smallest ℓ that keeps the uniform CPU frequency at or below f_max.
double min_offloaded_bits(const UserParams& user, double block_length);

/// T tr(Q) + α Σ ℓ_i
double ap_energy(const HermitianMatrix& covariance, std::span<const double> offloaded,
                 double block_length, double energy_per_bit);

/// Local plus offloading energy user i must harvest for the given (t_i, ℓ_i).
double required_energy(const UserParams& user, const SystemParams& params, double uplink_gain,
                       double time, double bits);

/// Fills frequency (uniform per user), the per-user energy breakdown and the
/// objective from (Q, t, ℓ).
Allocation make_allocation(HermitianMatrix covariance, std::vector<double> time,
                           std::vector<double> offloaded, const SystemParams& params,
                           const ChannelSet& channels);

struct FeasibilityReport {
  // Positive entries are violations in natural units; non-positive means satisfied.
  std::vector<double> latency;          // C(R−ℓ)/f − T   (s)
  std::vector<double> energy_harvest;   // E_loc + E_offl − E_i   (J)
  std::vector<double> bits_bounds;      // max(−ℓ, ℓ − R)   (bits)
  std::vector<double> time_bounds;      // −t   (s)
  std::vector<double> frequency_bounds; // max(−f, f − f_max)   (Hz)
  double time_budget = 0.0;             // Σt − T   (s)
  double covariance_psd = 0.0;          // −λ_min(Q)   (W)
  bool infinite_energy = false;

  double max_violation() const;
  bool feasible(double tol) const { return !infinite_energy && max_violation() <= tol; }
};

FeasibilityReport check_feasible(const Allocation& alloc, const SystemParams& params,
                                 const ChannelSet& channels);

}  // namespace wpmec
