#include "wpmec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wpmec {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameters(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void UserParams::validate() const {
  require(std::isfinite(task_bits) && task_bits >= 0.0, "task_bits must be >= 0");
  require(std::isfinite(cycles_per_bit) && cycles_per_bit >= 1.0, "cycles_per_bit must be >= 1");
  require(finite_positive(capacitance), "capacitance must be > 0");
  require(finite_positive(circuit_power), "circuit_power must be > 0");
  require(max_frequency > 0.0, "max_frequency must be > 0");
  require(finite_positive(distance), "distance must be > 0");
}

void SystemParams::validate() const {
  require(antennas >= 1, "antennas must be >= 1");
  require(!users.empty(), "at least one user is required");
  require(finite_positive(block_length), "block_length must be > 0");
  require(finite_positive(bandwidth), "bandwidth must be > 0");
  require(finite_positive(noise_power), "noise_power must be > 0");
  require(eh_efficiency > 0.0 && eh_efficiency <= 1.0, "eh_efficiency must lie in (0, 1]");
  require(finite_positive(energy_per_bit), "energy_per_bit must be > 0");
  require(capacity_gap == 1.0, "capacity_gap is fixed to 1");
  for (const auto& u : users) u.validate();
}

SystemParams SystemParams::homogeneous(std::size_t num_users, double block_length, double task_bits) {
  SystemParams p;
  p.block_length = block_length;
  UserParams u;
  u.task_bits = task_bits;
  p.users.assign(num_users, u);
  return p;
}

ChannelSet::ChannelSet(std::vector<ComplexVector> downlink, std::vector<ComplexVector> uplink)
    : downlink_(std::move(downlink)), uplink_(std::move(uplink)) {
  if (downlink_.size() != uplink_.size())
    throw InvalidParameters("ChannelSet: downlink and uplink user counts differ");
  for (std::size_t i = 0; i < downlink_.size(); ++i) {
    if (downlink_[i].dim() == 0 || downlink_[i].dim() != downlink_.front().dim() ||
        uplink_[i].dim() != downlink_.front().dim())
      throw InvalidParameters("ChannelSet: inconsistent antenna dimension");
    if (!downlink_[i].all_finite() || !uplink_[i].all_finite())
      throw InvalidParameters("ChannelSet: non-finite channel entry");
    downlink_outer_.push_back(outer(downlink_[i]));
    downlink_gain_.push_back(downlink_[i].norm_squared());
    uplink_gain_.push_back(uplink_[i].norm_squared());
  }
}

void ChannelSet::validate(const SystemParams& params) const {
  require(num_users() == params.num_users(), "channel user count does not match parameters");
  require(antennas() == params.antennas, "channel dimension does not match antenna count");
  for (double g : uplink_gain_) require(g > 0.0, "every uplink gain must be positive");
}

double beta(double rate, double noise_power, double bandwidth) {
  return noise_power * std::expm1(std::log(2.0) * rate / bandwidth);
}

double beta_prime(double rate, double noise_power, double bandwidth) {
  return noise_power * std::log(2.0) / bandwidth * std::exp2(rate / bandwidth);
}

double harvested_energy(const HermitianMatrix& covariance, const HermitianMatrix& downlink_outer,
                        double block_length, double eh_efficiency) {
  return block_length * eh_efficiency * covariance.trace_product(downlink_outer);
}

double offload_energy(double time, double bits, double uplink_gain, double circuit_power,
                      double noise_power, double bandwidth) {
  if (bits > 0.0 && time <= 0.0) return kInfeasibleEnergy;
  double transmit = 0.0;
  if (bits > 0.0 && time > 0.0) transmit = time / uplink_gain * beta(bits / time, noise_power, bandwidth);
  return transmit + circuit_power * std::max(time, 0.0);
}

LocalComputing local_energy(double offloaded_bits, const UserParams& user, double block_length) {
  const double local_bits = std::max(user.task_bits - offloaded_bits, 0.0);
  const double cycles = user.cycles_per_bit * local_bits;
  LocalComputing out;
  out.frequency = cycles / block_length;
  out.energy = user.capacitance * cycles * out.frequency * out.frequency;
  out.within_max_frequency = out.frequency <= user.max_frequency * (1.0 + 1e-12);
  return out;
}

double min_offloaded_bits(const UserParams& user, double block_length) {
  if (!std::isfinite(user.max_frequency)) return 0.0;
  return std::max(0.0, user.task_bits - block_length * user.max_frequency / user.cycles_per_bit);
}

double ap_energy(const HermitianMatrix& covariance, std::span<const double> offloaded,
                 double block_length, double energy_per_bit) {
  return block_length * covariance.trace() +
         energy_per_bit * std::accumulate(offloaded.begin(), offloaded.end(), 0.0);
}

double required_energy(const UserParams& user, const SystemParams& params, double uplink_gain,
                       double time, double bits) {
  return local_energy(bits, user, params.block_length).energy +
         offload_energy(time, bits, uplink_gain, user.circuit_power, params.noise_power, params.bandwidth);
}

Allocation make_allocation(HermitianMatrix covariance, std::vector<double> time,
                           std::vector<double> offloaded, const SystemParams& params,
                           const ChannelSet& channels) {
  const std::size_t k = params.num_users();
  if (time.size() != k || offloaded.size() != k)
    throw InvalidParameters("make_allocation: per-user vectors must have K entries");
  Allocation a;
  a.covariance = std::move(covariance);
  a.time = std::move(time);
  a.offloaded = std::move(offloaded);
  a.frequency.resize(k);
  a.energy.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = params.users[i];
    const auto loc = local_energy(a.offloaded[i], u, params.block_length);
    a.frequency[i] = loc.frequency;
    a.energy[i].local = loc.energy;
    a.energy[i].offload = offload_energy(a.time[i], a.offloaded[i], channels.uplink_gain(i),
                                         u.circuit_power, params.noise_power, params.bandwidth);
    a.energy[i].harvested = harvested_energy(a.covariance, channels.downlink_outer(i),
                                             params.block_length, params.eh_efficiency);
  }
  a.objective = ap_energy(a.covariance, a.offloaded, params.block_length, params.energy_per_bit);
  return a;
}

double FeasibilityReport::max_violation() const {
  double m = std::max(time_budget, covariance_psd);
  for (const auto* v : {&latency, &energy_harvest, &bits_bounds, &time_bounds, &frequency_bounds})
    for (double x : *v) m = std::max(m, x);
  return m;
}

FeasibilityReport check_feasible(const Allocation& alloc, const SystemParams& params,
                                 const ChannelSet& channels) {
  const std::size_t k = params.num_users();
  if (alloc.time.size() != k || alloc.offloaded.size() != k || alloc.frequency.size() != k ||
      alloc.covariance.dim() != params.antennas)
    throw InvalidParameters("check_feasible: allocation dimensions do not match parameters");

  FeasibilityReport r;
  r.latency.resize(k);
  r.energy_harvest.resize(k);
  r.bits_bounds.resize(k);
  r.time_bounds.resize(k);
  r.frequency_bounds.resize(k);
  double total_time = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = params.users[i];
    const double l = alloc.offloaded[i];
    const double t = alloc.time[i];
    const double f = alloc.frequency[i];
    const double cycles = u.cycles_per_bit * std::max(u.task_bits - l, 0.0);

    if (cycles == 0.0)
      r.latency[i] = -params.block_length;
    else if (f <= 0.0)
      r.latency[i] = kInfeasibleEnergy;
    else
      r.latency[i] = cycles / f - params.block_length;

    const double e_loc = u.capacitance * cycles * f * f;
    const double e_off = offload_energy(t, l, channels.uplink_gain(i), u.circuit_power,
                                        params.noise_power, params.bandwidth);
    if (!std::isfinite(e_off)) r.infinite_energy = true;
    const double e_h = harvested_energy(alloc.covariance, channels.downlink_outer(i),
                                        params.block_length, params.eh_efficiency);
    r.energy_harvest[i] = e_loc + e_off - e_h;
    r.bits_bounds[i] = std::max(-l, l - u.task_bits);
    r.time_bounds[i] = -t;
    r.frequency_bounds[i] = std::max(-f, f - u.max_frequency);
    total_time += t;
  }
  if (std::any_of(r.latency.begin(), r.latency.end(), [](double x) { return std::isinf(x); }))
    r.infinite_energy = true;
  r.time_budget = total_time - params.block_length;
  r.covariance_psd = alloc.covariance.dim() == 0 ? 0.0 : -min_eigpair(alloc.covariance).value;
  return r;
}

}  // namespace wpmec
