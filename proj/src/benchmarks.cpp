#include "wpmec/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wpmec/subproblem.hpp"

namespace wpmec {

bool is_scheme_id(std::string_view id) {
  return std::find(std::begin(kSchemeIds), std::end(kSchemeIds), id) != std::end(kSchemeIds);
}

namespace {

void split(const std::vector<UserSubSolution>& users, std::vector<double>& t, std::vector<double>& l) {
  t.clear();
  l.clear();
  for (const auto& u : users) {
    t.push_back(u.time);
    l.push_back(u.offloaded);
  }
}

// The baselines read their allocation off the dual point alone, so they want
// a tight dual; below about 1e-10 their cuts start to fail numerically.
DualSolverOptions baseline_dual_options(const SolveOptions& options) {
  DualSolverOptions d = options.dual;
  d.tol = std::max(d.tol * 1e-2, 1e-9);
  return d;
}

SolveStatus gap_status(SolveStatus base, double primal, double dual, const SolveOptions& options) {
  if (base == SolveStatus::converged && relative_gap(primal, dual) > options.gap_tol)
    return SolveStatus::tolerance;
  return base;
}

SchemeResult from_cover(std::string name, CoveredAllocation cov) {
  SchemeResult r;
  r.scheme = std::move(name);
  r.allocation = std::move(cov.allocation);
  r.objective = r.allocation.objective;
  r.status = cov.sdp.status;
  if (cov.time_rescaled) r.diagnostics = "time rescaled";
  return r;
}

SchemeResult infeasible(std::string name, std::string why) {
  SchemeResult r;
  r.scheme = std::move(name);
  r.feasible = false;
  r.status = SolveStatus::infeasible;
  r.objective = std::numeric_limits<double>::quiet_NaN();
  r.diagnostics = std::move(why);
  return r;
}

}  // namespace

SchemeResult joint_design(const SystemParams& params, const ChannelSet& channels,
                          const SolveOptions& options) {
  try {
    auto rep = solve_joint(params, channels, options);
    SchemeResult r;
    r.scheme = "joint";
    r.allocation = std::move(rep.allocation);
    r.objective = rep.primal_objective;
    r.dual_value = rep.dual_value;
    r.status = rep.status;
    if (rep.time_rescaled) r.diagnostics = "time rescaled";
    return r;
  } catch (const InfeasibleProblem& e) {
    return infeasible("joint", e.what());
  }
}

SchemeResult local_only(const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options) {
  params.validate();
  channels.validate(params);
  const std::size_t k = params.num_users();
  for (const auto& u : params.users)
    if (min_offloaded_bits(u, params.block_length) > 0.0)
      return infeasible("local_only", "local computing exceeds f_max");
  try {
    auto cov = cover_requirements(std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), params,
                                  channels, options.sdp);
    const double lower = cov.sdp.dual_objective;
    auto r = from_cover("local_only", std::move(cov));
    r.dual_value = lower;
    return r;
  } catch (const InfeasibleProblem& e) {
    return infeasible("local_only", e.what());
  }
}

DualEvaluation OffloadOnlyDecomposition::evaluate(const DualPoint& p) const {
  const std::size_t k = num_users();
  DualEvaluation e;
  e.value = -p.mu * params_.block_length;
  e.energy.assign(k, 0.0);
  e.users.resize(k);
  double cutoff = 0.0;
  for (double l : p.lambda) cutoff = std::max(cutoff, l);
  cutoff *= 1e-12;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = params_.users[i];
    auto& s = e.users[i];
    if (u.task_bits <= 0.0) continue;
    s.offloaded = u.task_bits;
    if (p.lambda[i] <= cutoff) {
      s.energy = kInfeasibleEnergy;
      s.value = params_.energy_per_bit * u.task_bits;
    } else {
      const double g = channels_.uplink_gain(i);
      s.rate = offload_rate_star(p.lambda[i], p.mu, g, u.circuit_power, params_.noise_power,
                                 params_.bandwidth);
      s.time = u.task_bits / s.rate;
      s.energy = offload_energy(s.time, u.task_bits, g, u.circuit_power, params_.noise_power,
                                params_.bandwidth);
      s.value = params_.energy_per_bit * u.task_bits + p.lambda[i] * s.energy + p.mu * s.time;
    }
    e.energy[i] = s.energy;
    e.value += s.value;
    e.time_used += s.time;
  }
  return e;
}

SchemeResult offload_only(const SystemParams& params, const ChannelSet& channels,
                          const SolveOptions& options) {
  params.validate();
  try {
    OffloadOnlyDecomposition problem(params, channels);
    const auto dual = solve_dual(problem, baseline_dual_options(options));
    std::vector<double> t, l;
    split(dual.evaluation.users, t, l);
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = params.users[i].task_bits;
    auto r = from_cover("offload_only", cover_requirements(t, l, params, channels, options.sdp));
    r.dual_value = dual.value;
    if (r.status == SolveStatus::converged) r.status = gap_status(dual.status, r.objective, dual.value, options);
    return r;
  } catch (const InfeasibleProblem& e) {
    return infeasible("offload_only", e.what());
  }
}

LambdaConstraint IsotropicDecomposition::lambda_constraint(std::span<const double> lambda) const {
  // Q = pI stays bounded below iff N − ζ Σ λ_i ‖h_i‖² ≥ 0; normalized by N.
  const double n = static_cast<double>(params_.antennas);
  LambdaConstraint c;
  c.gradient.resize(lambda.size());
  double used = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    c.gradient[i] = params_.eh_efficiency * channels_.downlink_gain(i) / n;
    used += c.gradient[i] * lambda[i];
  }
  c.value = 1.0 - used;
  return c;
}

std::vector<double> IsotropicDecomposition::lambda_bounds() const {
  auto b = JointDecomposition::lambda_bounds();
  for (double& x : b) x *= static_cast<double>(params_.antennas);
  return b;
}

SchemeResult isotropic_wpt(const SystemParams& params, const ChannelSet& channels,
                           const SolveOptions& options) {
  params.validate();
  try {
    IsotropicDecomposition problem(params, channels);
    const auto dual = solve_dual(problem, baseline_dual_options(options));
    std::vector<double> t, l;
    split(dual.evaluation.users, t, l);
    bool rescaled = false;
    const double total = std::accumulate(t.begin(), t.end(), 0.0);
    if (total > params.block_length) {
      for (double& x : t) x *= params.block_length / total;
      rescaled = true;
    }
    const double a = params.block_length * params.eh_efficiency;
    double power = 0.0;
    for (std::size_t i = 0; i < params.num_users(); ++i) {
      const double need = required_energy(params.users[i], params, channels.uplink_gain(i), t[i], l[i]);
      if (need <= 0.0) continue;
      if (!std::isfinite(need) || channels.downlink_gain(i) <= 0.0)
        throw InfeasibleProblem("isotropic: requirement cannot be covered");
      power = std::max(power, need / (a * channels.downlink_gain(i)));
    }
    HermitianMatrix q = HermitianMatrix::identity(params.antennas);
    q *= power;
    SchemeResult r;
    r.scheme = "isotropic";
    r.allocation = make_allocation(std::move(q), std::move(t), std::move(l), params, channels);
    r.objective = r.allocation.objective;
    r.dual_value = dual.value;
    r.status = gap_status(dual.status, r.objective, dual.value, options);
    if (rescaled) r.diagnostics = "time rescaled";
    return r;
  } catch (const InfeasibleProblem& e) {
    return infeasible("isotropic", e.what());
  }
}

SchemeResult separate_design(const SystemParams& params, const ChannelSet& channels,
                             const SolveOptions& options) {
  params.validate();
  channels.validate(params);
  const std::size_t k = params.num_users();
  // Stage 1: Σ_i (E_loc + E_offl) under Σt ≤ T, i.e. unit λ and no α.
  SystemParams user_side = params;
  user_side.energy_per_bit = 0.0;
  auto stage1 = [&](double mu, std::vector<UserSubSolution>& out) {
    double total = 0.0;
    out.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (params.users[i].task_bits <= 0.0) {
        out[i] = {};
        continue;
      }
      out[i] = user_subproblem(1.0, mu, params.users[i], channels.uplink_gain(i), user_side);
      total += out[i].time;
    }
    return total;
  };

  std::vector<UserSubSolution> users;
  double mu = 0.0;
  if (stage1(0.0, users) > params.block_length) {
    double min_gain = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) min_gain = std::min(min_gain, channels.uplink_gain(i));
    double lo = 0.0, hi = params.noise_power / min_gain;
    while (stage1(hi, users) > params.block_length) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) return infeasible("separate", "time budget cannot be met");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (stage1(mid, users) > params.block_length ? lo : hi) = mid;
    }
    mu = hi;
    stage1(mu, users);
  }

  std::vector<double> t, l;
  split(users, t, l);
  try {
    auto r = from_cover("separate", cover_requirements(t, l, params, channels, options.sdp));
    r.dual_value = std::numeric_limits<double>::quiet_NaN();
    r.diagnostics += r.diagnostics.empty() ? "" : "; ";
    r.diagnostics += "stage-1 mu=" + std::to_string(mu);
    return r;
  } catch (const InfeasibleProblem& e) {
    return infeasible("separate", e.what());
  }
}

double equal_time_bits(double lambda, double slot, const UserParams& user, double uplink_gain,
                       const SystemParams& params) {
  const double lmin = min_offloaded_bits(user, params.block_length);
  if (lambda <= 0.0 || user.task_bits <= 0.0) return lmin;
  const double T = params.block_length;
  const double c3 = user.cycles_per_bit * user.cycles_per_bit * user.cycles_per_bit;
  auto slope = [&](double l) {
    const double local = user.task_bits - l;
    return params.energy_per_bit +
           lambda * (beta_prime(l / slot, params.noise_power, params.bandwidth) / uplink_gain -
                     3.0 * user.capacitance * c3 * local * local / (T * T));
  };
  if (slope(lmin) >= 0.0) return lmin;
  if (slope(user.task_bits) <= 0.0) return user.task_bits;
  double lo = lmin, hi = user.task_bits;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * user.task_bits; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EqualTimeDecomposition::EqualTimeDecomposition(const SystemParams& params, const ChannelSet& channels)
    : JointDecomposition(params, channels) {
  std::size_t busy = 0;
  for (const auto& u : params.users) busy += u.task_bits > 0.0 ? 1 : 0;
  slot_ = busy > 0 ? params.block_length / static_cast<double>(busy) : 0.0;
}

DualEvaluation EqualTimeDecomposition::evaluate(const DualPoint& p) const {
  const std::size_t k = num_users();
  DualEvaluation e;
  e.energy.assign(k, 0.0);
  e.users.resize(k);
  double cutoff = 0.0;
  for (double l : p.lambda) cutoff = std::max(cutoff, l);
  cutoff *= 1e-12;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = params_.users[i];
    auto& s = e.users[i];
    if (u.task_bits <= 0.0) continue;
    const double lam = p.lambda[i] <= cutoff ? 0.0 : p.lambda[i];
    const double g = channels_.uplink_gain(i);
    s.time = slot_;
    s.offloaded = equal_time_bits(lam, slot_, u, g, params_);
    s.rate = s.offloaded / slot_;
    s.energy = required_energy(u, params_, g, slot_, s.offloaded);
    s.value = params_.energy_per_bit * s.offloaded + lam * s.energy;
    // A user that offloads nothing keeps its transmitter off and skips the slot.
    if (min_offloaded_bits(u, params_.block_length) <= 0.0) {
      const double idle = local_energy(0.0, u, params_.block_length).energy;
      if (lam * idle <= s.value) s = {0.0, 0.0, 0.0, lam * idle, idle};
    }
    e.energy[i] = s.energy;
    e.value += s.value;
    e.time_used += s.time;
  }
  return e;
}

SchemeResult equal_time(const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options) {
  params.validate();
  try {
    EqualTimeDecomposition problem(params, channels);
    const auto dual = solve_dual(problem, baseline_dual_options(options));
    std::vector<double> t, l;
    split(dual.evaluation.users, t, l);
    auto r = from_cover("equal_time", cover_requirements(t, l, params, channels, options.sdp));
    r.dual_value = dual.value;
    if (r.status == SolveStatus::converged) r.status = gap_status(dual.status, r.objective, dual.value, options);
    return r;
  } catch (const InfeasibleProblem& e) {
    return infeasible("equal_time", e.what());
  }
}

SchemeResult run_scheme(std::string_view id, const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options) {
  if (id == "joint") return joint_design(params, channels, options);
  if (id == "local_only") return local_only(params, channels, options);
  if (id == "offload_only") return offload_only(params, channels, options);
  if (id == "isotropic") return isotropic_wpt(params, channels, options);
  if (id == "separate") return separate_design(params, channels, options);
  if (id == "equal_time") return equal_time(params, channels, options);
  throw std::invalid_argument("unknown scheme id: " + std::string(id));
}

}  // namespace wpmec
