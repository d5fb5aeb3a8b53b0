#include "wpmec/primal_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wpmec/subproblem.hpp"

namespace wpmec {

namespace {

HermitianMatrix matrix_sqrt(const HermitianMatrix& q) {
  return hermitian_eig(q).map([](double x) { return std::sqrt(std::max(x, 0.0)); });
}

}  // namespace

SdpSolution solve_wpt_sdp(std::span<const double> requirement, const ChannelSet& channels,
                          double block_length, double eh_efficiency, const SdpOptions& options) {
  const std::size_t k = channels.num_users();
  const std::size_t n = channels.antennas();
  if (requirement.size() != k) throw std::invalid_argument("solve_wpt_sdp: requirement size mismatch");
  const double a = block_length * eh_efficiency;

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = requirement[i];
    if (std::isnan(c)) throw std::invalid_argument("solve_wpt_sdp: NaN requirement");
    if (std::isinf(c)) throw InfeasibleProblem("solve_wpt_sdp: infinite energy requirement");
    if (c <= 0.0) continue;
    if (channels.downlink_gain(i) <= 0.0)
      throw InfeasibleProblem("solve_wpt_sdp: positive requirement on a zero downlink channel");
    idx.push_back(i);
  }

  SdpSolution out;
  out.covariance = HermitianMatrix::zero(n);
  out.multipliers.assign(k, 0.0);
  auto finish = [&] {
    out.slack.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      out.slack[i] = a * out.covariance.quadratic_form(channels.downlink(i)) - requirement[i];
    out.primal_objective = block_length * out.covariance.trace();
    out.dual_objective = 0.0;
    for (std::size_t i = 0; i < k; ++i) out.dual_objective += out.multipliers[i] * requirement[i];
  };
  if (idx.empty()) {
    finish();
    return out;
  }

  const std::size_t p = idx.size();
  std::vector<ComplexVector> h(p);
  std::vector<double> c(p);
  double gamma = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    h[j] = channels.downlink(idx[j]);
    c[j] = requirement[idx[j]];
    gamma = std::max(gamma, 2.0 * c[j] / (a * h[j].norm_squared()));
  }
  HermitianMatrix q = HermitianMatrix::identity(n);
  q *= gamma;
  const double m = static_cast<double>(n + p);
  double tau = m / (block_length * q.trace());

  std::vector<double> s(p);
  auto slacks = [&](const HermitianMatrix& x) {
    for (std::size_t j = 0; j < p; ++j) s[j] = a * x.quadratic_form(h[j]) - c[j];
  };
  slacks(q);

  struct NewtonDirection {
    HermitianMatrix root, y;
    std::vector<ComplexVector> b;
    std::vector<double> v;
    double dec2 = 0.0;
  };
  // Scaled Newton system in X = S Y S, S = Q^{1/2}:
  //   Y + Σ (a/s_j)² (b_jᴴ Y b_j) b_j b_jᴴ = I − τT·Q + Σ (a/s_j) b_j b_jᴴ,  b_j = S h_j.
  auto newton = [&] {
    NewtonDirection nd;
    nd.root = matrix_sqrt(q);
    nd.b.resize(p);
    for (std::size_t j = 0; j < p; ++j) nd.b[j] = nd.root.apply(h[j]);
    HermitianMatrix rhs = q;
    rhs *= -tau * block_length;
    rhs += HermitianMatrix::identity(n);
    for (std::size_t j = 0; j < p; ++j) rhs.add_outer(nd.b[j], a / s[j]);

    std::vector<double> sys(p * p), r(p);
    for (std::size_t i = 0; i < p; ++i) {
      r[i] = rhs.quadratic_form(nd.b[i]);
      for (std::size_t j = 0; j < p; ++j) sys[i * p + j] = std::norm(inner(nd.b[i], nd.b[j]));
      sys[i * p + i] += s[i] * s[i] / (a * a);
    }
    nd.v = solve_spd(std::move(sys), std::move(r));
    nd.y = rhs;
    for (std::size_t j = 0; j < p; ++j) nd.y.add_outer(nd.b[j], -nd.v[j]);
    nd.dec2 = rhs.trace_product(nd.y);
    return nd;
  };

  bool done = false;
  for (int outer = 0; outer < options.max_outer && !done; ++outer) {
    for (int it = 0; it < options.max_newton; ++it) {
      const auto nd = newton();
      ++out.newton_steps;
      if (nd.dec2 <= 1e-12) break;

      const auto eig = hermitian_eig(nd.y);
      double step_max = std::numeric_limits<double>::infinity();
      if (eig.values.front() < 0.0) step_max = -1.0 / eig.values.front();
      for (std::size_t j = 0; j < p; ++j) {
        const double d = a * nd.y.quadratic_form(nd.b[j]);
        if (d < 0.0) step_max = std::min(step_max, -s[j] / d);
      }
      // Damped Newton step. Evaluating the barrier for a line search cancels
      // badly once τ is large, so the step length comes from the decrement alone.
      const double dec = std::sqrt(nd.dec2);
      const double alpha = std::min(dec < 0.25 ? 1.0 : 1.0 / (1.0 + dec), 0.99 * step_max);

      HermitianMatrix x = nd.y.congruence(nd.root);
      x *= alpha;
      q += x;
      slacks(q);
      if (std::any_of(s.begin(), s.end(), [](double v) { return !(v > 0.0); }))
        throw NumericalError("solve_wpt_sdp: lost strict feasibility");
    }
    if (m / tau <= options.tol * block_length * q.trace()) done = true;
    else tau *= 10.0;
  }

  out.covariance = q;
  {
    // Multiplier estimate consistent with one more linearized step.
    const auto nd = newton();
    for (std::size_t j = 0; j < p; ++j)
      out.multipliers[idx[j]] = std::max(0.0, (a / s[j] - nd.v[j]) / (tau * a));
  }
  out.status = done ? SolveStatus::converged : SolveStatus::tolerance;
  finish();
  return out;
}

double KktReport::max_product() const {
  double m = std::abs(time_product);
  for (double x : eh_products) m = std::max(m, std::abs(x));
  return m;
}

KktReport kkt_residuals(const Allocation& alloc, const DualPoint& dual, const SystemParams& params,
                        const ChannelSet& channels) {
  const std::size_t k = params.num_users();
  const double T = params.block_length;
  KktReport r;
  r.eh_slack.resize(k);
  r.eh_products.resize(k);
  r.time_stationarity.resize(k);
  r.bits_stationarity.resize(k);

  double total_time = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = params.users[i];
    const double lam = dual.lambda[i];
    const double g = channels.uplink_gain(i);
    const double t = alloc.time[i];
    const double l = alloc.offloaded[i];
    total_time += t;

    r.eh_slack[i] = alloc.energy[i].residual();
    r.eh_products[i] = lam * r.eh_slack[i];

    const double rate = t > 0.0 ? l / t : 0.0;
    const double dt = lam * (beta_gap(rate, params.noise_power, params.bandwidth) / g + u.circuit_power) + dual.mu;
    r.time_stationarity[i] = t > 0.0 ? dt : std::max(0.0, -dt);

    const double local = std::max(u.task_bits - l, 0.0);
    const double c3 = u.cycles_per_bit * u.cycles_per_bit * u.cycles_per_bit;
    const double dl = params.energy_per_bit - lam * 3.0 * u.capacitance * c3 * local * local / (T * T) +
                      lam * beta_prime(rate, params.noise_power, params.bandwidth) / g;
    const double lmin = min_offloaded_bits(u, T);
    if (u.task_bits <= 0.0) r.bits_stationarity[i] = 0.0;
    else if (l <= lmin) r.bits_stationarity[i] = std::max(0.0, -dl);
    else if (l >= u.task_bits) r.bits_stationarity[i] = std::max(0.0, dl);
    else r.bits_stationarity[i] = dl;
  }
  r.time_slack = T - total_time;
  r.time_product = dual.mu * r.time_slack;
  r.primal_violation = std::max(0.0, check_feasible(alloc, params, channels).max_violation());
  return r;
}

CoveredAllocation cover_requirements(std::vector<double> time, std::vector<double> offloaded,
                                     const SystemParams& params, const ChannelSet& channels,
                                     const SdpOptions& sdp) {
  const std::size_t k = params.num_users();
  CoveredAllocation out;
  const double total = std::accumulate(time.begin(), time.end(), 0.0);
  if (total > params.block_length) {
    const double scale = params.block_length / total;
    for (double& t : time) t *= scale;
    out.time_rescaled = true;
  }
  std::vector<double> need(k);
  for (std::size_t i = 0; i < k; ++i)
    need[i] = required_energy(params.users[i], params, channels.uplink_gain(i), time[i], offloaded[i]);
  out.sdp = solve_wpt_sdp(need, channels, params.block_length, params.eh_efficiency, sdp);
  out.allocation = make_allocation(out.sdp.covariance, std::move(time), std::move(offloaded), params, channels);
  return out;
}

Allocation recover_primal(const DualPoint& dual, const SystemParams& params,
                          const ChannelSet& channels, const SdpOptions& sdp) {
  const auto f = dual_function(dual, params, channels);
  std::vector<double> t, l;
  for (const auto& u : f.users) {
    t.push_back(u.time);
    l.push_back(u.offloaded);
  }
  return cover_requirements(std::move(t), std::move(l), params, channels, sdp).allocation;
}

double relative_gap(double primal, double dual) {
  const double scale = std::max(std::abs(primal), std::abs(dual));
  return scale > 0.0 ? std::abs(primal - dual) / scale : 0.0;
}

SolveReport solve_joint(const SystemParams& params, const ChannelSet& channels,
                        const SolveOptions& options) {
  params.validate();
  channels.validate(params);
  SolveReport rep;
  rep.dual = solve_dual(params, channels, options.dual);
  std::vector<double> t, l;
  for (const auto& u : rep.dual.evaluation.users) {
    t.push_back(u.time);
    l.push_back(u.offloaded);
  }
  auto cov = cover_requirements(std::move(t), std::move(l), params, channels, options.sdp);
  rep.allocation = std::move(cov.allocation);
  rep.sdp = std::move(cov.sdp);
  rep.time_rescaled = cov.time_rescaled;
  rep.primal_objective = rep.allocation.objective;
  rep.dual_value = rep.dual.value;
  rep.relative_gap = relative_gap(rep.primal_objective, rep.dual_value);
  rep.kkt = kkt_residuals(rep.allocation, rep.dual.point, params, channels);
  rep.status = rep.dual.status;
  if (rep.status == SolveStatus::converged &&
      (rep.relative_gap > options.gap_tol || rep.sdp.status != SolveStatus::converged))
    rep.status = SolveStatus::tolerance;
  return rep;
}

}  // namespace wpmec
