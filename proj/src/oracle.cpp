#include "wpmec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wpmec/rng.hpp"

namespace wpmec {

namespace {

HermitianMatrix rank_one_cover(const ComplexVector& h, double energy, double a) {
  HermitianMatrix q(h.dim());
  if (energy > 0.0) {
    const double g = h.norm_squared();
    q.add_outer(h, energy / (a * g * g));
  }
  return q;
}

struct Window {
  double lo, hi;
  Window zoom(double at, double lower, double upper) const {
    const double w = 0.1 * (hi - lo);
    double a = at - 0.5 * w;
    double b = at + 0.5 * w;
    if (a < lower) b += lower - a, a = lower;
    if (b > upper) a -= b - upper, b = upper;
    return {std::max(a, lower), std::min(b, upper)};
  }
};

}  // namespace

OracleResult grid_oracle_k1(const SystemParams& params, const ChannelSet& channels,
                            std::size_t resolution, int zooms) {
  if (params.num_users() != 1) throw std::invalid_argument("grid_oracle_k1: requires K = 1");
  if (resolution < 2) throw std::invalid_argument("grid_oracle_k1: resolution must be >= 2");
  channels.validate(params);
  const auto& u = params.users[0];
  const double T = params.block_length;
  const double a = T * params.eh_efficiency;
  const double hg = channels.downlink_gain(0);
  const double g = channels.uplink_gain(0);

  auto cost = [&](double t, double l) {
    const double c = required_energy(u, params, g, t, l);
    if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
    if (c > 0.0 && hg <= 0.0) return std::numeric_limits<double>::infinity();
    return (c > 0.0 ? c / (params.eh_efficiency * hg) : 0.0) + params.energy_per_bit * l;
  };

  OracleResult res;
  const double lmin = min_offloaded_bits(u, T);
  double best_t = 0.0, best_l = lmin;
  double best = cost(0.0, lmin);  // pure local computing, no slot
  if (u.task_bits > 0.0) {
    Window wl{lmin, u.task_bits}, wt{0.0, T};
    for (int pass = 0; pass <= zooms; ++pass) {
      for (std::size_t j = 0; j < resolution; ++j) {
        const double l = wl.lo + (wl.hi - wl.lo) * static_cast<double>(j) / static_cast<double>(resolution - 1);
        for (std::size_t k = 0; k < resolution; ++k) {
          const double t = wt.lo + (wt.hi - wt.lo) * static_cast<double>(k + 1) / static_cast<double>(resolution);
          const double v = cost(t, l);
          if (v < best) best = v, best_t = t, best_l = l;
        }
      }
      res.pass_objectives.push_back(best);
      wl = wl.zoom(best_l, lmin, u.task_bits);
      wt = wt.zoom(best_t, 0.0, T);
    }
  }
  if (!std::isfinite(best)) {
    res.feasible = false;
    res.objective = best;
    return res;
  }
  const double c = required_energy(u, params, g, best_t, best_l);
  res.allocation = make_allocation(rank_one_cover(channels.downlink(0), c, a), {best_t}, {best_l}, params, channels);
  res.objective = res.allocation.objective;
  return res;
}

double jensen_sampler(std::size_t cycles, double block_length, double capacitance,
                      std::size_t samples, std::uint64_t seed) {
  if (cycles == 0) throw std::invalid_argument("jensen_sampler: need at least one cycle");
  const double m = static_cast<double>(cycles);
  const double uniform_energy = m * capacitance * (m / block_length) * (m / block_length);
  Rng rng(seed);
  std::vector<double> w(cycles);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    // Execution times per cycle: random split of a (possibly partial) budget.
    double sum = 0.0;
    for (auto& x : w) sum += (x = -std::log(rng.uniform()));
    const double used = (s % 2 == 0) ? block_length : block_length * rng.uniform(0.5, 1.0);
    double energy = 0.0;
    for (double x : w) {
      const double f = sum / (used * x);
      energy += capacitance * f * f;
    }
    worst = std::min(worst, energy / uniform_energy);
  }
  return worst;
}

WeakDualityCheck weak_duality_sampler(const SystemParams& params, const ChannelSet& channels,
                                      const DualPoint& point, std::size_t n, std::uint64_t seed) {
  const auto cut = psd_constraint_cut(point.lambda, channels, params.eh_efficiency);
  if (cut.pi < -1e-9) throw std::invalid_argument("weak_duality_sampler: point is outside S");
  const std::size_t k = params.num_users();
  const double T = params.block_length;
  const double a = T * params.eh_efficiency;

  WeakDualityCheck out;
  out.dual_value = dual_function(point, params, channels).value;
  out.min_primal = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> t(k), l(k), w(k);
    double sum = 0.0;
    for (auto& x : w) sum += (x = -std::log(rng.uniform()));
    const double share = rng.uniform();
    HermitianMatrix q(params.antennas);
    for (std::size_t i = 0; i < k; ++i) {
      const auto& u = params.users[i];
      t[i] = share * T * w[i] / sum;
      l[i] = rng.uniform(min_offloaded_bits(u, T), u.task_bits);
      const double c = required_energy(u, params, channels.uplink_gain(i), t[i], l[i]);
      q += rank_one_cover(channels.downlink(i), c, a);
    }
    const auto alloc = make_allocation(std::move(q), std::move(t), std::move(l), params, channels);
    out.min_primal = std::min(out.min_primal, alloc.objective);
    if (out.dual_value > alloc.objective + 1e-12 * (1.0 + std::abs(alloc.objective))) out.holds = false;
  }
  return out;
}

SdpDualDecomposition::SdpDualDecomposition(std::vector<double> requirement, const ChannelSet& channels,
                                           double eh_efficiency)
    : requirement_(std::move(requirement)), channels_(channels), eh_efficiency_(eh_efficiency) {
  if (requirement_.size() != channels_.num_users())
    throw std::invalid_argument("SdpDualDecomposition: requirement size mismatch");
}

DualEvaluation SdpDualDecomposition::evaluate(const DualPoint& p) const {
  DualEvaluation e;
  e.energy = requirement_;
  e.users.resize(requirement_.size());
  for (std::size_t i = 0; i < requirement_.size(); ++i) e.value += p.lambda[i] * requirement_[i];
  return e;
}

LambdaConstraint SdpDualDecomposition::lambda_constraint(std::span<const double> lambda) const {
  auto cut = psd_constraint_cut(lambda, channels_, eh_efficiency_);
  cut.g.pop_back();
  return {cut.pi, std::move(cut.g)};
}

std::vector<double> SdpDualDecomposition::lambda_bounds() const {
  std::vector<double> b(num_users());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double h = channels_.downlink_gain(i);
    b[i] = h > 0.0 ? 1.0 / (eh_efficiency_ * h) : std::numeric_limits<double>::infinity();
  }
  return b;
}

DualPoint SdpDualDecomposition::initial_center() const {
  const auto b = lambda_bounds();
  DualPoint p = DualPoint::zero(num_users());
  for (std::size_t i = 0; i < b.size(); ++i)
    if (is_active(i)) p.lambda[i] = 0.5 * b[i];
  return p;
}

double sdp_value_by_ellipsoid(std::span<const double> requirement, const ChannelSet& channels,
                              double eh_efficiency, double tol) {
  SdpDualDecomposition problem({requirement.begin(), requirement.end()}, channels, eh_efficiency);
  DualSolverOptions opt;
  opt.tol = tol;
  return solve_dual(problem, opt).value;
}

}  // namespace wpmec
