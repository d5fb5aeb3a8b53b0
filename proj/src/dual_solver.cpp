#include "wpmec/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wpmec {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::degenerate: return "degenerate";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::tolerance: return "tolerance";
  }
  return "unknown";
}

const char* to_string(CutKind k) {
  switch (k) {
    case CutKind::objective: return "objective";
    case CutKind::psd_constraint: return "psd";
    case CutKind::nonnegativity: return "nonneg";
  }
  return "unknown";
}

EllipsoidState EllipsoidState::ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("EllipsoidState::ball: radius must be finite and positive");
  EllipsoidState e;
  const std::size_t n = center.size();
  e.center = std::move(center);
  e.shape.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e.shape[i * n + i] = radius * radius;
  return e;
}

double EllipsoidState::width(std::span<const double> g) const {
  const std::size_t n = dim();
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += shape[i * n + j] * g[j];
    q += g[i] * row;
  }
  return std::sqrt(std::max(q, 0.0));
}

double EllipsoidState::log_det() const {
  const std::size_t n = dim();
  std::vector<double> l(shape);
  double out = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = l[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) throw DegenerateGeometry("log_det: shape matrix is not positive definite");
    d = std::sqrt(d);
    l[j * n + j] = d;
    out += 2.0 * std::log(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = l[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / d;
    }
  }
  return out;
}

EllipsoidState ellipsoid_step(const EllipsoidState& state, const Cut& cut) {
  const std::size_t n = state.dim();
  if (cut.normal.size() != n) throw std::invalid_argument("ellipsoid_step: cut dimension mismatch");
  const auto& a = state.shape;

  std::vector<double> ag(n, 0.0);
  double gag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ag[i] += a[i * n + j] * cut.normal[j];
    gag += cut.normal[i] * ag[i];
  }
  if (!(gag > 0.0) || !std::isfinite(gag)) throw DegenerateGeometry("ellipsoid_step: gᵀAg is not positive");
  const double root = std::sqrt(gag);
  double depth = cut.offset / root;
  if (depth >= 1.0) throw DegenerateGeometry("ellipsoid_step: cut excludes the whole ellipsoid");
  depth = std::clamp(depth, 0.0, 0.9);

  EllipsoidState next;
  next.iteration = state.iteration + 1;
  next.center = state.center;

  if (n == 1) {
    const double half = std::sqrt(a[0]);
    double lo = state.center[0] - half;
    double hi = state.center[0] + half;
    const double edge = state.center[0] - depth * half * (cut.normal[0] > 0.0 ? 1.0 : -1.0);
    if (cut.normal[0] > 0.0) hi = std::min(hi, edge);
    else lo = std::max(lo, edge);
    next.center[0] = 0.5 * (lo + hi);
    next.shape = {0.25 * (hi - lo) * (hi - lo)};
    if (!(next.shape[0] > 0.0)) throw DegenerateGeometry("ellipsoid_step: interval collapsed");
    return next;
  }

  const double nd = static_cast<double>(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = ag[i] / root;
  const double step = (1.0 + nd * depth) / (nd + 1.0);
  for (std::size_t i = 0; i < n; ++i) next.center[i] -= step * b[i];

  const double scale = nd * nd * (1.0 - depth * depth) / (nd * nd - 1.0);
  const double rank1 = 2.0 * (1.0 + nd * depth) / ((nd + 1.0) * (1.0 + depth));
  next.shape.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double sym = 0.5 * (a[i * n + j] + a[j * n + i]);
      const double v = scale * (sym - rank1 * b[i] * b[j]);
      next.shape[i * n + j] = v;
      next.shape[j * n + i] = v;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!(next.shape[i * n + i] > 0.0)) throw DegenerateGeometry("ellipsoid_step: shape lost definiteness");
  return next;
}

JointDecomposition::JointDecomposition(const SystemParams& params, const ChannelSet& channels)
    : params_(params), channels_(channels) {
  channels_.validate(params_);
}

namespace {

// λ_i below this fraction of max λ is treated as exactly zero.
constexpr double kLambdaFloor = 1e-12;

double lambda_cutoff(std::span<const double> lambda) {
  double m = 0.0;
  for (double l : lambda) m = std::max(m, l);
  return kLambdaFloor * m;
}

}  // namespace

DualFunctionValue dual_function(const DualPoint& p, const SystemParams& params,
                                const ChannelSet& channels) {
  const std::size_t k = params.num_users();
  if (p.lambda.size() != k) throw std::invalid_argument("dual_function: lambda has wrong size");
  DualFunctionValue out;
  out.value = -p.mu * params.block_length;
  out.users.resize(k);
  const double cutoff = lambda_cutoff(p.lambda);
  for (std::size_t i = 0; i < k; ++i) {
    const double li = p.lambda[i] <= cutoff ? 0.0 : p.lambda[i];
    out.users[i] = user_subproblem(li, p.mu, params.users[i], channels.uplink_gain(i), params);
    out.value += out.users[i].value;
  }
  return out;
}

std::vector<double> objective_subgradient(std::span<const UserSubSolution> users,
                                          const SystemParams& params, const ChannelSet&) {
  std::vector<double> g(users.size() + 1);
  double time = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    g[i] = users[i].energy;
    time += users[i].time;
  }
  g.back() = time - params.block_length;
  return g;
}

PsdCut psd_constraint_cut(std::span<const double> lambda, const ChannelSet& channels,
                          double eh_efficiency) {
  const std::size_t n = channels.antennas();
  HermitianMatrix f = HermitianMatrix::identity(n);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    if (lambda[i] != 0.0) f.add_outer(channels.downlink(i), -eh_efficiency * lambda[i]);
  const auto pair = min_eigpair(f);
  PsdCut cut;
  cut.pi = pair.value;
  cut.g.assign(lambda.size() + 1, 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    cut.g[i] = eh_efficiency * std::norm(inner(channels.downlink(i), pair.vector));
  return cut;
}

DualEvaluation JointDecomposition::evaluate(const DualPoint& p) const {
  auto f = dual_function(p, params_, channels_);
  DualEvaluation e;
  e.value = f.value;
  e.energy.resize(f.users.size());
  for (std::size_t i = 0; i < f.users.size(); ++i) {
    e.energy[i] = f.users[i].energy;
    e.time_used += f.users[i].time;
  }
  e.users = std::move(f.users);
  return e;
}

LambdaConstraint JointDecomposition::lambda_constraint(std::span<const double> lambda) const {
  auto cut = psd_constraint_cut(lambda, channels_, params_.eh_efficiency);
  cut.g.pop_back();
  return {cut.pi, std::move(cut.g)};
}

std::vector<double> JointDecomposition::lambda_bounds() const {
  std::vector<double> b(num_users());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double h = channels_.downlink_gain(i);
    b[i] = h > 0.0 ? 1.0 / (params_.eh_efficiency * h) : std::numeric_limits<double>::infinity();
  }
  return b;
}

DualPoint JointDecomposition::initial_center() const {
  const auto bounds = lambda_bounds();
  DualPoint p = DualPoint::zero(num_users());
  double min_gain = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < num_users(); ++i) {
    if (!is_active(i)) continue;
    p.lambda[i] = 0.5 * bounds[i];
    min_gain = std::min(min_gain, channels_.uplink_gain(i));
  }
  if (std::isfinite(min_gain)) p.mu = params_.noise_power / min_gain;
  return p;
}

namespace {

struct Layout {
  std::vector<std::size_t> active;
  bool time = false;
  std::size_t dim() const { return active.size() + (time ? 1 : 0); }
};

DualPoint expand(const Layout& lay, std::span<const double> z, std::size_t k) {
  DualPoint p = DualPoint::zero(k);
  for (std::size_t j = 0; j < lay.active.size(); ++j) p.lambda[lay.active[j]] = z[j];
  if (lay.time) p.mu = z[lay.active.size()];
  return p;
}

std::vector<double> reduce(const Layout& lay, const DualPoint& p) {
  std::vector<double> z(lay.dim());
  for (std::size_t j = 0; j < lay.active.size(); ++j) z[j] = p.lambda[lay.active[j]];
  if (lay.time) z[lay.active.size()] = p.mu;
  return z;
}

}  // namespace

DualResult solve_dual(const DualDecomposition& problem, const DualSolverOptions& options) {
  const std::size_t k = problem.num_users();
  Layout lay;
  for (std::size_t i = 0; i < k; ++i)
    if (problem.is_active(i)) lay.active.push_back(i);
  lay.time = problem.has_time_budget() && !lay.active.empty();
  const std::size_t n = lay.dim();

  DualResult best;
  best.point = DualPoint::zero(k);
  best.evaluation = problem.evaluate(best.point);
  best.value = best.evaluation.value;
  if (n == 0) return best;
  if (!std::isfinite(best.value)) best.value = -std::numeric_limits<double>::infinity();

  const auto bounds = problem.lambda_bounds();
  double radius = 0.0;
  for (std::size_t i : lay.active) {
    if (!std::isfinite(bounds[i]))
      throw InfeasibleProblem("solve_dual: a user with a task has no downlink channel");
    radius = std::max(radius, bounds[i]);
  }
  const auto c0 = reduce(lay, problem.initial_center());
  if (lay.time) radius = std::max(radius, c0.back());
  radius *= 4.0;

  const std::size_t max_iter = options.max_iter > 0 ? options.max_iter : 500 * n * n;
  std::vector<double> best_z(n, 0.0);
  std::size_t total_iter = 0;

  for (int attempt = 0;; ++attempt) {
    auto state = EllipsoidState::ball(c0, radius);
    SolveStatus status = SolveStatus::iteration_limit;
    for (std::size_t it = 0; it < max_iter; ++it, ++total_iter) {
      const auto& z = state.center;
      Cut cut;
      cut.normal.assign(n, 0.0);
      TraceEntry entry{total_iter, std::numeric_limits<double>::quiet_NaN(), 0.0, CutKind::nonnegativity};

      const auto neg = std::min_element(z.begin(), z.end());
      if (*neg < 0.0) {
        const auto j = static_cast<std::size_t>(neg - z.begin());
        cut.kind = CutKind::nonnegativity;
        cut.normal[j] = -1.0;
        cut.offset = -*neg;
      } else {
        const DualPoint p = expand(lay, z, k);
        const auto lc = problem.lambda_constraint(p.lambda);
        entry.pi = lc.value;
        if (lc.value < -options.psd_tol) {
          cut.kind = CutKind::psd_constraint;
          for (std::size_t j = 0; j < lay.active.size(); ++j) cut.normal[j] = lc.gradient[lay.active[j]];
          cut.offset = -lc.value;
        } else {
          auto ev = problem.evaluate(p);
          std::size_t blocked = n;
          for (std::size_t j = 0; j < lay.active.size() && blocked == n; ++j)
            if (!std::isfinite(ev.energy[lay.active[j]])) blocked = j;
          if (blocked < n) {
            // The subproblem needs unbounded energy: only larger λ_i can help.
            cut.kind = CutKind::nonnegativity;
            cut.normal[blocked] = -1.0;
            cut.offset = 0.0;
          } else {
            cut.kind = CutKind::objective;
            entry.phi = ev.value;
            std::vector<double> s(n);
            for (std::size_t j = 0; j < lay.active.size(); ++j) s[j] = ev.energy[lay.active[j]];
            if (lay.time) s.back() = ev.time_used - problem.block_length();
            if (ev.value > best.value) {
              best.value = ev.value;
              best.point = p;
              best.evaluation = std::move(ev);
              best_z = z;
            }
            const double w = state.width(s);
            best.width = w;
            if (w <= options.tol * (1.0 + std::abs(best.value))) {
              status = SolveStatus::converged;
              if (options.record_trace) best.trace.push_back(entry);
              ++total_iter;
              break;
            }
            for (std::size_t j = 0; j < n; ++j) cut.normal[j] = -s[j];
            cut.offset = best.value - entry.phi;
          }
        }
      }
      entry.kind = cut.kind;
      if (options.record_trace) best.trace.push_back(entry);
      try {
        state = ellipsoid_step(state, cut);
      } catch (const DegenerateGeometry&) {
        status = SolveStatus::degenerate;
        ++total_iter;
        break;
      }
    }
    best.status = status;
    best.restarts = attempt;

    double dist2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) dist2 += (best_z[j] - c0[j]) * (best_z[j] - c0[j]);
    if (attempt >= options.max_restarts || std::sqrt(dist2) < 0.99 * radius) break;
    radius *= 2.0;
  }
  best.iterations = total_iter;
  return best;
}

DualResult solve_dual(const SystemParams& params, const ChannelSet& channels,
                      const DualSolverOptions& options) {
  JointDecomposition problem(params, channels);
  return solve_dual(problem, options);
}

}  // namespace wpmec
