#pragma once

// Dual side of the joint design: evaluation of the dual function, its
// supergradient, the PSD feasibility cut, and a deep-cut ellipsoid method
// that maximizes any concave dual exposed through DualDecomposition.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpmec/model.hpp"
#include "wpmec/subproblem.hpp"

namespace wpmec {

enum class SolveStatus {
  converged = 0,
  iteration_limit = 1,
  degenerate = 2,
  infeasible = 3,
  tolerance = 4,
};

const char* to_string(SolveStatus s);

class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DualPoint {
  std::vector<double> lambda;
  double mu = 0.0;

  static DualPoint zero(std::size_t num_users) { return {std::vector<double>(num_users, 0.0), 0.0}; }
};

enum class CutKind { objective, psd_constraint, nonnegativity };

const char* to_string(CutKind k);

/// Keeps the half-space {x : normalᵀ(x − z) + offset ≤ 0}, z being the current
/// center. offset > 0 is a deep cut, offset = 0 a central one.
struct Cut {
  CutKind kind = CutKind::objective;
  std::vector<double> normal;
  double offset = 0.0;
};

struct EllipsoidState {
  std::vector<double> center;
  std::vector<double> shape;  // n×n row-major, symmetric positive definite
  std::size_t iteration = 0;

  std::size_t dim() const { return center.size(); }
  static EllipsoidState ball(std::vector<double> center, double radius);
  /// √(gᵀ A g): half-width of the ellipsoid along g.
  double width(std::span<const double> g) const;
  /// log det A, for volume tracking.
  double log_det() const;
};

/// Minimum-volume ellipsoid containing old ∩ cut. Throws DegenerateGeometry
/// when gᵀAg is not positive or the cut misses the ellipsoid entirely.
EllipsoidState ellipsoid_step(const EllipsoidState& state, const Cut& cut);

struct DualEvaluation {
  double value = 0.0;                  // Φ
  std::vector<double> energy;          // per-user requirement; +inf when λ_i must grow
  double time_used = 0.0;              // Σ t_i
  std::vector<UserSubSolution> users;
};

/// Constraint on λ alone that keeps the dual bounded: feasible iff value ≥ 0,
/// and value(x) ≤ value(λ) − gradientᵀ(x − λ) for all x.
struct LambdaConstraint {
  double value = 1.0;
  std::vector<double> gradient;
};

/// A concave dual over (λ ∈ ℝ₊ᴷ, μ ≥ 0) of some restriction of the design
/// problem. Φ's supergradient is (energy_i, Σt − T) as produced by evaluate.
class DualDecomposition {
 public:
  virtual ~DualDecomposition() = default;

  virtual std::size_t num_users() const = 0;
  /// Inactive users are pinned to λ_i = 0 and left out of the search space.
  virtual bool is_active(std::size_t i) const = 0;
  virtual bool has_time_budget() const = 0;
  virtual double block_length() const = 0;

  virtual DualEvaluation evaluate(const DualPoint& p) const = 0;
  virtual LambdaConstraint lambda_constraint(std::span<const double> lambda) const = 0;
  /// Upper box on λ implied by lambda_constraint.
  virtual std::vector<double> lambda_bounds() const = 0;
  virtual DualPoint initial_center() const = 0;
};

/// Dual of the full joint problem.
class JointDecomposition : public DualDecomposition {
 public:
  JointDecomposition(const SystemParams& params, const ChannelSet& channels);

  std::size_t num_users() const override { return params_.num_users(); }
  bool is_active(std::size_t i) const override { return params_.users[i].task_bits > 0.0; }
  bool has_time_budget() const override { return true; }
  double block_length() const override { return params_.block_length; }

  DualEvaluation evaluate(const DualPoint& p) const override;
  LambdaConstraint lambda_constraint(std::span<const double> lambda) const override;
  std::vector<double> lambda_bounds() const override;
  DualPoint initial_center() const override;

 protected:
  const SystemParams& params_;
  const ChannelSet& channels_;
};

struct DualFunctionValue {
  double value = 0.0;
  std::vector<UserSubSolution> users;
};

/// Φ(λ, μ) = −μT + Σ_i min_{t,ℓ} [αℓ + λ_i c_i(t, ℓ) + μt]; the Q term is zero on S.
DualFunctionValue dual_function(const DualPoint& p, const SystemParams& params,
                                const ChannelSet& channels);

/// (c_1, …, c_K, Σt − T) at the subproblem minimizers.
std::vector<double> objective_subgradient(std::span<const UserSubSolution> users,
                                          const SystemParams& params, const ChannelSet& channels);

struct PsdCut {
  double pi = 1.0;            // λ_min(I − ζ Σ λ_i H_i)
  std::vector<double> g;      // (ζ|h_iᴴv|², …, 0), v the minimizing eigenvector
};

PsdCut psd_constraint_cut(std::span<const double> lambda, const ChannelSet& channels,
                          double eh_efficiency);

struct DualSolverOptions {
  double tol = 1e-10;  // stop when √(sᵀAs) ≤ tol·(1 + |Φ_best|)
  std::size_t max_iter = 0;  // 0: 500 (n+1)², n the number of active users
  int max_restarts = 3;
  double psd_tol = 1e-10;
  bool record_trace = false;
};

struct TraceEntry {
  std::size_t iteration = 0;
  double phi = 0.0;    // NaN unless an objective cut was taken
  double pi = 0.0;
  CutKind kind = CutKind::objective;
};

struct DualResult {
  DualPoint point;
  double value = 0.0;
  DualEvaluation evaluation;  // at `point`
  SolveStatus status = SolveStatus::converged;
  std::size_t iterations = 0;
  int restarts = 0;
  double width = 0.0;  // last √(sᵀAs)
  std::vector<TraceEntry> trace;
};

DualResult solve_dual(const DualDecomposition& problem, const DualSolverOptions& options = {});
DualResult solve_dual(const SystemParams& params, const ChannelSet& channels,
                      const DualSolverOptions& options = {});

}  // namespace wpmec
