#pragma once

// The distributed projected subgradient iteration
//   v_i(k)   = sum_j a_ij(k) x_j(k)
//   x_i(k+1) = P_X(v_i(k) - alpha_k d_i(k)),  d_i(k) in ∂f_i(v_i(k))
// and the run engine that drives it along a graph schedule.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/error.hpp"
#include "dpsub/graph_core.hpp"
#include "dpsub/problem.hpp"
#include "dpsub/random.hpp"
#include "dpsub/schedule.hpp"
#include "dpsub/states.hpp"

namespace dpsub {

// ---------------------------------------------------------------------------
// Stepsizes

class StepsizeSchedule {
 public:
  enum class Kind { PowerLaw, Constant };

  /// alpha_k = (k+1)^{-exponent}
  static StepsizeSchedule power_law(double exponent) {
    if (!(exponent > 0.0)) throw PreconditionError("power-law exponent must be positive");
    return StepsizeSchedule(Kind::PowerLaw, exponent);
  }

  /// Test-only: violates the diminishing-step rule.
  static StepsizeSchedule constant(double value) {
    if (!(value >= 0.0)) throw PreconditionError("constant stepsize must be >= 0");
    return StepsizeSchedule(Kind::Constant, value);
  }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double value(std::size_t k) const {
    if (kind_ == Kind::Constant) return param_;
    return std::pow(static_cast<double>(k) + 1.0, -param_);
  }

  /// sum alpha = inf, sum alpha^2 < inf, non-increasing.
  bool satisfies_step_rule() const noexcept {
    return kind_ == Kind::PowerLaw && param_ > 0.5 && param_ <= 1.0;
  }

 private:
  StepsizeSchedule(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_;
};

inline double stepsize_value(const StepsizeSchedule& s, std::size_t k) { return s.value(k); }

// ---------------------------------------------------------------------------
// One step

inline void check_step_dims(const AgentStates& x, const StochasticMatrix& a,
                            const ObjectiveEnsemble& e) {
  require_same_dim(x.agents(), a.size(), "step: agents vs matrix");
  require_same_dim(x.agents(), e.agents(), "step: agents vs ensemble");
  require_same_dim(x.dimension(), e.dimension(), "step: state dimension");
}

/// v_i = sum_j a_ij x_j, all computed from the same snapshot.
inline AgentStates mix(const AgentStates& x, const StochasticMatrix& a) {
  const std::size_t n = x.agents(), m = x.dimension();
  AgentStates v(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto vi = v[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a(i, j);
      if (w == 0.0) continue;
      const auto xj = x[j];
      for (std::size_t c = 0; c < m; ++c) vi[c] += w * xj[c];
    }
  }
  return v;
}

inline AgentStates step(const AgentStates& x, const StochasticMatrix& a,
                        const ObjectiveEnsemble& ensemble, double alpha) {
  check_step_dims(x, a, ensemble);
  if (!(alpha >= 0.0)) throw PreconditionError("step: alpha must be >= 0");
  AgentStates v = mix(x, a);
  AgentStates out(x.agents(), x.dimension());
  Point buf(x.dimension());
  for (std::size_t i = 0; i < x.agents(); ++i) {
    const Point d = ensemble.function(i).subgradient(v[i]);
    for (std::size_t c = 0; c < buf.size(); ++c) buf[c] = v[i][c] - alpha * d[c];
    const Point p = ensemble.set().project(buf);
    std::copy(p.begin(), p.end(), out[i].begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-step certificates

struct IterateReport {
  double worst_slack = std::numeric_limits<double>::infinity();  ///< min over agents of rhs - lhs
  std::size_t worst_agent = 0;
};

inline constexpr double kIterateSlackTol = 1e-9;
inline constexpr double kDisturbanceTol = 1e-12;

/// Checks, for every agent,
///   |x_i(k+1) - z|^2 <= sum_j a_ij |x_j(k) - z|^2 + alpha^2 L^2 - 2 alpha (f_i(v_i) - f_i(z)).
inline IterateReport verify_iterate_inequality(const AgentStates& before, const AgentStates& after,
                                               const StochasticMatrix& a,
                                               const ObjectiveEnsemble& ensemble, double alpha,
                                               std::span<const double> z) {
  check_step_dims(before, a, ensemble);
  require_same_dim(after.agents(), before.agents(), "iterate inequality");
  require_same_dim(z.size(), ensemble.dimension(), "iterate inequality: z");
  const AgentStates v = mix(before, a);
  const double L = ensemble.bound();
  IterateReport report;
  for (std::size_t i = 0; i < before.agents(); ++i) {
    const double lhs = std::pow(distance(after[i], z), 2);
    double rhs = alpha * alpha * L * L;
    for (std::size_t j = 0; j < before.agents(); ++j)
      if (a(i, j) != 0.0) rhs += a(i, j) * std::pow(distance(before[j], z), 2);
    const auto& f = ensemble.function(i);
    rhs -= 2.0 * alpha * (f.value(v[i]) - f.value(z));
    const double slack = rhs - lhs;
    if (slack < report.worst_slack) {
      report.worst_slack = slack;
      report.worst_agent = i;
    }
  }
  if (report.worst_slack < -kIterateSlackTol)
    throw InequalityViolation(report.worst_agent, report.worst_slack);
  return report;
}

struct DisturbanceReport {
  double max_magnitude = 0.0;  ///< max_i |x_i(k+1) - v_i(k)|
  std::size_t worst_agent = 0;
  double bound = 0.0;          ///< alpha L
};

/// |omega_i| = |x_i(k+1) - v_i(k)| <= alpha L for all i.
inline DisturbanceReport disturbance_bound_check(const AgentStates& before,
                                                 const AgentStates& after,
                                                 const StochasticMatrix& a, double alpha,
                                                 double bound_L) {
  require_same_dim(before.agents(), a.size(), "disturbance check");
  require_same_dim(after.agents(), before.agents(), "disturbance check");
  const AgentStates v = mix(before, a);
  DisturbanceReport report;
  report.bound = alpha * bound_L;
  for (std::size_t i = 0; i < before.agents(); ++i) {
    const double w = distance(after[i], v[i]);
    if (w > report.max_magnitude) {
      report.max_magnitude = w;
      report.worst_agent = i;
    }
  }
  if (report.max_magnitude > report.bound + kDisturbanceTol)
    throw BoundViolation(report.worst_agent, report.max_magnitude, report.bound);
  return report;
}

// ---------------------------------------------------------------------------
// Runs

struct RunConfig {
  ObjectiveEnsemble ensemble;
  GraphSchedule schedule;
  StepsizeSchedule stepsize = StepsizeSchedule::power_law(0.6);
  AgentStates initial;
  std::size_t horizon = 1;
  std::size_t stride = 1;
  /// Fraction of steps on which the iterate inequality and the disturbance
  /// bound are checked (1 = every step).
  double check_fraction = 0.0;
  std::uint64_t check_seed = 0;
  /// Comparison point for the iterate inequality; defaults to P_X(0).
  std::optional<Point> anchor;
};

struct TraceRecord {
  std::size_t k = 0;
  double alpha = 0.0;
  std::int64_t graph_id = -1;  ///< -1 on the closing row, where no step is taken
  double h = 0.0;
  Point y;
  AgentStates states;
};

struct InvariantSummary {
  std::size_t steps_checked = 0;
  double worst_iterate_slack = std::numeric_limits<double>::infinity();
  double worst_disturbance_ratio = 0.0;  ///< max |omega| / (alpha L)
  std::size_t feasibility_checks = 0;
};

struct RunTrace {
  std::size_t agents = 0;
  std::size_t dimension = 0;
  std::vector<TraceRecord> records;
  AgentStates final_states;
  InvariantSummary invariants;
  std::optional<AdversarialRecord> adversarial;
};

/// A run stopped on an error. The trace up to the failing step is kept.
class RunAborted : public Error {
 public:
  RunAborted(RunTrace partial, std::exception_ptr cause, const std::string& what)
      : Error("run aborted: " + what), trace_(std::move(partial)), cause_(std::move(cause)) {}
  const RunTrace& trace() const noexcept { return trace_; }
  [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

 private:
  RunTrace trace_;
  std::exception_ptr cause_;
};

inline double consensus_gap(const AgentStates& x);
inline Point network_average(const AgentStates& x);

namespace detail {

inline TraceRecord make_record(std::size_t k, double alpha, std::int64_t gid, const AgentStates& x) {
  return {k, alpha, gid, consensus_gap(x), network_average(x), x};
}

}  // namespace detail

/// Iterates k = 0 .. horizon-1, recording every stride-th step, every
/// adversarial switch, and a closing row at k = horizon.
inline RunTrace run(RunConfig config) {
  const auto& e = config.ensemble;
  if (config.stride == 0) throw PreconditionError("run: stride must be >= 1");
  require_same_dim(config.initial.agents(), e.agents(), "run: initial states");
  require_same_dim(config.initial.dimension(), e.dimension(), "run: initial states");
  require_same_dim(config.schedule.nodes(), e.agents(), "run: schedule size");
  const Point anchor = config.anchor ? *config.anchor : e.set().project(Point(e.dimension(), 0.0));
  const double L = e.bound();

  RunTrace trace;
  trace.agents = e.agents();
  trace.dimension = e.dimension();
  config.schedule.reset();

  AgentStates x = config.initial;
  auto snapshot_adversarial = [&] {
    if (const auto* rec = config.schedule.adversarial_record()) trace.adversarial = *rec;
  };

  std::size_t k = 0;
  try {
    for (; k < config.horizon; ++k) {
      const ScheduleStep s = config.schedule.advance(k, x);
      const StochasticMatrix& a = config.schedule.library()[s.graph_id];
      const double alpha = config.stepsize.value(k);
      if (k % config.stride == 0 || s.phase_switch)
        trace.records.push_back(
            detail::make_record(k, alpha, static_cast<std::int64_t>(s.graph_id), x));
      AgentStates next = step(x, a, e, alpha);

      const bool check = config.check_fraction >= 1.0 ||
                         (config.check_fraction > 0.0 &&
                          SplitMix64(derive_seed(config.check_seed, k)).uniform() <
                              config.check_fraction);
      if (check) {
        const auto it = verify_iterate_inequality(x, next, a, e, alpha, anchor);
        const auto dist = disturbance_bound_check(x, next, a, alpha, L);
        auto& inv = trace.invariants;
        ++inv.steps_checked;
        inv.worst_iterate_slack = std::min(inv.worst_iterate_slack, it.worst_slack);
        if (dist.bound > 0.0)
          inv.worst_disturbance_ratio =
              std::max(inv.worst_disturbance_ratio, dist.max_magnitude / dist.bound);
      }
      for (std::size_t i = 0; i < next.agents(); ++i)
        if (!e.set().contains(next[i]))
          throw PreconditionError("state of agent " + std::to_string(i + 1) +
                                  " left the constraint set at k=" + std::to_string(k + 1));
      ++trace.invariants.feasibility_checks;
      x = std::move(next);
    }
  } catch (const Error& err) {
    trace.final_states = x;
    snapshot_adversarial();
    throw RunAborted(std::move(trace), std::current_exception(), err.what());
  }
  trace.records.push_back(detail::make_record(config.horizon, config.stepsize.value(config.horizon),
                                              -1, x));
  trace.final_states = std::move(x);
  snapshot_adversarial();
  return trace;
}

// ---------------------------------------------------------------------------
// Consensus quantities (used by the run engine and the diagnostics)

/// h = max_{i,j} |x_i - x_j|
inline double consensus_gap(const AgentStates& x) {
  double h = 0.0;
  for (std::size_t i = 0; i < x.agents(); ++i)
    for (std::size_t j = i + 1; j < x.agents(); ++j) h = std::max(h, distance(x[i], x[j]));
  return h;
}

/// y = (1/n) sum_i x_i
inline Point network_average(const AgentStates& x) {
  Point y(x.dimension(), 0.0);
  for (std::size_t i = 0; i < x.agents(); ++i)
    for (std::size_t c = 0; c < y.size(); ++c) y[c] += x[i][c];
  for (double& v : y) v /= static_cast<double>(x.agents());
  return y;
}

}  // namespace dpsub
