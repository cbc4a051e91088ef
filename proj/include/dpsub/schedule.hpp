#pragma once

// Graph-sequence generators. Every schedule draws from a library of weight
// matrices; all kinds except the adversarial one are pure functions of k.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/error.hpp"
#include "dpsub/graph_core.hpp"
#include "dpsub/problem.hpp"
#include "dpsub/random.hpp"
#include "dpsub/states.hpp"

namespace dpsub {

enum class ScheduleKind { Fixed, Periodic, QuasiPeriodic, FrequencyVarying, FreeSwitching, Adversarial };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Fixed: return "fixed";
    case ScheduleKind::Periodic: return "periodic";
    case ScheduleKind::QuasiPeriodic: return "quasi_periodic";
    case ScheduleKind::FrequencyVarying: return "frequency";
    case ScheduleKind::FreeSwitching: return "free_switching";
    case ScheduleKind::Adversarial: return "adversarial";
  }
  return "?";
}

/// What the run loop gets back for step k.
struct ScheduleStep {
  std::size_t graph_id = 0;   ///< index into the library
  bool phase_switch = false;  ///< an adversarial switch happened at this k
};

/// Log of the state-coupled construction. Dwell l (1-based) runs from
/// t_{l-1} to t_l = t_{l-1} + s_l and drives the agents toward
/// optima[phase_of_dwell[l-1]].
struct AdversarialRecord {
  std::vector<std::size_t> switch_times;   ///< t_0 = 0, t_1, ...
  std::vector<std::size_t> dwell_lengths;  ///< s_1, s_2, ...
  std::vector<std::size_t> phase_of_dwell;
  std::vector<AgentStates> switch_states;  ///< x(t_0), x(t_1), ...
  std::array<std::vector<std::size_t>, 2> phase_blocks;
  std::array<Point, 2> phase_weights;
  std::array<Point, 2> optima;
  double gap = 0.0;        ///< d = |x*_a - x*_b|
  double threshold = 0.0;  ///< d / 3
};

struct AdversarialParams {
  std::size_t dwell_cap = 1'000'000;  ///< per-phase iteration cap
  double solver_tol = 1e-13;
  std::size_t solver_cap = 2'000'000;
};

namespace detail {

/// Mutable half of an adversarial schedule. Single consumer: queries must
/// arrive in order k = 0, 1, 2, ... from one thread.
class AdversarialDriver {
 public:
  AdversarialDriver(AdversarialRecord base, std::size_t dwell_cap)
      : base_(std::move(base)), dwell_cap_(dwell_cap) {
    reset();
  }

  void reset() {
    record_ = base_;
    phase_ = 0;
    phase_start_ = 0;
    next_k_ = 0;
  }

  const AdversarialRecord& record() const noexcept { return record_; }

  ScheduleStep advance(std::size_t k, const AgentStates& x) {
    if (busy_.exchange(true)) throw ScheduleContractError("adversarial schedule queried concurrently");
    struct Release {
      std::atomic<bool>& flag;
      ~Release() { flag.store(false); }
    } release{busy_};

    if (k != next_k_)
      throw ScheduleContractError("adversarial schedule queried out of order: expected k=" +
                                  std::to_string(next_k_) + ", got k=" + std::to_string(k));
    ++next_k_;
    if (k == 0) {
      record_.switch_times.push_back(0);
      record_.switch_states.push_back(x);
    }
    const auto& block = record_.phase_blocks[phase_];
    bool switched = false;
    const std::size_t elapsed = k - phase_start_;
    if (elapsed > 0 && elapsed % block.size() == 0 && within_threshold(x)) {
      record_.switch_times.push_back(k);
      record_.dwell_lengths.push_back(elapsed);
      record_.phase_of_dwell.push_back(phase_);
      record_.switch_states.push_back(x);
      phase_ = 1 - phase_;
      phase_start_ = k;
      switched = true;
    } else if (elapsed >= dwell_cap_) {
      throw DwellTimeoutError("adversarial dwell exceeded " + std::to_string(dwell_cap_) +
                              " iterations without reaching d/3 of the current optimum");
    }
    const auto& active = record_.phase_blocks[phase_];
    return {active[(k - phase_start_) % active.size()], switched};
  }

 private:
  bool within_threshold(const AgentStates& x) const {
    const Point& target = record_.optima[phase_];
    for (std::size_t i = 0; i < x.agents(); ++i)
      if (!(distance(x[i], target) < record_.threshold)) return false;
    return true;
  }

  AdversarialRecord base_;
  AdversarialRecord record_;
  std::size_t dwell_cap_;
  std::size_t phase_ = 0;
  std::size_t phase_start_ = 0;
  std::size_t next_k_ = 0;
  std::atomic<bool> busy_{false};
};

inline void check_library(const std::vector<StochasticMatrix>& lib) {
  if (lib.empty()) throw EmptyLibraryError("schedule library is empty");
  for (const auto& a : lib) require_same_dim(a.size(), lib.front().size(), "schedule library");
}

inline void check_block(const std::vector<std::size_t>& block, std::size_t library_size) {
  if (block.empty()) throw PreconditionError("empty block");
  for (std::size_t idx : block)
    if (idx >= library_size) throw PreconditionError("block references a missing library member");
}

}  // namespace detail

class GraphSchedule {
 public:
  static GraphSchedule fixed(StochasticMatrix a) {
    GraphSchedule s(ScheduleKind::Fixed, {std::move(a)});
    return s;
  }

  /// schedule(k) = library[k mod p]
  static GraphSchedule periodic(std::vector<StochasticMatrix> library) {
    detail::check_library(library);
    return GraphSchedule(ScheduleKind::Periodic, std::move(library));
  }

  /// Each block [tp, (t+1)p) is a permutation of the library (0-based
  /// indices). Overrides are used cyclically; without them every block's
  /// permutation is a seeded Fisher-Yates shuffle.
  static GraphSchedule quasi_periodic(std::vector<StochasticMatrix> library, std::uint64_t seed,
                                      std::vector<std::vector<std::size_t>> overrides = {}) {
    detail::check_library(library);
    const std::size_t p = library.size();
    if (p < 2) throw PreconditionError("quasi-periodic schedules need p >= 2");
    for (const auto& perm : overrides) {
      std::vector<char> seen(p, 0);
      bool ok = perm.size() == p;
      for (std::size_t v : perm) {
        if (!ok) break;
        ok = v < p && !seen[v];
        if (ok) seen[v] = 1;
      }
      if (!ok) throw BadPermutationError("block order is not a permutation of the library");
    }
    GraphSchedule s(ScheduleKind::QuasiPeriodic, std::move(library));
    s.seed_ = seed;
    s.blocks_ = std::move(overrides);
    s.block_length_ = p;
    return s;
  }

  /// Blocks of length D > p drawn from the library with repetition. Explicit
  /// compositions are used cyclically; otherwise each slot is a seeded draw.
  static GraphSchedule frequency(std::vector<StochasticMatrix> library, std::size_t block_length,
                                 std::uint64_t seed,
                                 std::vector<std::vector<std::size_t>> compositions = {}) {
    detail::check_library(library);
    const std::size_t p = library.size();
    if (p < 2) throw PreconditionError("frequency-varying schedules need p >= 2");
    if (block_length <= p)
      throw BlockLengthError("block length D=" + std::to_string(block_length) +
                             " must exceed the library size p=" + std::to_string(p));
    for (const auto& c : compositions) {
      if (c.size() != block_length) throw BlockLengthError("composition length differs from D");
      detail::check_block(c, p);
    }
    GraphSchedule s(ScheduleKind::FrequencyVarying, std::move(library));
    s.seed_ = seed;
    s.blocks_ = std::move(compositions);
    s.block_length_ = block_length;
    return s;
  }

  /// Each step picks a library member uniformly at random (seeded).
  static GraphSchedule free_switching(std::vector<StochasticMatrix> library, std::uint64_t seed) {
    detail::check_library(library);
    GraphSchedule s(ScheduleKind::FreeSwitching, std::move(library));
    s.seed_ = seed;
    return s;
  }

  ScheduleKind kind() const noexcept { return kind_; }
  const std::vector<StochasticMatrix>& library() const noexcept { return library_; }
  std::size_t nodes() const { return library_.front().size(); }
  bool state_coupled() const noexcept { return kind_ == ScheduleKind::Adversarial; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t block_length() const noexcept { return block_length_; }
  const std::vector<std::vector<std::size_t>>& explicit_blocks() const noexcept { return blocks_; }

  /// Library index active at step k. State-independent kinds only.
  std::size_t graph_index(std::size_t k) const {
    const std::size_t p = library_.size();
    switch (kind_) {
      case ScheduleKind::Fixed: return 0;
      case ScheduleKind::Periodic: return k % p;
      case ScheduleKind::QuasiPeriodic: {
        const std::size_t t = k / p;
        if (!blocks_.empty()) return blocks_[t % blocks_.size()][k % p];
        return seeded_permutation(p, derive_seed(seed_, t))[k % p];
      }
      case ScheduleKind::FrequencyVarying: {
        const std::size_t t = k / block_length_;
        if (!blocks_.empty()) return blocks_[t % blocks_.size()][k % block_length_];
        return static_cast<std::size_t>(SplitMix64(derive_seed(seed_, k)).below(p));
      }
      case ScheduleKind::FreeSwitching:
        return static_cast<std::size_t>(SplitMix64(derive_seed(seed_, k)).below(p));
      case ScheduleKind::Adversarial:
        throw StateCoupledScheduleError("adversarial schedules depend on the agent states");
    }
    return 0;
  }

  const StochasticMatrix& at(std::size_t k) const { return library_[graph_index(k)]; }

  /// Run-loop entry point; the only query allowed for adversarial schedules.
  ScheduleStep advance(std::size_t k, const AgentStates& x) {
    if (driver_) return driver_->advance(k, x);
    return {graph_index(k), false};
  }

  /// Restart the adversarial construction from t_0 = 0.
  void reset() {
    if (driver_) driver_->reset();
  }

  const AdversarialRecord* adversarial_record() const {
    return driver_ ? &driver_->record() : nullptr;
  }

 private:
  friend GraphSchedule adversarial_block_schedule(std::vector<StochasticMatrix>,
                                                  std::vector<std::size_t>,
                                                  std::vector<std::size_t>,
                                                  const ObjectiveEnsemble&,
                                                  const AdversarialParams&);

  GraphSchedule(ScheduleKind kind, std::vector<StochasticMatrix> library)
      : kind_(kind), library_(std::move(library)) {}

  ScheduleKind kind_;
  std::vector<StochasticMatrix> library_;
  std::uint64_t seed_ = 0;
  std::size_t block_length_ = 1;
  std::vector<std::vector<std::size_t>> blocks_;
  std::shared_ptr<detail::AdversarialDriver> driver_;
};

inline GraphSchedule fixed_schedule(StochasticMatrix a) { return GraphSchedule::fixed(std::move(a)); }

inline GraphSchedule periodic_schedule(std::vector<StochasticMatrix> library) {
  return GraphSchedule::periodic(std::move(library));
}

/// State-coupled alternation between two repeated blocks of library members.
/// Each block is driven until every agent is within d/3 of the optimum of the
/// objective that block induces under periodic repetition, then the other
/// block takes over. Switches happen only at block boundaries.
inline GraphSchedule adversarial_block_schedule(std::vector<StochasticMatrix> library,
                                                std::vector<std::size_t> block_a,
                                                std::vector<std::size_t> block_b,
                                                const ObjectiveEnsemble& ensemble,
                                                const AdversarialParams& params = {}) {
  detail::check_library(library);
  detail::check_block(block_a, library.size());
  detail::check_block(block_b, library.size());
  require_same_dim(ensemble.agents(), library.front().size(), "adversarial schedule");
  if (!ensemble.strictly_convex())
    throw PreconditionError("adversarial schedule needs a strictly convex ensemble");

  AdversarialRecord base;
  base.phase_blocks = {block_a, block_b};
  for (std::size_t ph = 0; ph < 2; ++ph) {
    std::vector<StochasticMatrix> mats;
    for (std::size_t idx : base.phase_blocks[ph]) mats.push_back(library[idx]);
    base.phase_weights[ph] = cyclic_perron_family(mats).average();
    base.optima[ph] = centralized_solve_best_effort(
                          WeightedObjective(ensemble, base.phase_weights[ph]), params.solver_tol,
                          params.solver_cap)
                          .point;
  }
  base.gap = distance(base.optima[0], base.optima[1]);
  if (base.gap <= 1e-9)
    throw CoincidentOptimaError("the two weighted optima coincide (d = " +
                                std::to_string(base.gap) + ")");
  base.threshold = base.gap / 3.0;

  GraphSchedule s(ScheduleKind::Adversarial, std::move(library));
  s.block_length_ = block_a.size();
  s.driver_ = std::make_shared<detail::AdversarialDriver>(std::move(base), params.dwell_cap);
  return s;
}

/// Alternates a1 and a2, dwelling on each until all agents are within d/3 of
/// its Perron-weighted optimum. Starts with a1.
inline GraphSchedule adversarial_schedule(const StochasticMatrix& a1, const StochasticMatrix& a2,
                                          const ObjectiveEnsemble& ensemble,
                                          const AdversarialParams& params = {}) {
  if (!is_strongly_connected(a1.digraph()) || !is_strongly_connected(a2.digraph()))
    throw NotStronglyConnectedError("adversarial schedule needs two strongly connected graphs");
  return adversarial_block_schedule({a1, a2}, {0}, {1}, ensemble, params);
}

/// True iff every length-B window inside [0, horizon) has a strongly
/// connected joint graph.
inline bool is_ujsc(const GraphSchedule& schedule, std::size_t window, std::size_t horizon) {
  if (schedule.state_coupled())
    throw StateCoupledScheduleError("is_ujsc: adversarial schedules depend on the agent states");
  if (window == 0 || horizon == 0) throw PreconditionError("is_ujsc: window and horizon must be positive");
  std::vector<Digraph> graphs;
  for (const auto& a : schedule.library()) graphs.push_back(a.digraph());
  std::vector<Digraph> span;
  for (std::size_t k = 0; k + window <= horizon; ++k) {
    span.clear();
    for (std::size_t l = 0; l < window; ++l) span.push_back(graphs[schedule.graph_index(k + l)]);
    if (!is_strongly_connected(joint_graph(span))) return false;
  }
  return true;
}

}  // namespace dpsub
