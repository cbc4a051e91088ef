#pragma once

// Scenario configuration, execution and the built-in scenarios.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/diagnostics.hpp"
#include "dpsub/dynamics.hpp"
#include "dpsub/graph_core.hpp"
#include "dpsub/problem.hpp"
#include "dpsub/random.hpp"
#include "dpsub/schedule.hpp"

namespace dpsub {

// ---------------------------------------------------------------------------
// Configuration model

struct SetSpec {
  std::string kind = "ball";  ///< "ball" | "box"
  Point center;               ///< ball; empty means the origin
  double radius = 1.0;
  Point lower, upper;         ///< box
};

struct EnsembleSpec {
  std::string kind = "lasso";  ///< "quadratic" | "lasso"
  double sigma = 0.0;
  std::vector<Point> q;        ///< explicit anchors; empty means seeded uniform draw
  std::size_t agents = 0;      ///< for the seeded draw
  std::size_t dimension = 0;
  double q_low = -2.0, q_high = 2.0;
  SetSpec set;
};

struct MatrixSpec {
  std::string file;  ///< informational; entries are always materialized
  Matrix entries;
  double eta = 0.0;
};

struct ScheduleSpec {
  std::string kind = "fixed";  ///< fixed | periodic | quasi_periodic | frequency | free_switching | adversarial
  std::vector<MatrixSpec> library;
  std::size_t block_length = 0;                  ///< frequency: D
  std::vector<std::vector<std::size_t>> blocks;  ///< permutations / compositions (0-based)
  std::array<std::vector<std::size_t>, 2> phases{std::vector<std::size_t>{0},
                                                 std::vector<std::size_t>{1}};  ///< adversarial
  std::size_t dwell_cap = 1'000'000;
};

struct StepsizeSpec {
  std::string kind = "power";  ///< "power" | "constant"
  double value = 0.6;          ///< exponent or constant
};

struct InitialSpec {
  std::string kind = "uniform";  ///< "uniform" | "explicit"
  double low = 0.0, high = 0.1;
  std::vector<Point> states;
};

struct VerdictSpec {
  std::optional<std::size_t> window;  ///< nullopt: 5000, widened to the switch record if needed
  double tol = 1e-2;
  std::optional<double> osc_threshold;  ///< nullopt: d/3 - 1e-6 if adversarial, else 1e-2
};

struct ReferenceSpec {
  /// auto | uniform | perron | cyclic | product | agent:<i> | none
  std::string weights = "auto";
  std::string contrast = "none";
  double tol = 1e-3;             ///< optimality tolerance
  double contrast_factor = 10.0; ///< contrast distance must exceed this multiple
};

struct ScenarioConfig {
  std::string name = "custom";
  std::string description;
  std::uint64_t seed = 1;
  std::string output;  ///< output directory; empty means the CLI default
  EnsembleSpec ensemble;
  ScheduleSpec schedule;
  StepsizeSpec stepsize;
  InitialSpec initial;
  std::size_t horizon = 200'000;
  std::size_t stride = 100;
  double check_fraction = 0.01;
  double solver_tol = 1e-13;
  VerdictSpec verdict;
  ReferenceSpec reference;
};

/// Seed streams derived from the scenario seed.
enum class SeedStream : std::uint64_t { Anchors = 1, Initial = 2, Schedule = 3, Checks = 4, Graphs = 5 };

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

// ---------------------------------------------------------------------------
// Materialization

inline ConstraintSet build_set(const SetSpec& s, std::size_t m) {
  if (s.kind == "ball") return ConstraintSet::ball(s.center.empty() ? Point(m, 0.0) : s.center, s.radius);
  if (s.kind == "box") return ConstraintSet::box(s.lower, s.upper);
  throw ConfigError("unknown set kind '" + s.kind + "'");
}

inline std::vector<Point> anchors(const EnsembleSpec& e, std::uint64_t seed) {
  if (!e.q.empty()) return e.q;
  if (e.agents == 0 || e.dimension == 0)
    throw ConfigError("ensemble needs explicit q or agents/dimension for a seeded draw");
  return uniform_points(e.agents, e.dimension, e.q_low, e.q_high, stream_seed(seed, SeedStream::Anchors));
}

inline ObjectiveEnsemble build_ensemble(const ScenarioConfig& c) {
  const auto q = anchors(c.ensemble, c.seed);
  ConstraintSet set = build_set(c.ensemble.set, q.front().size());
  std::vector<ConvexFunction> fs;
  for (const auto& qi : q) {
    if (c.ensemble.kind == "quadratic") fs.push_back(ConvexFunction::quadratic(qi));
    else if (c.ensemble.kind == "lasso") fs.push_back(ConvexFunction::lasso(qi, c.ensemble.sigma));
    else throw ConfigError("unknown function kind '" + c.ensemble.kind + "'");
  }
  return ObjectiveEnsemble(std::move(fs), std::move(set));
}

inline std::vector<StochasticMatrix> build_library(const ScheduleSpec& s) {
  std::vector<StochasticMatrix> lib;
  for (const auto& m : s.library) lib.push_back(validate_weight_matrix(m.entries, m.eta));
  if (lib.empty()) throw EmptyLibraryError("schedule library is empty");
  return lib;
}

inline GraphSchedule build_schedule(const ScenarioConfig& c, const ObjectiveEnsemble& e) {
  const auto& s = c.schedule;
  auto lib = build_library(s);
  const std::uint64_t seed = stream_seed(c.seed, SeedStream::Schedule);
  if (s.kind == "fixed") {
    if (lib.size() != 1) throw ConfigError("fixed schedule takes exactly one matrix");
    return GraphSchedule::fixed(lib.front());
  }
  if (s.kind == "periodic") return GraphSchedule::periodic(std::move(lib));
  if (s.kind == "quasi_periodic") return GraphSchedule::quasi_periodic(std::move(lib), seed, s.blocks);
  if (s.kind == "frequency") return GraphSchedule::frequency(std::move(lib), s.block_length, seed, s.blocks);
  if (s.kind == "free_switching") return GraphSchedule::free_switching(std::move(lib), seed);
  if (s.kind == "adversarial") {
    AdversarialParams p;
    p.dwell_cap = s.dwell_cap;
    p.solver_tol = c.solver_tol;
    return adversarial_block_schedule(std::move(lib), s.phases[0], s.phases[1], e, p);
  }
  throw ConfigError("unknown schedule kind '" + s.kind + "'");
}

inline StepsizeSchedule build_stepsize(const StepsizeSpec& s) {
  if (s.kind == "power") return StepsizeSchedule::power_law(s.value);
  if (s.kind == "constant") return StepsizeSchedule::constant(s.value);
  throw ConfigError("unknown stepsize kind '" + s.kind + "'");
}

inline AgentStates build_initial(const ScenarioConfig& c, std::size_t n, std::size_t m) {
  if (c.initial.kind == "uniform")
    return AgentStates::uniform(n, m, c.initial.low, c.initial.high, stream_seed(c.seed, SeedStream::Initial));
  if (c.initial.kind == "explicit") return AgentStates::from_points(c.initial.states);
  throw ConfigError("unknown initial-state kind '" + c.initial.kind + "'");
}

inline RunConfig build_run_config(const ScenarioConfig& c) {
  ObjectiveEnsemble e = build_ensemble(c);
  GraphSchedule s = build_schedule(c, e);
  auto initial = build_initial(c, e.agents(), e.dimension());
  StepsizeSchedule step = build_stepsize(c.stepsize);
  if (s.kind() == ScheduleKind::Adversarial || c.reference.weights != "none") {
    // Reference and adversarial scenarios rely on compactness and a non-increasing step rule.
    if (!e.set().compact()) throw PreconditionError("scenario requires a compact constraint set");
    if (!step.satisfies_step_rule())
      throw PreconditionError("scenario requires a power-law stepsize with exponent in (0.5, 1]");
  }
  return RunConfig{.ensemble = std::move(e),
                   .schedule = std::move(s),
                   .stepsize = step,
                   .initial = std::move(initial),
                   .horizon = c.horizon,
                   .stride = c.stride,
                   .check_fraction = c.check_fraction,
                   .check_seed = stream_seed(c.seed, SeedStream::Checks),
                   .anchor = std::nullopt};
}

// ---------------------------------------------------------------------------
// Reference weightings

/// Weights prescribed by a reference label for the given library, or nullopt
/// for "none" or when the kind prescribes no weighting.
inline std::optional<Point> reference_weights(const std::string& label, const GraphSchedule& s,
                                              std::size_t agents) {
  const auto& lib = s.library();
  if (label == "none") return std::nullopt;
  if (label == "uniform") return Point(agents, 1.0 / static_cast<double>(agents));
  if (label == "perron") return perron_vector(lib.front()).weights();
  if (label == "cyclic") return cyclic_perron_family(lib).average();
  if (label == "product") {
    // Perron vector of A_1 A_2 ... A_p.
    std::vector<StochasticMatrix> reversed(lib.rbegin(), lib.rend());
    return perron_vector(transition_product(reversed).matrix).weights();
  }
  if (label.rfind("agent:", 0) == 0) {
    const std::size_t i = std::stoul(label.substr(6));
    if (i >= agents) throw ConfigError("reference agent index out of range");
    Point w(agents, 0.0);
    w[i] = 1.0;
    return w;
  }
  if (label == "auto") {
    switch (s.kind()) {
      case ScheduleKind::Fixed: return reference_weights("perron", s, agents);
      case ScheduleKind::Periodic: return reference_weights("cyclic", s, agents);
      case ScheduleKind::QuasiPeriodic:
        if (lib.size() == 2) return reference_weights("cyclic", s, agents);
        return std::nullopt;
      default: return std::nullopt;
    }
  }
  throw ConfigError("unknown reference weighting '" + label + "'");
}

// ---------------------------------------------------------------------------
// Execution

struct ReferenceOutcome {
  std::string label;
  Point weights;
  Point point;
  double distance = 0.0;
  bool pass = false;
};

struct ScenarioResult {
  ScenarioConfig config;
  RunTrace trace;
  std::optional<ConvergenceVerdict> verdict;
  std::string verdict_note;
  std::optional<ReferenceOutcome> reference;
  std::optional<ReferenceOutcome> contrast;
  double reference_separation = 0.0;
  std::string discrimination = "not requested";  ///< passed | failed | skipped: ... | not requested
  std::vector<Point> library_perron;  ///< Perron vector per library member (empty if not SC)
  std::optional<std::string> error;   ///< set when the run aborted
};

/// W = 2 max(dwell) + (T - t_last): every window of that length then holds
/// at least two consecutive switch times.
inline std::size_t adversarial_window(const AdversarialRecord& rec, std::size_t horizon) {
  std::size_t dmax = 0;
  for (std::size_t s : rec.dwell_lengths) dmax = std::max(dmax, s);
  const std::size_t last = rec.switch_times.empty() ? 0 : rec.switch_times.back();
  return std::max<std::size_t>(1, 2 * dmax + (horizon - last));
}

inline ScenarioResult run_scenario(const ScenarioConfig& c) {
  ScenarioResult out;
  out.config = c;
  RunConfig rc = build_run_config(c);
  const ObjectiveEnsemble& e = rc.ensemble;
  for (const auto& a : rc.schedule.library()) {
    if (is_strongly_connected(a.digraph())) out.library_perron.push_back(perron_vector(a).weights());
    else out.library_perron.emplace_back();
  }

  auto make_reference = [&](const std::string& label) -> std::optional<ReferenceOutcome> {
    auto w = reference_weights(label, rc.schedule, e.agents());
    if (!w) return std::nullopt;
    ReferenceOutcome r;
    r.label = label;
    r.weights = *w;
    r.point = centralized_solve_best_effort(WeightedObjective(e, r.weights), c.solver_tol).point;
    return r;
  };
  out.reference = make_reference(c.reference.weights);
  if (c.reference.contrast != "none") out.contrast = make_reference(c.reference.contrast);

  try {
    out.trace = run(rc);
  } catch (const RunAborted& err) {
    out.trace = err.trace();
    out.error = err.what();
    return out;
  }

  double osc = 1e-2;
  std::size_t window = c.verdict.window.value_or(kDefaultVerdictWindow);
  if (out.trace.adversarial) {
    osc = out.trace.adversarial->threshold - 1e-6;
    if (!c.verdict.window)
      window = std::max(window, adversarial_window(*out.trace.adversarial, c.horizon));
  }
  if (c.verdict.osc_threshold) osc = *c.verdict.osc_threshold;
  try {
    out.verdict = classify_convergence(out.trace, window, c.verdict.tol, osc);
  } catch (const TraceTooShortError& err) {
    out.verdict_note = err.what();
  }

  if (out.reference) {
    const auto v = optimality_verdict(out.trace, out.reference->point, c.reference.tol);
    out.reference->distance = v.distance;
    out.reference->pass = v.pass;
  }
  if (out.reference && out.contrast) {
    out.contrast->distance = max_distance_to(out.trace.final_states, out.contrast->point);
    out.contrast->pass = out.contrast->distance < c.reference.tol;
    out.reference_separation = distance(out.reference->point, out.contrast->point);
    if (out.reference_separation <= 10.0 * c.reference.tol) {
      out.discrimination = "skipped: references coincide";
    } else {
      out.discrimination = out.contrast->distance > c.reference.contrast_factor * out.reference->distance
                               ? "passed"
                               : "failed";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix builders used by the built-in scenarios

inline MatrixSpec matrix_spec(const StochasticMatrix& a) { return {"", a.matrix(), a.eta()}; }

inline MatrixSpec matrix_spec(const std::vector<std::vector<double>>& rows) {
  Matrix m = Matrix::from_rows(rows);
  double eta = smallest_positive_entry(m);
  if (eta >= 1.0) eta = 0.5;
  return {"", m, eta};
}

/// Normalizes nonnegative row weights into a row-stochastic matrix.
inline MatrixSpec normalized_rows(std::vector<std::vector<double>> rows) {
  for (auto& r : rows) {
    double s = 0.0;
    for (double v : r) s += v;
    for (double& v : r) v /= s;
  }
  return matrix_spec(rows);
}

/// Ring j -> j+1 plus seeded extra edges and weights in [1, 4]; strongly
/// connected with self-loops.
inline MatrixSpec random_strongly_connected(std::size_t n, std::uint64_t seed, double extra_edge_prob) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    w[i][i] = rng.uniform(1.0, 4.0);
    w[i][(i + n - 1) % n] = rng.uniform(1.0, 4.0);  // receives from its ring predecessor
    for (std::size_t j = 0; j < n; ++j)
      if (w[i][j] == 0.0 && rng.uniform() < extra_edge_prob) w[i][j] = rng.uniform(1.0, 4.0);
  }
  return normalized_rows(std::move(w));
}

/// Metropolis chain whose Perron vector is mu.
inline MatrixSpec matrix_with_perron(const Point& mu) {
  return matrix_spec(construct_matrix_with_perron(mu, mu.size()));
}

/// Weights proportional to 1 with agent i scaled by `factor`.
inline Point tilted_weights(std::size_t n, std::size_t i, double factor) {
  Point w(n, 1.0);
  w[i] = factor;
  const double s = factor + static_cast<double>(n - 1);
  for (double& v : w) v /= s;
  return w;
}

// ---------------------------------------------------------------------------
// Built-in scenarios

struct ScenarioInfo {
  std::string name;
  std::string summary;
};

inline const std::vector<ScenarioInfo>& builtin_scenarios() {
  static const std::vector<ScenarioInfo> list = {
      {"prop1-doubly", "doubly stochastic fixed graph: converges to the unweighted optimum"},
      {"lemma3-fixed-general", "fixed unbalanced graph: converges to the Perron-weighted optimum"},
      {"thm1-adversarial", "state-coupled switching between two graphs: no convergence"},
      {"thm2-shared-min", "shared minimizer, free switching among 4 graphs: converges"},
      {"thm2-necessity", "disjoint minimizers: tilted weights + adversarial switching oscillate"},
      {"thm3-periodic", "period-3 switching: converges to the cyclic-Perron-weighted optimum"},
      {"thm4-quasi-p2", "p=2 quasi-periodic block orders: converges"},
      {"thm4-quasi-p3", "p=3 quasi-periodic block orders chosen adversarially: oscillates"},
      {"cor1-frequency", "frequency-varying blocks chosen adversarially: oscillates"},
      {"paper-lasso", "20-agent LASSO, two graphs, adversarial switching"},
  };
  return list;
}

namespace detail {

inline ScenarioConfig base_config(const std::string& name, std::uint64_t seed) {
  ScenarioConfig c;
  c.name = name;
  c.seed = seed;
  for (const auto& info : builtin_scenarios())
    if (info.name == name) c.description = info.summary + "; horizon " + std::to_string(c.horizon);
  return c;
}

/// Three 5-node graphs, none strongly connected alone, whose cyclic-Perron
/// weighting depends on the order they are applied in.
inline std::vector<MatrixSpec> order_sensitive_triple() {
  return {
      normalized_rows({{1, 0, 0, 0, 0}, {6, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 6, 1, 0}, {0, 0, 0, 0, 1}}),
      normalized_rows({{1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 6, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 6, 1}}),
      normalized_rows({{1, 0, 0, 0, 6}, {0, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}}),
  };
}

/// Two 5-node graphs whose union is the ring 0 -> 1 -> ... -> 4 -> 0; each
/// received edge carries `w` times the self-loop weight.
inline std::vector<MatrixSpec> unbalanced_pair(double w) {
  return {
      normalized_rows({{1, 0, 0, 0, 0}, {w, 1, 0, 0, 0}, {0, w, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}}),
      normalized_rows({{1, 0, 0, 0, w}, {0, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, w, 1, 0}, {0, 0, 0, w, 1}}),
  };
}

}  // namespace detail

/// Built-in scenario by name; throws ConfigError listing valid names.
inline ScenarioConfig builtin_scenario(const std::string& name, std::uint64_t seed = 1) {
  using detail::base_config;
  ScenarioConfig c = base_config(name, seed);
  auto& e = c.ensemble;
  auto& s = c.schedule;

  if (name == "prop1-doubly") {
    e = {.kind = "quadratic", .agents = 5, .dimension = 2, .q_low = -0.5, .q_high = 0.5};
    // 0.5 I + 0.3 P + 0.2 P^2 for the cyclic shift P: directed, doubly stochastic.
    std::vector<std::vector<double>> rows(5, std::vector<double>(5, 0.0));
    for (std::size_t i = 0; i < 5; ++i) {
      rows[i][i] = 0.5;
      rows[i][(i + 1) % 5] = 0.3;
      rows[i][(i + 2) % 5] = 0.2;
    }
    s = {.kind = "fixed", .library = {matrix_spec(rows)}};
    c.stride = 10;
    c.reference = {.weights = "uniform", .tol = 1e-3};
  } else if (name == "lemma3-fixed-general") {
    e = {.kind = "quadratic", .agents = 5, .dimension = 2, .q_low = -0.3, .q_high = 0.3};
    s = {.kind = "fixed",
         .library = {normalized_rows({{4, 0, 0, 0, 1},
                                      {3, 1, 0, 0, 0},
                                      {1, 3, 1, 0, 0},
                                      {0, 0, 3, 1, 0},
                                      {2, 0, 0, 3, 1}})}};
    c.stride = 10;
    c.reference = {.weights = "perron", .contrast = "uniform", .tol = 1e-3, .contrast_factor = 10.0};
  } else if (name == "thm1-adversarial") {
    e = {.kind = "lasso", .sigma = 0.1, .agents = 6, .dimension = 2, .q_low = -1.0, .q_high = 1.0};
    s = {.kind = "adversarial",
         .library = {matrix_with_perron(tilted_weights(6, 0, 8.0)),
                     matrix_with_perron(tilted_weights(6, 5, 8.0))}};
    c.stride = 10;
    c.reference.weights = "none";
  } else if (name == "thm2-shared-min") {
    SplitMix64 rng(stream_seed(seed, SeedStream::Anchors));
    Point q(4);
    for (double& v : q) v = rng.uniform(-2.0, 2.0);
    e = {.kind = "lasso", .sigma = 0.1, .q = std::vector<Point>(20, q)};
    const auto gseed = stream_seed(seed, SeedStream::Graphs);
    s = {.kind = "free_switching",
         .library = {random_strongly_connected(20, derive_seed(gseed, 0), 0.1),
                     random_strongly_connected(20, derive_seed(gseed, 1), 0.1),
                     random_strongly_connected(20, derive_seed(gseed, 2), 0.1),
                     random_strongly_connected(20, derive_seed(gseed, 3), 0.1)}};
    c.stride = 10;
    c.reference = {.weights = "agent:0", .tol = 1e-3};
  } else if (name == "thm2-necessity") {
    e = {.kind = "quadratic", .agents = 6, .dimension = 2, .q_low = -1.0, .q_high = 1.0};
    const auto ens = build_ensemble(c);
    const auto sep = separating_weights(ens, 0.02);
    s = {.kind = "adversarial",
         .library = {matrix_with_perron(sep.uniform_weights), matrix_with_perron(sep.tilted_weights)}};
    c.stride = 10;
    c.reference.weights = "none";
  } else if (name == "thm3-periodic") {
    e = {.kind = "quadratic", .agents = 5, .dimension = 2, .q_low = -1.0, .q_high = 1.0};
    s = {.kind = "periodic", .library = detail::order_sensitive_triple()};
    c.stride = 10;
    c.reference = {.weights = "cyclic", .contrast = "product", .tol = 1e-2, .contrast_factor = 5.0};
  } else if (name == "thm4-quasi-p2") {
    e = {.kind = "quadratic", .agents = 5, .dimension = 2, .q_low = -1.0, .q_high = 1.0};
    s = {.kind = "quasi_periodic", .library = detail::unbalanced_pair(3.0)};
    c.stride = 10;
    c.reference = {.weights = "cyclic", .tol = 1e-2};
  } else if (name == "thm4-quasi-p3") {
    e = {.kind = "quadratic", .agents = 5, .dimension = 2, .q_low = -1.0, .q_high = 1.0};
    s = {.kind = "adversarial", .library = detail::order_sensitive_triple(), .phases = {{{0, 1, 2}, {0, 2, 1}}}};
    c.stride = 10;
    c.reference.weights = "none";
  } else if (name == "cor1-frequency") {
    e = {.kind = "quadratic", .agents = 5, .dimension = 2, .q_low = -1.0, .q_high = 1.0};
    s = {.kind = "adversarial", .library = detail::unbalanced_pair(3.0), .phases = {{{0, 0, 1}, {0, 1, 1}}}};
    c.stride = 10;
    c.reference.weights = "none";
  } else if (name == "paper-lasso") {
    e = {.kind = "lasso", .sigma = 0.1, .agents = 20, .dimension = 4, .q_low = -2.0, .q_high = 2.0};
    const auto gseed = stream_seed(seed, SeedStream::Graphs);
    s = {.kind = "adversarial",
         .library = {random_strongly_connected(20, derive_seed(gseed, 0), 0.15),
                     random_strongly_connected(20, derive_seed(gseed, 1), 0.15)}};
    c.stride = 100;
    c.reference.weights = "none";
  } else {
    std::string names;
    for (const auto& info : builtin_scenarios()) names += " " + info.name;
    throw ConfigError("unknown scenario '" + name + "'; valid names:" + names);
  }
  return c;
}

}  // namespace dpsub
