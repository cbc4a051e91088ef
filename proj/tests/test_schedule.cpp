#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "dpsub/dynamics.hpp"
#include "dpsub/diagnostics.hpp"
#include "dpsub/schedule.hpp"
#include "support.hpp"

using namespace dpsub;

namespace {

StochasticMatrix m2(double a, double b) {
  return validate_weight_matrix(std::vector<std::vector<double>>{{1 - a, a}, {b, 1 - b}}, 0.1);
}

std::vector<StochasticMatrix> three() { return {m2(0.5, 0.5), m2(0.2, 0.3), m2(0.4, 0.1)}; }

// G1 = {1 -> 2} + loops, G2 = {2 -> 1} + loops.
StochasticMatrix g_forward() {
  return validate_weight_matrix(std::vector<std::vector<double>>{{1.0, 0.0}, {0.5, 0.5}}, 0.5);
}
StochasticMatrix g_backward() {
  return validate_weight_matrix(std::vector<std::vector<double>>{{0.5, 0.5}, {0.0, 1.0}}, 0.5);
}

ObjectiveEnsemble spread_quadratics(std::size_t n) {
  std::vector<Point> q;
  for (std::size_t i = 0; i < n; ++i) q.push_back({-1.0 + 2.0 * static_cast<double>(i) / (n - 1), 0.3});
  return quadratic_ensemble(q, ConstraintSet::unit_ball(2));
}

}  // namespace

TEST(FixedSchedule, SameMatrixEverywhere) {
  const auto a = m2(0.3, 0.4);
  const auto s = fixed_schedule(a);
  EXPECT_EQ(s.at(0).matrix(), a.matrix());
  EXPECT_EQ(s.at(7).matrix(), a.matrix());
  const auto p = periodic_schedule({a});
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(p.graph_index(k), s.graph_index(k));
}

TEST(FixedSchedule, UjscIffStronglyConnected) {
  EXPECT_TRUE(is_ujsc(fixed_schedule(m2(0.3, 0.4)), 1, 25));
  EXPECT_FALSE(is_ujsc(fixed_schedule(g_forward()), 1, 25));
}

TEST(PeriodicSchedule, CyclesThroughLibrary) {
  const auto s = periodic_schedule({g_forward(), g_backward()});
  EXPECT_EQ(s.graph_index(0), 0u);
  EXPECT_EQ(s.graph_index(1), 1u);
  EXPECT_EQ(s.graph_index(2), 0u);
  EXPECT_THROW(periodic_schedule({}), EmptyLibraryError);
}

TEST(PeriodicSchedule, LibrarySizesMustAgree) {
  const auto b = validate_weight_matrix(std::vector<std::vector<double>>{{1.0}}, 0.5);
  EXPECT_THROW(periodic_schedule({m2(0.5, 0.5), b}), DimensionMismatchError);
}

TEST(Ujsc, TwoNodeAlternation) {
  // Every length-2 window's union is the 2-cycle.
  const auto s = periodic_schedule({g_forward(), g_backward()});
  EXPECT_TRUE(is_ujsc(s, 2, 10));
  EXPECT_FALSE(is_ujsc(s, 1, 10));
}

TEST(Ujsc, IsolatedNodeNeverPasses) {
  // Node 3 never receives from anyone else.
  const auto a = validate_weight_matrix(
      std::vector<std::vector<double>>{{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}}, 0.5);
  for (std::size_t B = 1; B <= 4; ++B) EXPECT_FALSE(is_ujsc(fixed_schedule(a), B, 20));
}

TEST(Ujsc, PeriodicWithStronglyConnectedUnionPassesWithWindowP) {
  SplitMix64 rng(8);
  for (int c = 0; c < 50; ++c) {
    const std::size_t p = 1 + rng.below(4);
    const auto fam = dpsub::testing::random_sc_family(2 + rng.below(5), p, rng, 0.05);
    EXPECT_TRUE(is_ujsc(periodic_schedule(fam), p, 40));
  }
}

TEST(Ujsc, AdversarialRejected) {
  const auto s = adversarial_schedule(construct_matrix_with_perron(Point{0.2, 0.3, 0.5}, 3),
                                      construct_matrix_with_perron(Point{0.5, 0.3, 0.2}, 3),
                                      spread_quadratics(3));
  EXPECT_THROW(is_ujsc(s, 1, 10), StateCoupledScheduleError);
  EXPECT_THROW(s.graph_index(0), StateCoupledScheduleError);
}

TEST(QuasiPeriodic, WorkedInstance) {
  // Blocks (A1, A2, A3) then (A1, A3, A2).
  const auto s = GraphSchedule::quasi_periodic(three(), 0, {{0, 1, 2}, {0, 2, 1}});
  const std::vector<std::size_t> want{0, 1, 2, 0, 2, 1, 0, 1, 2};
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_EQ(s.graph_index(k), want[k]);
}

TEST(QuasiPeriodic, IdentityPermutationsArePeriodic) {
  const auto q = GraphSchedule::quasi_periodic(three(), 0, {{0, 1, 2}});
  const auto p = periodic_schedule(three());
  for (std::size_t k = 0; k < 60; ++k) EXPECT_EQ(q.graph_index(k), p.graph_index(k));
}

TEST(QuasiPeriodic, BadPermutation) {
  EXPECT_THROW(GraphSchedule::quasi_periodic(three(), 0, {{0, 0, 1}}), BadPermutationError);
  EXPECT_THROW(GraphSchedule::quasi_periodic(three(), 0, {{0, 1}}), BadPermutationError);
  EXPECT_THROW(GraphSchedule::quasi_periodic(three(), 0, {{0, 1, 3}}), BadPermutationError);
}

TEST(QuasiPeriodic, EveryBlockIsAPermutation) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto s = GraphSchedule::quasi_periodic(three(), seed);
    bool any_non_identity = false;
    for (std::size_t t = 0; t < 100; ++t) {
      std::vector<std::size_t> block;
      for (std::size_t l = 0; l < 3; ++l) block.push_back(s.graph_index(3 * t + l));
      any_non_identity |= block != std::vector<std::size_t>{0, 1, 2};
      std::sort(block.begin(), block.end());
      EXPECT_EQ(block, (std::vector<std::size_t>{0, 1, 2}));
    }
    EXPECT_TRUE(any_non_identity);
  }
}

TEST(QuasiPeriodic, DeterministicPerSeed) {
  const auto a = GraphSchedule::quasi_periodic(three(), 42);
  const auto b = GraphSchedule::quasi_periodic(three(), 42);
  const auto c = GraphSchedule::quasi_periodic(three(), 43);
  bool differs = false;
  for (std::size_t k = 0; k < 3000; ++k) {
    EXPECT_EQ(a.graph_index(k), b.graph_index(k));
    differs |= a.graph_index(k) != c.graph_index(k);
  }
  EXPECT_TRUE(differs);
}

TEST(Frequency, WorkedInstance) {
  // D = 3, p = 2: (A1, A1, A2) then (A1, A2, A2).
  const std::vector<StochasticMatrix> lib{g_forward(), g_backward()};
  const auto s = GraphSchedule::frequency(lib, 3, 0, {{0, 0, 1}, {0, 1, 1}});
  const std::vector<std::size_t> want{0, 0, 1, 0, 1, 1, 0, 0, 1};
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_EQ(s.graph_index(k), want[k]);
}

TEST(Frequency, IdenticalBlocksArePeriodicWithPeriodD) {
  const std::vector<StochasticMatrix> lib{g_forward(), g_backward()};
  const auto s = GraphSchedule::frequency(lib, 4, 0, {{1, 0, 0, 1}});
  for (std::size_t k = 0; k + 4 < 80; ++k) EXPECT_EQ(s.graph_index(k), s.graph_index(k + 4));
}

TEST(Frequency, BlockLengthMustExceedLibrary) {
  const std::vector<StochasticMatrix> lib{g_forward(), g_backward()};
  EXPECT_THROW(GraphSchedule::frequency(lib, 2, 0), BlockLengthError);
  EXPECT_THROW(GraphSchedule::frequency(lib, 3, 0, {{0, 1}}), BlockLengthError);
}

TEST(Frequency, SeededDrawsStayInLibrary) {
  const auto s = GraphSchedule::frequency(three(), 5, 7);
  std::vector<int> seen(3, 0);
  for (std::size_t k = 0; k < 500; ++k) {
    ASSERT_LT(s.graph_index(k), 3u);
    seen[s.graph_index(k)] = 1;
  }
  EXPECT_EQ(seen, (std::vector<int>{1, 1, 1}));
}

TEST(FreeSwitching, DeterministicAndCoversLibrary) {
  const auto a = GraphSchedule::free_switching(three(), 5);
  const auto b = GraphSchedule::free_switching(three(), 5);
  std::vector<int> seen(3, 0);
  for (std::size_t k = 0; k < 300; ++k) {
    EXPECT_EQ(a.graph_index(k), b.graph_index(k));
    seen[a.graph_index(k)] = 1;
  }
  EXPECT_EQ(seen, (std::vector<int>{1, 1, 1}));
}

TEST(Adversarial, CoincidentOptima) {
  std::vector<Point> q(4, Point{0.2, -0.1});
  const auto e = quadratic_ensemble(q, ConstraintSet::unit_ball(2));
  EXPECT_THROW(adversarial_schedule(construct_matrix_with_perron(Point{0.1, 0.2, 0.3, 0.4}, 4),
                                    construct_matrix_with_perron(Point{0.4, 0.3, 0.2, 0.1}, 4), e),
               CoincidentOptimaError);
}

TEST(Adversarial, NeedsStrictConvexity) {
  std::vector<ConvexFunction> fs{ConvexFunction::l1(2, 0.1), ConvexFunction::l1(2, 0.2)};
  const ObjectiveEnsemble e(fs, ConstraintSet::unit_ball(2));
  EXPECT_THROW(adversarial_schedule(construct_matrix_with_perron(Point{0.3, 0.7}, 2),
                                    construct_matrix_with_perron(Point{0.7, 0.3}, 2), e),
               PreconditionError);
}

TEST(Adversarial, NeedsStronglyConnectedGraphs) {
  EXPECT_THROW(adversarial_schedule(g_forward(), g_backward(), spread_quadratics(2)),
               NotStronglyConnectedError);
}

TEST(Adversarial, RecordAndOscillation) {
  const std::size_t n = 4;
  const auto e = spread_quadratics(n);
  auto s = adversarial_schedule(construct_matrix_with_perron(Point{0.7, 0.1, 0.1, 0.1}, n),
                                construct_matrix_with_perron(Point{0.1, 0.1, 0.1, 0.7}, n), e);
  RunConfig rc{.ensemble = e,
               .schedule = s,
               .initial = AgentStates::uniform(n, 2, 0.0, 0.1, 3),
               .horizon = 60000,
               .stride = 10,
               .check_fraction = 1.0};
  const RunTrace t = run(rc);
  ASSERT_TRUE(t.adversarial);
  const auto& rec = *t.adversarial;
  EXPECT_GT(rec.gap, 1e-9);
  EXPECT_DOUBLE_EQ(rec.threshold, rec.gap / 3.0);
  ASSERT_GE(rec.switch_times.size(), 12u);
  EXPECT_EQ(rec.switch_times.front(), 0u);
  for (std::size_t l = 0; l < rec.dwell_lengths.size(); ++l) {
    EXPECT_EQ(rec.switch_times[l + 1], rec.switch_times[l] + rec.dwell_lengths[l]);
    EXPECT_EQ(rec.phase_of_dwell[l], l % 2);
    // Each dwell ends with every agent within d/3 of the phase optimum.
    const auto& x = rec.switch_states[l + 1];
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_LT(distance(x[i], rec.optima[rec.phase_of_dwell[l]]), rec.threshold);
  }
  for (const auto& p : switch_separations(rec)) EXPECT_GT(p.distance, rec.threshold);
  // Switch steps appear in the trace with the recorded states.
  for (std::size_t j = 0; j < rec.switch_times.size(); ++j) {
    const auto it = std::find_if(t.records.begin(), t.records.end(),
                                 [&](const TraceRecord& r) { return r.k == rec.switch_times[j]; });
    ASSERT_NE(it, t.records.end());
    EXPECT_EQ(it->states, rec.switch_states[j]);
  }
  const auto v = classify_convergence(t, 5000, 1e-2, rec.threshold - 1e-6);
  EXPECT_EQ(v.kind, ConvergenceVerdict::Kind::Oscillating);
}

TEST(Adversarial, StartsWithFirstGraphAndIsDeterministic) {
  const std::size_t n = 3;
  const auto e = spread_quadratics(n);
  auto s = adversarial_schedule(construct_matrix_with_perron(Point{0.6, 0.2, 0.2}, n),
                                construct_matrix_with_perron(Point{0.2, 0.2, 0.6}, n), e);
  const AgentStates x0 = AgentStates::uniform(n, 2, 0.0, 0.1, 1);
  EXPECT_EQ(s.advance(0, x0).graph_id, 0u);
  RunConfig rc{.ensemble = e, .schedule = s, .initial = x0, .horizon = 20000, .stride = 7};
  const RunTrace a = run(rc);
  const RunTrace b = run(rc);
  EXPECT_EQ(a.adversarial->switch_times, b.adversarial->switch_times);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].states, b.records[i].states);
}

TEST(Adversarial, OutOfOrderQueryIsAContractViolation) {
  const std::size_t n = 3;
  auto s = adversarial_schedule(construct_matrix_with_perron(Point{0.6, 0.2, 0.2}, n),
                                construct_matrix_with_perron(Point{0.2, 0.2, 0.6}, n), spread_quadratics(n));
  const AgentStates x0(n, 2);
  s.advance(0, x0);
  EXPECT_THROW(s.advance(5, x0), ScheduleContractError);
  s.reset();
  EXPECT_NO_THROW(s.advance(0, x0));
}

TEST(Adversarial, DwellCapRaisesTimeout) {
  const std::size_t n = 3;
  const auto e = spread_quadratics(n);
  AdversarialParams params;
  params.dwell_cap = 3;
  auto s = adversarial_schedule(construct_matrix_with_perron(Point{0.6, 0.2, 0.2}, n),
                                construct_matrix_with_perron(Point{0.2, 0.2, 0.6}, n), e, params);
  RunConfig rc{.ensemble = e, .schedule = s, .initial = AgentStates::uniform(n, 2, 0.0, 0.1, 1), .horizon = 1000};
  try {
    run(rc);
    FAIL() << "expected RunAborted";
  } catch (const RunAborted& err) {
    EXPECT_THROW(err.rethrow_cause(), DwellTimeoutError);
    EXPECT_FALSE(err.trace().records.empty());
  }
}

TEST(Adversarial, BlockPhasesSwitchOnlyAtBlockBoundaries) {
  const std::size_t n = 3;
  const auto e = spread_quadratics(n);
  std::vector<StochasticMatrix> lib{construct_matrix_with_perron(Point{0.6, 0.2, 0.2}, n),
                                    construct_matrix_with_perron(Point{0.2, 0.2, 0.6}, n)};
  auto s = adversarial_block_schedule(lib, {0, 0, 1}, {0, 1, 1}, e);
  RunConfig rc{.ensemble = e, .schedule = s, .initial = AgentStates::uniform(n, 2, 0.0, 0.1, 1), .horizon = 30000};
  const RunTrace t = run(rc);
  for (std::size_t d : t.adversarial->dwell_lengths) EXPECT_EQ(d % 3, 0u);
  EXPECT_GE(t.adversarial->dwell_lengths.size(), 2u);
}
