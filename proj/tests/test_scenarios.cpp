#include <gtest/gtest.h>

#include <map>
#include <string>

#include "dpsub/scenario.hpp"
#include "oracles.hpp"

using namespace dpsub;

namespace {

using Kind = ConvergenceVerdict::Kind;

const std::map<std::string, Kind>& expected_verdicts() {
  static const std::map<std::string, Kind> m = {
      {"prop1-doubly", Kind::Converged},        {"lemma3-fixed-general", Kind::Converged},
      {"thm1-adversarial", Kind::Oscillating},  {"thm2-shared-min", Kind::Converged},
      {"thm2-necessity", Kind::Oscillating},    {"thm3-periodic", Kind::Converged},
      {"thm4-quasi-p2", Kind::Converged},       {"thm4-quasi-p3", Kind::Oscillating},
      {"cor1-frequency", Kind::Oscillating},    {"paper-lasso", Kind::Oscillating},
  };
  return m;
}

const ScenarioResult& result(const std::string& name) {
  static std::map<std::string, ScenarioResult> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, run_scenario(builtin_scenario(name, 1))).first;
  return it->second;
}

double h_at(const RunTrace& t, std::size_t k) {
  double h = t.records.front().h;
  for (const auto& r : t.records)
    if (r.k <= k) h = r.h;
  return h;
}

}  // namespace

class Builtin : public ::testing::TestWithParam<std::string> {};

TEST_P(Builtin, Verdict) {
  const auto& r = result(GetParam());
  ASSERT_FALSE(r.error) << *r.error;
  ASSERT_TRUE(r.verdict) << r.verdict_note;
  EXPECT_EQ(r.verdict->kind, expected_verdicts().at(GetParam()))
      << "amplitudes " << r.verdict->amplitudes[0] << " " << r.verdict->amplitudes[1] << " "
      << r.verdict->amplitudes[2] << ", final h " << r.verdict->final_gap;
}

TEST_P(Builtin, ConsensusGapDecays) {
  // The disagreement vanishes at the rate of the stepsize: from k = 2e4 to
  // 2e5 alpha drops by 10^0.6, so h must at least halve.
  const auto& t = result(GetParam()).trace;
  const double hT = t.records.back().h;
  EXPECT_LT(hT, t.records.front().h / 10.0);
  EXPECT_LT(hT, 0.5 * h_at(t, 20000) + 1e-12);
}

TEST_P(Builtin, InvariantsHeldOnSampledSteps) {
  const auto& inv = result(GetParam()).trace.invariants;
  EXPECT_GT(inv.steps_checked, 1000u);
  EXPECT_GE(inv.worst_iterate_slack, -kIterateSlackTol);
  EXPECT_LE(inv.worst_disturbance_ratio, 1.0 + 1e-12);
  EXPECT_EQ(inv.feasibility_checks, builtin_scenario(GetParam()).horizon);
}

INSTANTIATE_TEST_SUITE_P(All, Builtin,
                         ::testing::Values("prop1-doubly", "lemma3-fixed-general", "thm1-adversarial",
                                           "thm2-shared-min", "thm2-necessity", "thm3-periodic",
                                           "thm4-quasi-p2", "thm4-quasi-p3", "cor1-frequency", "paper-lasso"),
                         [](const auto& info) {
                           std::string s = info.param;
                           for (char& ch : s)
                             if (ch == '-') ch = '_';
                           return s;
                         });

class StateCoupled : public ::testing::TestWithParam<std::string> {};

TEST_P(StateCoupled, SwitchesSeparated) {
  const auto& r = result(GetParam());
  ASSERT_TRUE(r.trace.adversarial);
  const auto pairs = switch_separations(*r.trace.adversarial);
  EXPECT_GE(pairs.size(), 5u);
  for (const auto& p : pairs) EXPECT_GT(p.distance, r.trace.adversarial->threshold - 1e-6);
}

INSTANTIATE_TEST_SUITE_P(All, StateCoupled,
                         ::testing::Values("thm1-adversarial", "thm2-necessity", "thm4-quasi-p3", "cor1-frequency",
                                           "paper-lasso"),
                         [](const auto& info) {
                           std::string s = info.param;
                           for (char& ch : s)
                             if (ch == '-') ch = '_';
                           return s;
                         });

TEST(Scenarios, ListMatchesTheVerdictTable) {
  EXPECT_EQ(builtin_scenarios().size(), expected_verdicts().size());
  for (const auto& s : builtin_scenarios()) EXPECT_TRUE(expected_verdicts().count(s.name)) << s.name;
}

TEST(Scenarios, UnknownNameListsValidNames) {
  try {
    builtin_scenario("thm9");
    FAIL();
  } catch (const ConfigError& e) {
    for (const auto& s : builtin_scenarios()) EXPECT_NE(std::string(e.what()).find(s.name), std::string::npos);
  }
}

TEST(Scenarios, SeedChangesTheDraw) {
  const auto a = run_scenario([] { auto c = builtin_scenario("prop1-doubly", 1); c.horizon = 100; return c; }());
  const auto b = run_scenario([] { auto c = builtin_scenario("prop1-doubly", 2); c.horizon = 100; return c; }());
  EXPECT_NE(a.trace.records.front().states, b.trace.records.front().states);
}

TEST(Scenarios, ReferenceScenariosNeedTheStepRule) {
  auto c = builtin_scenario("prop1-doubly");
  c.stepsize = {.kind = "constant", .value = 0.01};
  EXPECT_THROW(run_scenario(c), PreconditionError);
  c.reference.weights = "none";
  c.horizon = 1000;
  EXPECT_NO_THROW(run_scenario(c));
}

TEST(Scenarios, SharedMinimizerSummability) {
  // sum_k alpha_k h(k) over the last tenth of the run, from the recorded rows.
  const auto& r = result("thm2-shared-min");
  const std::size_t T = r.config.horizon, stride = r.config.stride;
  double tail = 0.0;
  for (const auto& rec : r.trace.records)
    if (rec.k >= T - T / 10 && rec.k < T) tail += static_cast<double>(stride) * rec.alpha * rec.h;
  EXPECT_LT(tail, 1e-4);
}

TEST(Scenarios, QuasiPeriodicPairLimitFollowsAbsoluteProbabilities) {
  // The absolute-probability weighting of the realized sequence predicts the
  // observed limit; the cyclic-Perron weighting does not.
  const auto& r = result("thm4-quasi-p2");
  const Point oracle = dpsub::testing::absolute_probability_optimum(r.config);
  const double d_oracle = max_distance_to(r.trace.final_states, oracle);
  ASSERT_TRUE(r.reference);
  EXPECT_LT(d_oracle, 3e-3) << "cyclic reference distance " << r.reference->distance;
  EXPECT_GT(r.reference->distance, 3.0 * d_oracle) << "oracle distance " << d_oracle;
  RecordProperty("oracle_distance", std::to_string(d_oracle));
}
