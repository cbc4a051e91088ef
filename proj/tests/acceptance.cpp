// Acceptance run: one PASS/FAIL line per criterion 1-10, details indented
// below it. Exits 1 if any criterion fails.

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dpsub/io/trace_csv.hpp"
#include "dpsub/scenario.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace dpsub;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string verdict_line(const ScenarioResult& r) {
  if (r.error) return r.config.name + ": aborted: " + *r.error;
  if (!r.verdict) return r.config.name + ": no verdict: " + r.verdict_note;
  const auto& v = *r.verdict;
  return r.config.name + ": " + to_string(v.kind) + ", final h " + fmt("%.3e", v.final_gap) + ", amplitudes " +
         fmt("%.3e", v.amplitudes[0]) + " " + fmt("%.3e", v.amplitudes[1]) + " " + fmt("%.3e", v.amplitudes[2]) +
         " (window " + std::to_string(v.window) + ", tol " + fmt("%g", v.tol) + ", osc threshold " +
         fmt("%.4g", v.osc_threshold) + ")";
}

bool verdict_is(const ScenarioResult& r, ConvergenceVerdict::Kind k) {
  return !r.error && r.verdict && r.verdict->kind == k;
}

using Kind = ConvergenceVerdict::Kind;

Outcome reference_criterion(const std::string& name, double tol, bool want_contrast) {
  Outcome o;
  const ScenarioResult r = run_scenario(builtin_scenario(name));
  o.details.push_back(verdict_line(r));
  bool ok = verdict_is(r, Kind::Converged) && r.reference && r.reference->distance < tol;
  if (r.reference)
    o.details.push_back("distance to " + r.reference->label + "-weighted optimum " +
                        fmt("%.3e", r.reference->distance) + " (need < " + fmt("%g", tol) + ")");
  if (want_contrast) {
    if (!r.contrast) {
      ok = false;
      o.details.push_back("contrast reference missing");
    } else {
      o.details.push_back("distance to " + r.contrast->label + "-weighted optimum " +
                          fmt("%.3e", r.contrast->distance) + ", references " +
                          fmt("%.3e", r.reference_separation) + " apart, factor needed " +
                          fmt("%g", r.config.reference.contrast_factor) + ": discrimination " + r.discrimination);
      if (r.discrimination.rfind("skipped", 0) == 0) o.details.push_back("notice: discrimination skipped");
      else ok = ok && r.discrimination == "passed";
    }
  }
  o.pass = ok;
  return o;
}

Outcome criterion1() { return reference_criterion("prop1-doubly", 1e-3, false); }
Outcome criterion2() { return reference_criterion("lemma3-fixed-general", 1e-3, true); }

Outcome criterion3() {
  Outcome o;
  const ScenarioResult r = run_scenario(builtin_scenario("thm1-adversarial"));
  o.details.push_back(verdict_line(r));
  if (!r.trace.adversarial) {
    o.details.push_back("no switch record");
    return o;
  }
  const auto& rec = *r.trace.adversarial;
  const double need = rec.threshold - 1e-6;
  // Pairs (t_{2k+1}, t_{2k+2}), k >= 0.
  std::size_t pairs = 0, bad = 0;
  double worst = INFINITY;
  for (const auto& p : switch_separations(rec)) {
    std::size_t j = 0;
    while (rec.switch_times[j] != p.from) ++j;
    if (j % 2 != 1) continue;
    ++pairs;
    worst = std::min(worst, p.distance);
    if (!(p.distance > need)) ++bad;
  }
  o.details.push_back("d " + fmt("%.4f", rec.gap) + ", " + std::to_string(rec.switch_times.size() - 1) +
                      " switches, " + std::to_string(pairs) + " pairs (t_2k+1, t_2k+2), smallest separation " +
                      fmt("%.4f", worst) + " vs d/3 - 1e-6 = " + fmt("%.4f", need) + ", violations " +
                      std::to_string(bad));
  o.pass = verdict_is(r, Kind::Oscillating) && pairs >= 5 && bad == 0;
  return o;
}

Outcome criterion4() {
  Outcome o;
  const ScenarioConfig c = builtin_scenario("thm2-shared-min");
  const ScenarioResult r = run_scenario(c);
  o.details.push_back(verdict_line(r));
  bool shared = true;
  const RunConfig rc = build_run_config(c);
  for (const auto& f : rc.ensemble.functions()) shared = shared && f.anchor() == rc.ensemble.function(0).anchor();
  const bool ujsc = is_ujsc(rc.schedule, 1, 2000);
  o.details.push_back(std::string("identical anchors: ") + (shared ? "yes" : "no") +
                      ", every graph strongly connected over k < 2000: " + (ujsc ? "yes" : "no"));
  if (r.reference)
    o.details.push_back("distance to the minimizer of f_1 alone " + fmt("%.3e", r.reference->distance) +
                        " (need < 1e-3)");
  o.pass = shared && ujsc && verdict_is(r, Kind::Converged) && r.reference && r.reference->distance < 1e-3;
  return o;
}

Outcome criterion5() {
  Outcome o;
  const ScenarioConfig c = builtin_scenario("thm2-necessity");
  const RunConfig rc = build_run_config(c);
  const SeparationResult sep = separating_weights(rc.ensemble, 0.02);
  o.details.push_back("separating weights found: tilted agent index " + std::to_string(sep.tilted_agent) +
                      ", optima " + fmt("%.4f", sep.gap) + " apart");
  const auto& lib = rc.schedule.library();
  const double r1 = testing::max_abs_diff(perron_vector(lib[0]).weights(), sep.uniform_weights);
  const double r2 = testing::max_abs_diff(perron_vector(lib[1]).weights(), sep.tilted_weights);
  o.details.push_back("Perron vectors of the constructed graphs match the weights to " + fmt("%.1e", r1) +
                      " and " + fmt("%.1e", r2));
  const ScenarioResult r = run_scenario(c);
  o.details.push_back(verdict_line(r));
  o.pass = r1 < kCrossOracleTol && r2 < kCrossOracleTol && verdict_is(r, Kind::Oscillating);
  return o;
}

Outcome criterion6() { return reference_criterion("thm3-periodic", 1e-2, true); }

Outcome criterion7() {
  Outcome o;
  const auto pairs = testing::check_perron_pairs(7001, 100);
  const auto rot = testing::check_perron_rotation(7002, 100);
  for (const auto& p : {pairs, rot})
    o.details.push_back(p.name + ": " + std::to_string(p.cases) + " cases, " + std::to_string(p.failures) +
                        " failures, largest residual " + fmt("%.2e", kCrossOracleTol - p.worst_margin) +
                        " (need < 1e-10)");
  o.pass = pairs.ok(100) && rot.ok(100);
  return o;
}

Outcome criterion8() {
  Outcome o;
  const ScenarioConfig c2 = builtin_scenario("thm4-quasi-p2");
  const ScenarioResult p2 = run_scenario(c2);
  o.details.push_back(verdict_line(p2));
  const bool a = verdict_is(p2, Kind::Converged) && p2.reference && p2.reference->distance < 1e-2;
  if (p2.reference) {
    o.details.push_back("(a) distance to the (mu^1 + mu^2)/2-weighted optimum " + fmt("%.4f", p2.reference->distance) +
                        " (need < 1e-2): " + (a ? "PASS" : "FAIL"));
    const Point oracle = testing::absolute_probability_optimum(c2);
    o.details.push_back("    for comparison, distance to the optimum weighted by the time-averaged absolute "
                        "probabilities of the realized sequence: " +
                        fmt("%.4f", max_distance_to(p2.trace.final_states, oracle)));
  }
  const ScenarioResult p3 = run_scenario(builtin_scenario("thm4-quasi-p3"));
  o.details.push_back(verdict_line(p3));
  const bool b = verdict_is(p3, Kind::Oscillating);
  o.details.push_back(std::string("(b) p=3 adversarial block orders oscillate: ") + (b ? "PASS" : "FAIL"));
  o.pass = a && b;
  return o;
}

Outcome criterion9() {
  using testing::PropertyResult;
  Outcome o;
  std::vector<PropertyResult> all;
  for (auto& r : testing::check_projection(9001)) all.push_back(r);
  for (auto& r : testing::check_subgradients(9002)) all.push_back(r);
  for (auto& r : testing::check_step_inequalities(9003)) all.push_back(r);
  all.push_back(testing::check_contraction(9004));
  all.push_back(testing::check_transition_bound(9005));
  bool ok = true;
  for (const auto& r : all) {
    ok = ok && r.ok(testing::kPropertyCases);
    o.details.push_back(r.name + ": " + std::to_string(r.cases) + " cases, " + std::to_string(r.failures) +
                        " failures, worst margin " + fmt("%.3e", r.worst_margin));
  }
  o.pass = ok;
  return o;
}

Outcome criterion10() {
  Outcome o;
  const std::string a = trace_csv_string(run_scenario(builtin_scenario("paper-lasso", 1)).trace);
  const std::string b = trace_csv_string(run_scenario(builtin_scenario("paper-lasso", 1)).trace);
  o.details.push_back("paper-lasso seed 1 twice: " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                      " bytes, " + (a == b ? "identical" : "different"));
  o.pass = !a.empty() && a == b;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"prop1-doubly converges to the unweighted optimum", criterion1},
      {"lemma3-fixed-general converges to the Perron-weighted optimum", criterion2},
      {"thm1-adversarial oscillates with switch separations above d/3", criterion3},
      {"thm2-shared-min converges to the shared minimizer", criterion4},
      {"thm2-necessity separating weights realized and oscillating", criterion5},
      {"thm3-periodic converges to the cyclic-Perron-weighted optimum", criterion6},
      {"Perron family identities", criterion7},
      {"quasi-periodic p=2 converges to the cyclic reference, p=3 oscillates", criterion8},
      {"structural property suites", criterion9},
      {"paper-lasso traces are bit-identical", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details.push_back(std::string("error: ") + e.what());
    }
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str());
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
