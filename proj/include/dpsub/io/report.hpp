#pragma once

// Run report (JSON) and the on-disk layout of a scenario run:
//   <dir>/trace.csv, <dir>/report.json, and with charts <dir>/h.svg, <dir>/y_<c>.svg

#include <cstddef>
#include <filesystem>
#include <sstream>
#include <string>

#include "dpsub/diagnostics.hpp"
#include "dpsub/io/config_json.hpp"
#include "dpsub/io/svg.hpp"
#include "dpsub/io/trace_csv.hpp"
#include "dpsub/scenario.hpp"

namespace dpsub {

inline ordered_json reference_to_json(const ReferenceOutcome& r, double tol) {
  return {{"label", r.label}, {"weights", r.weights}, {"point", r.point},
          {"distance", r.distance}, {"tol", tol}, {"pass", r.pass}};
}

inline ordered_json build_report(const ScenarioResult& r) {
  ordered_json j;
  j["scenario"] = r.config.name;
  j["status"] = r.error ? "aborted" : "completed";
  if (r.error) j["error"] = *r.error;
  j["config"] = config_to_json(r.config);

  if (!r.trace.records.empty()) {
    const auto& last = r.trace.records.back();
    j["final"] = {{"k", last.k}, {"h", last.h}, {"y", last.y}};
  }
  if (r.verdict) {
    const auto& v = *r.verdict;
    ordered_json w = ordered_json::array();
    for (const auto& p : v.witnesses) w.push_back({p.first, p.second});
    j["verdict"] = {{"kind", to_string(v.kind)},
                    {"final_gap", v.final_gap},
                    {"limit", v.limit},
                    {"window", v.window},
                    {"amplitudes", v.amplitudes},
                    {"amplitude_witness_steps", w},
                    {"tol", v.tol},
                    {"osc_threshold", v.osc_threshold},
                    {"note", "window, tol and osc_threshold are simulator choices, not derived bounds"}};
  } else {
    j["verdict"] = {{"kind", "none"}, {"note", r.verdict_note}};
  }

  ordered_json opt = ordered_json::object();
  if (r.reference) opt["reference"] = reference_to_json(*r.reference, r.config.reference.tol);
  if (r.contrast) {
    opt["contrast"] = reference_to_json(*r.contrast, r.config.reference.tol);
    opt["reference_separation"] = r.reference_separation;
    opt["contrast_factor"] = r.config.reference.contrast_factor;
  }
  opt["discrimination"] = r.discrimination;
  j["optimality"] = opt;

  ordered_json perron = ordered_json::array();
  for (const auto& p : r.library_perron) perron.push_back(p.empty() ? ordered_json(nullptr) : ordered_json(p));
  j["perron_vectors"] = perron;

  if (r.trace.adversarial) {
    const auto& a = *r.trace.adversarial;
    ordered_json pairs = ordered_json::array();
    for (const auto& p : switch_separations(a))
      pairs.push_back({{"from", p.from}, {"to", p.to}, {"distance", p.distance}});
    j["adversarial"] = {{"phase_blocks", {a.phase_blocks[0], a.phase_blocks[1]}},
                        {"phase_weights", {a.phase_weights[0], a.phase_weights[1]}},
                        {"optima", {a.optima[0], a.optima[1]}},
                        {"gap", a.gap},
                        {"threshold", a.threshold},
                        {"switch_times", a.switch_times},
                        {"dwell_lengths", a.dwell_lengths},
                        {"phase_of_dwell", a.phase_of_dwell},
                        {"switch_pairs", pairs}};
  }
  const auto& inv = r.trace.invariants;
  j["invariants"] = {{"steps_checked", inv.steps_checked},
                     {"worst_iterate_slack", inv.steps_checked ? ordered_json(inv.worst_iterate_slack) : ordered_json(nullptr)},
                     {"worst_disturbance_ratio", inv.worst_disturbance_ratio},
                     {"feasibility_checks", inv.feasibility_checks}};
  return j;
}

/// Short human-readable summary for the terminal.
inline std::string summary_text(const ScenarioResult& r) {
  std::ostringstream s;
  s << r.config.name << ": ";
  if (r.error) s << "aborted (" << *r.error << ")";
  else if (r.verdict) s << to_string(r.verdict->kind) << ", final h=" << r.verdict->final_gap;
  else s << "no verdict (" << r.verdict_note << ")";
  if (r.reference)
    s << ", distance to " << r.reference->label << " optimum=" << r.reference->distance
      << (r.reference->pass ? " (pass)" : " (FAIL)");
  if (r.contrast) s << ", contrast " << r.contrast->label << "=" << r.contrast->distance << " [" << r.discrimination << "]";
  if (r.trace.adversarial)
    s << ", d=" << r.trace.adversarial->gap << ", switches=" << r.trace.adversarial->switch_times.size() - 1;
  return s.str();
}

inline void write_run_outputs(const ScenarioResult& r, const std::filesystem::path& dir, bool charts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_trace_csv_file((dir / "trace.csv").string(), r.trace);
  write_text_file((dir / "report.json").string(), build_report(r).dump(2) + "\n");
  if (charts)
    for (const auto& [name, svg] : trace_charts(r.trace)) write_text_file((dir / name).string(), svg);
}

}  // namespace dpsub
