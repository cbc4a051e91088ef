#pragma once

// Command-line front end: validate, perron, run, scenarios.
// Exit codes: 0 success, 1 domain or validation error, 2 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dpsub/error.hpp"
#include "dpsub/graph_core.hpp"
#include "dpsub/io/config_json.hpp"
#include "dpsub/io/matrix_text.hpp"
#include "dpsub/io/report.hpp"
#include "dpsub/scenario.hpp"

namespace dpsub {

enum ExitCode : int { kExitOk = 0, kExitDomain = 1, kExitIo = 2 };

namespace detail {

inline std::string fixed12(const Point& v) {
  std::string s;
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12f", v[i]);
    if (i) s += ' ';
    s += buf;
  }
  return s;
}

inline void print_violations(const ValidationError& e, std::ostream& err) {
  for (const auto& v : e.issues()) {
    err << to_string(v.kind) << ": row " << v.row + 1;
    if (v.kind != WeightViolation::Kind::RowSum) err << ", column " << v.col + 1;
    err << ", value " << format_double(v.value);
    if (v.kind == WeightViolation::Kind::RowSum) err << " (row sum)";
    err << '\n';
  }
}

inline int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  try {
    const MatrixFile mf = read_matrix_file(path);
    const StochasticMatrix a = validate_weight_matrix(mf.matrix, mf.eta);
    out << "OK n=" << a.size() << " eta=" << format_double(a.eta())
        << " strongly_connected=" << (is_strongly_connected(a.digraph()) ? "yes" : "no") << '\n';
    return kExitOk;
  } catch (const ValidationError& e) {
    err << path << ": invalid weight matrix\n";
    print_violations(e, err);
  } catch (const Error& e) {
    err << path << ": " << e.what() << '\n';
  }
  return kExitDomain;
}

inline int cmd_perron(const std::vector<std::string>& paths, bool cyclic, std::ostream& out,
                      std::ostream& err) {
  std::vector<StochasticMatrix> mats;
  try {
    for (const auto& p : paths) {
      const MatrixFile mf = read_matrix_file(p);
      mats.push_back(validate_weight_matrix(mf.matrix, mf.eta));
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    print_violations(e, err);
    return kExitDomain;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  try {
    if (!cyclic) {
      for (std::size_t i = 0; i < mats.size(); ++i)
        out << paths[i] << ": " << fixed12(perron_vector(mats[i]).weights()) << '\n';
      return kExitOk;
    }
    const PerronFamily fam = cyclic_perron_family(mats);
    for (std::size_t l = 0; l < fam.vectors.size(); ++l)
      out << "mu^" << l + 1 << ": " << fixed12(fam.vectors[l].weights()) << '\n';
    out << "sum: " << fixed12(fam.sum) << '\n';
    if (mats.size() >= 2) {
      // mu^2 = (mu^1)' A_2
      const Point pred = left_multiply(fam.vectors[0].weights(), mats[1].matrix());
      double r = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i)
        r = std::max(r, std::abs(pred[i] - fam.vectors[1].weights()[i]));
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.3e", r);
      out << "residual |(mu^2)' - (mu^1)'A_2|_inf: " << buf << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

inline int cmd_scenarios(std::ostream& out) {
  std::size_t w = 0;
  for (const auto& s : builtin_scenarios()) w = std::max(w, s.name.size());
  for (const auto& s : builtin_scenarios())
    out << std::left << std::setw(static_cast<int>(w) + 2) << s.name << s.summary << '\n';
  return kExitOk;
}

struct RunJob {
  ScenarioConfig config;
  std::filesystem::path dir;
  std::string message;
  int code = kExitOk;
  bool from_config = false;
};

inline void execute_job(RunJob& job, bool charts) {
  try {
    const ScenarioResult r = run_scenario(job.config);
    write_run_outputs(r, job.dir, charts);
    job.message = summary_text(r) + "\n  -> " + job.dir.string();
    job.code = r.error ? kExitDomain : kExitOk;
  } catch (const IoError& e) {
    job.message = job.config.name + ": I/O error: " + e.what();
    job.code = kExitIo;
  } catch (const Error& e) {
    job.message = job.config.name + ": error: " + e.what();
    job.code = kExitDomain;
  }
}

struct RunOptions {
  std::vector<std::string> names;
  std::string config;
  std::string out;
  bool charts = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::size_t jobs = 1;
};

inline int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<RunJob> jobs;
  try {
    if (!o.config.empty()) {
      RunJob j;
      j.config = load_config(o.config);
      j.from_config = true;
      jobs.push_back(std::move(j));
    }
    for (const auto& n : o.names) {
      RunJob j;
      j.config = builtin_scenario(n, o.seed.value_or(1));
      jobs.push_back(std::move(j));
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  if (jobs.empty()) {
    err << "error: give scenario names or --config PATH\n";
    return kExitDomain;
  }
  for (auto& j : jobs) {
    if (o.seed && j.from_config) j.config.seed = *o.seed;
    if (o.horizon) j.config.horizon = *o.horizon;
    std::filesystem::path base = !o.out.empty() ? o.out : (!j.config.output.empty() ? j.config.output : "out");
    j.dir = (!o.out.empty() || j.config.output.empty()) ? base / j.config.name : base;
  }

  const std::size_t workers = std::clamp<std::size_t>(o.jobs, 1, jobs.size());
  if (workers == 1) {
    for (auto& j : jobs) execute_job(j, o.charts);
  } else {
    std::size_t next = 0;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard lock(m);
            if (next == jobs.size()) return;
            i = next++;
          }
          execute_job(jobs[i], o.charts);
        }
      });
    for (auto& t : pool) t.join();
  }

  int code = kExitOk;
  for (const auto& j : jobs) {
    (j.code == kExitOk ? out : err) << j.message << '\n';
    code = std::max(code, j.code);
  }
  return code;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed projected subgradient simulator over time-varying digraphs", "dpsub"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a weight matrix file");
  validate->add_option("matrix", validate_path, "matrix file")->required();

  std::vector<std::string> perron_paths;
  bool cyclic = false;
  auto* perron = app.add_subcommand("perron", "print Perron vectors");
  perron->add_option("matrices", perron_paths, "matrix files")->required();
  perron->add_flag("--cyclic", cyclic, "cyclic Perron family of the list A_1 ... A_p");

  detail::RunOptions ro;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  auto* run_cmd = app.add_subcommand("run", "run scenarios and write trace, report and charts");
  run_cmd->add_option("scenarios", ro.names, "built-in scenario names");
  run_cmd->add_option("--config", ro.config, "JSON scenario config");
  run_cmd->add_option("--out", ro.out, "output directory");
  run_cmd->add_flag("--charts", ro.charts, "write SVG charts");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "seed (overrides the config)");
  auto* horizon_opt = run_cmd->add_option("--horizon", horizon, "iterations (overrides the config)");
  run_cmd->add_option("--jobs", ro.jobs, "scenarios run in parallel")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("scenarios", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  if (*validate) return detail::cmd_validate(validate_path, out, err);
  if (*perron) return detail::cmd_perron(perron_paths, cyclic, out, err);
  if (*list) return detail::cmd_scenarios(out);
  if (*seed_opt) ro.seed = seed;
  if (*horizon_opt) ro.horizon = horizon;
  return detail::cmd_run(ro, out, err);
}

}  // namespace dpsub
