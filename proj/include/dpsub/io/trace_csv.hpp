#pragma once

// Trace CSV: k,alpha,graph_id,h,y_1..y_m,x_1_1..x_n_m (x_i_c = agent i,
// coordinate c). Shortest round-trip decimals, LF line endings.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpsub/dynamics.hpp"
#include "dpsub/error.hpp"
#include "dpsub/io/matrix_text.hpp"

namespace dpsub {

inline std::string trace_csv_header(std::size_t agents, std::size_t dim) {
  std::string h = "k,alpha,graph_id,h";
  for (std::size_t c = 1; c <= dim; ++c) h += ",y_" + std::to_string(c);
  for (std::size_t i = 1; i <= agents; ++i)
    for (std::size_t c = 1; c <= dim; ++c) h += ",x_" + std::to_string(i) + "_" + std::to_string(c);
  return h;
}

inline void write_trace_csv(std::ostream& out, const RunTrace& t) {
  out << trace_csv_header(t.agents, t.dimension) << '\n';
  std::string line;
  for (const auto& r : t.records) {
    line = std::to_string(r.k);
    line += ',';
    line += format_double(r.alpha);
    line += ',';
    line += std::to_string(r.graph_id);
    line += ',';
    line += format_double(r.h);
    for (double v : r.y) {
      line += ',';
      line += format_double(v);
    }
    for (double v : r.states.flat()) {
      line += ',';
      line += format_double(v);
    }
    line += '\n';
    out << line;
  }
}

inline std::string trace_csv_string(const RunTrace& t) {
  std::ostringstream ss;
  write_trace_csv(ss, t);
  return ss.str();
}

inline void write_trace_csv_file(const std::string& path, const RunTrace& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_trace_csv(out, t);
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// A trace read back from CSV. Only what the file carries.
struct CsvTrace {
  std::size_t agents = 0;
  std::size_t dimension = 0;
  std::vector<TraceRecord> records;
};

inline CsvTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace", 1, 1);
  std::size_t ys = 0, xs = 0;
  {
    std::istringstream hs(line);
    std::string f;
    while (std::getline(hs, f, ',')) {
      if (f.rfind("y_", 0) == 0) ++ys;
      else if (f.rfind("x_", 0) == 0) ++xs;
    }
  }
  CsvTrace out;
  out.dimension = ys;
  out.agents = ys ? xs / ys : 0;
  if (ys == 0 || xs % ys != 0 || line != trace_csv_header(out.agents, out.dimension))
    throw ParseError("unrecognized trace header", 1, 1);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<detail::Token> toks;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      toks.push_back({std::string_view(line).substr(pos, c == std::string::npos ? c : c - pos), pos + 1});
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (toks.size() != 4 + ys + xs)
      throw ParseError("wrong number of fields", lineno, 1);
    TraceRecord r;
    r.k = static_cast<std::size_t>(detail::parse_double(toks[0], lineno));
    r.alpha = detail::parse_double(toks[1], lineno);
    r.graph_id = static_cast<std::int64_t>(detail::parse_double(toks[2], lineno));
    r.h = detail::parse_double(toks[3], lineno);
    r.y.resize(ys);
    for (std::size_t c = 0; c < ys; ++c) r.y[c] = detail::parse_double(toks[4 + c], lineno);
    r.states = AgentStates(out.agents, ys);
    for (std::size_t c = 0; c < xs; ++c) r.states.flat()[c] = detail::parse_double(toks[4 + ys + c], lineno);
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace dpsub
