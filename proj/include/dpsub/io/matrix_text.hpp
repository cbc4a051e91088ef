#pragma once

// Plain-text weight matrices:
//   n eta
//   a_11 a_12 ... a_1n
//   ...
// one row per line, entries separated by single spaces.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dpsub/error.hpp"
#include "dpsub/graph_core.hpp"
#include "dpsub/linalg.hpp"

namespace dpsub {

struct MatrixFile {
  Matrix matrix;
  double eta = 0.0;
};

/// Shortest decimal text that parses back to exactly v.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> split_single_spaces(std::string_view line, std::size_t lineno) {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t sp = line.find(' ', pos);
    const std::string_view tok = line.substr(pos, sp == std::string_view::npos ? sp : sp - pos);
    if (tok.empty()) throw ParseError("empty field (entries are separated by single spaces)", lineno, pos + 1);
    out.push_back({tok, pos + 1});
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  return out;
}

inline double parse_double(const Token& t, std::size_t lineno) {
  double v = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  if (!t.text.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw ParseError("not a number: '" + std::string(t.text) + "'", lineno, t.column);
  return v;
}

inline std::size_t parse_size(const Token& t, std::size_t lineno) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || p != t.text.data() + t.text.size() || v == 0)
    throw ParseError("expected a positive integer size, got '" + std::string(t.text) + "'", lineno,
                     t.column);
  return v;
}

}  // namespace detail

inline MatrixFile parse_matrix_text(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty matrix file", 1, 1);

  const auto header = detail::split_single_spaces(lines[0], 1);
  if (header.size() != 2)
    throw ParseError("header must be 'n eta', got " + std::to_string(header.size()) + " fields", 1, 1);
  MatrixFile out;
  const std::size_t n = detail::parse_size(header[0], 1);
  out.eta = detail::parse_double(header[1], 1);
  if (lines.size() - 1 < n)
    throw ParseError("expected " + std::to_string(n) + " rows, found " + std::to_string(lines.size() - 1),
                     lines.size() + 1, 1);
  if (lines.size() - 1 > n) throw ParseError("unexpected extra line", n + 2, 1);

  out.matrix = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lineno = i + 2;
    const auto toks = detail::split_single_spaces(lines[i + 1], lineno);
    if (toks.size() != n) {
      const std::size_t col = toks.size() > n ? toks[n].column : lines[i + 1].size() + 1;
      throw ParseError("row " + std::to_string(i + 1) + " has " + std::to_string(toks.size()) +
                           " entries, expected " + std::to_string(n),
                       lineno, col);
    }
    for (std::size_t j = 0; j < n; ++j) out.matrix(i, j) = detail::parse_double(toks[j], lineno);
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return ss.str();
}

inline MatrixFile read_matrix_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_matrix_text(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.reason(), e.line(), e.column());
  }
}

inline std::string format_matrix(const Matrix& m, double eta) {
  std::string out = std::to_string(m.size()) + " " + format_double(eta) + "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out += ' ';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_matrix_file(const std::string& path, const Matrix& m, double eta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << format_matrix(m, eta);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace dpsub
