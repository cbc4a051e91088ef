#pragma once

// Shared helpers for the test suites and the acceptance runner: independent
// oracles and random valid inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpsub/graph_core.hpp"
#include "dpsub/linalg.hpp"
#include "dpsub/random.hpp"

namespace dpsub::testing {

/// Solves M x = b by Gaussian elimination with partial pivoting.
inline Point dense_solve(Matrix m, Point b) {
  const std::size_t n = m.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (std::abs(m(piv, c)) < 1e-300) throw std::runtime_error("dense_solve: singular system");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
      b[r] -= f * b[c];
    }
  }
  Point x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t j = r + 1; j < n; ++j) s -= m(r, j) * x[j];
    x[r] = s / m(r, r);
  }
  return x;
}

/// Perron vector from (A' - I) mu = 0 with the last equation replaced by
/// sum(mu) = 1.
inline Point dense_perron(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = 1.0;
  Point b(n, 0.0);
  b[n - 1] = 1.0;
  return dense_solve(m, b);
}

inline double max_abs_diff(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Random row weights in [1, 4] on a support with self-loops, normalized;
/// eta is the smallest positive entry.
inline StochasticMatrix stochastic_from_support(const std::vector<std::vector<bool>>& support,
                                                SplitMix64& rng) {
  const std::size_t n = support.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (support[i][j] || i == j) {
        m(i, j) = rng.uniform(1.0, 4.0);
        s += m(i, j);
      }
    for (std::size_t j = 0; j < n; ++j) m(i, j) /= s;
  }
  return validate_weight_matrix(m, smallest_positive_entry(m) * (1.0 - 1e-9));
}

/// Strongly connected: a random-direction ring plus extra edges.
inline StochasticMatrix random_sc_matrix(std::size_t n, SplitMix64& rng, double extra = 0.3) {
  std::vector<std::vector<bool>> sup(n, std::vector<bool>(n, false));
  const auto perm = seeded_permutation(n, rng());
  for (std::size_t r = 0; r < n; ++r) sup[perm[(r + 1) % n]][perm[r]] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng.uniform() < extra) sup[i][j] = true;
  return stochastic_from_support(sup, rng);
}

/// Any random support with self-loops; not necessarily strongly connected.
inline StochasticMatrix random_matrix(std::size_t n, SplitMix64& rng, double density) {
  std::vector<std::vector<bool>> sup(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sup[i][j] = rng.uniform() < density;
  return stochastic_from_support(sup, rng);
}

/// p matrices whose joint graph is strongly connected: the edges of a random
/// ring are spread over the members, plus sparse extras.
inline std::vector<StochasticMatrix> random_sc_family(std::size_t n, std::size_t p, SplitMix64& rng,
                                                      double extra = 0.1) {
  std::vector<std::vector<std::vector<bool>>> sups(
      p, std::vector<std::vector<bool>>(n, std::vector<bool>(n, false)));
  const auto perm = seeded_permutation(n, rng());
  for (std::size_t r = 0; r < n; ++r) sups[rng.below(p)][perm[(r + 1) % n]][perm[r]] = true;
  for (auto& s : sups)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < extra) s[i][j] = true;
  std::vector<StochasticMatrix> out;
  for (const auto& s : sups) out.push_back(stochastic_from_support(s, rng));
  return out;
}

inline Point random_simplex_point(std::size_t n, SplitMix64& rng) {
  Point w(n);
  double s = 0.0;
  for (double& v : w) {
    v = rng.uniform(0.05, 1.0);
    s += v;
  }
  for (double& v : w) v /= s;
  return w;
}

}  // namespace dpsub::testing
