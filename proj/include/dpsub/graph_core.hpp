#pragma once

// Directed graphs, row-stochastic weight matrices, connectivity, transition
// products and Perron vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/error.hpp"
#include "dpsub/linalg.hpp"

namespace dpsub {

/// Tolerance for structural checks (row sums, Perron residuals).
inline constexpr double kStructuralTol = 1e-12;
/// Tolerance used when two independent computations are compared.
inline constexpr double kCrossOracleTol = 1e-10;

// ---------------------------------------------------------------------------
// Digraph

/// Directed graph on nodes 0..n-1. Edge (from, to) means `from` sends to `to`.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t n) : n_(n), adj_(n * n, 0) {}

  /// Edge j -> i for every a_ij > 0.
  static Digraph from_weights(const Matrix& a) {
    Digraph g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j)
        if (a(i, j) > 0.0) g.add_edge(j, i);
    return g;
  }

  std::size_t size() const noexcept { return n_; }

  void add_edge(std::size_t from, std::size_t to) {
    if (from >= n_ || to >= n_) throw DimensionMismatchError("edge endpoint out of range");
    adj_[from * n_ + to] = 1;
  }

  bool has_edge(std::size_t from, std::size_t to) const { return adj_[from * n_ + to] != 0; }

  void add_self_loops() {
    for (std::size_t i = 0; i < n_; ++i) add_edge(i, i);
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t f = 0; f < n_; ++f)
      for (std::size_t t = 0; t < n_; ++t)
        if (has_edge(f, t)) out.emplace_back(f, t);
    return out;
  }

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;
};

/// Tarjan's algorithm, iterative. Returns the component id of every node and
/// the number of components.
inline std::pair<std::vector<std::size_t>, std::size_t> strongly_connected_components(
    const Digraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next neighbour to try)
  std::size_t counter = 0, ncomp = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      bool descended = false;
      while (next < n) {
        const std::size_t w = next++;
        if (!g.has_edge(v, w)) continue;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      const std::size_t v_done = v;
      if (low[v_done] == index[v_done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v_done);
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[v_done]);
      }
    }
  }
  return {std::move(comp), ncomp};
}

inline bool is_strongly_connected(const Digraph& g) {
  if (g.size() == 0) throw PreconditionError("is_strongly_connected: empty graph");
  return strongly_connected_components(g).second == 1;
}

/// Union of the edge sets of a time interval's graphs.
inline Digraph joint_graph(std::span<const Digraph> graphs) {
  if (graphs.empty()) throw EmptyIntervalError("joint_graph: empty interval");
  Digraph out(graphs.front().size());
  for (const auto& g : graphs) {
    require_same_dim(g.size(), out.size(), "joint_graph");
    for (std::size_t f = 0; f < g.size(); ++f)
      for (std::size_t t = 0; t < g.size(); ++t)
        if (g.has_edge(f, t)) out.add_edge(f, t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// StochasticMatrix

class StochasticMatrix;
StochasticMatrix validate_weight_matrix(const Matrix& entries, double eta);

/// Row-stochastic weight matrix satisfying the weight rule with floor `eta`:
/// rows sum to 1, nonzero entries are >= eta, diagonal entries are >= eta.
/// Only obtainable through validation.
class StochasticMatrix {
 public:
  std::size_t size() const noexcept { return a_.size(); }
  double eta() const noexcept { return eta_; }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }
  const Matrix& matrix() const noexcept { return a_; }
  Digraph digraph() const { return Digraph::from_weights(a_); }

  friend bool operator==(const StochasticMatrix&, const StochasticMatrix&) = default;

 private:
  friend StochasticMatrix validate_weight_matrix(const Matrix& entries, double eta);
  StochasticMatrix(Matrix a, double eta) : a_(std::move(a)), eta_(eta) {}

  Matrix a_;
  double eta_ = 0.0;
};

/// Checks every clause of the weight rule and reports all violations at once.
inline StochasticMatrix validate_weight_matrix(const Matrix& entries, double eta) {
  const std::size_t n = entries.size();
  if (n == 0) throw PreconditionError("validate_weight_matrix: n must be >= 1");
  if (!(eta > 0.0 && eta < 1.0))
    throw PreconditionError("validate_weight_matrix: eta must lie in (0,1)");

  using Kind = WeightViolation::Kind;
  std::vector<WeightViolation> issues;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = entries(i, j);
      sum += v;
      if (!std::isfinite(v) || v < 0.0) {
        issues.push_back({Kind::NegativeEntry, i, j, v});
      } else if (i == j && v < eta) {
        issues.push_back({Kind::MissingSelfLoop, i, j, v});
      } else if (v > 0.0 && v < eta) {
        issues.push_back({Kind::SmallWeight, i, j, v});
      }
    }
    if (!(std::abs(sum - 1.0) <= kStructuralTol)) issues.push_back({Kind::RowSum, i, 0, sum});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return StochasticMatrix(entries, eta);
}

inline StochasticMatrix validate_weight_matrix(const std::vector<std::vector<double>>& rows,
                                               double eta) {
  return validate_weight_matrix(Matrix::from_rows(rows), eta);
}

/// Smallest positive entry; the tightest eta a matrix supports.
inline double smallest_positive_entry(const Matrix& a) {
  double m = 1.0;
  for (double v : a.data())
    if (v > 0.0) m = std::min(m, v);
  return m;
}

// ---------------------------------------------------------------------------
// Perron vectors

/// Positive left eigenvector of a stochastic matrix, normalized to sum 1.
class PerronVector {
 public:
  PerronVector() = default;
  explicit PerronVector(Point weights) : w_(std::move(weights)) {
    double s = 0.0;
    for (double v : w_) {
      if (!(v > 0.0)) throw NonPositiveWeightError("Perron vector entries must be positive");
      s += v;
    }
    if (w_.empty() || std::abs(s - 1.0) > kStructuralTol)
      throw PreconditionError("Perron vector must sum to 1");
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const Point& weights() const noexcept { return w_; }

 private:
  Point w_;
};

/// |mu' A - mu'|_1
inline double perron_residual(std::span<const double> mu, const Matrix& a) {
  const Point r = left_multiply(mu, a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += std::abs(r[i] - mu[i]);
  return s;
}

namespace detail {

inline constexpr double kPowerStepTol = 1e-14;
inline constexpr std::size_t kPowerIterationCap = 1'000'000;

inline PerronVector perron_power_iteration(const Matrix& a) {
  const std::size_t n = a.size();
  if (!is_strongly_connected(Digraph::from_weights(a)))
    throw NotStronglyConnectedError("perron_vector: graph is not strongly connected");
  Point mu(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < kPowerIterationCap; ++it) {
    Point next = left_multiply(mu, a);
    double s = 0.0;
    for (double v : next) s += v;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= s;
      diff += std::abs(next[i] - mu[i]);
    }
    mu = std::move(next);
    if (diff < kPowerStepTol) {
      if (perron_residual(mu, a) > kStructuralTol)
        throw NonConvergenceError("perron_vector: residual above tolerance after convergence");
      return PerronVector(std::move(mu));
    }
  }
  throw NonConvergenceError("perron_vector: power iteration hit its iteration cap");
}

}  // namespace detail

/// Power iteration on the left action, l1-normalized each step.
inline PerronVector perron_vector(const StochasticMatrix& a) {
  return detail::perron_power_iteration(a.matrix());
}

/// Same as above for a row-stochastic matrix that carries no eta (e.g. a product).
inline PerronVector perron_vector(const Matrix& a) { return detail::perron_power_iteration(a); }

/// Reversible chain with stationary distribution mu: off-diagonals
/// (1/n) min(1, mu_j / mu_i), diagonal takes the remainder.
inline StochasticMatrix construct_matrix_with_perron(std::span<const double> mu, std::size_t n) {
  require_same_dim(mu.size(), n, "construct_matrix_with_perron");
  if (n == 0) throw PreconditionError("construct_matrix_with_perron: n must be >= 1");
  for (double v : mu)
    if (!(v > 0.0)) throw NonPositiveWeightError("construct_matrix_with_perron: mu_i <= 0");
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      a(i, j) = inv_n * std::min(1.0, mu[j] / mu[i]);
      off += a(i, j);
    }
    a(i, i) = 1.0 - off;
  }
  double eta = smallest_positive_entry(a);
  if (eta >= 1.0) eta = 0.5;  // n == 1
  return validate_weight_matrix(a, eta);
}

// ---------------------------------------------------------------------------
// Transition products and contraction

/// Phi(k, s) = A(k) A(k-1) ... A(s).
struct TransitionProduct {
  Matrix matrix;
  std::size_t first = 0;  ///< s
  std::size_t last = 0;   ///< k
};

/// `mats` is ordered oldest first: mats.front() is A(s), mats.back() is A(k).
inline TransitionProduct transition_product(std::span<const StochasticMatrix> mats,
                                            std::size_t start = 0) {
  if (mats.empty()) throw EmptyIntervalError("transition_product: empty list");
  Matrix phi = mats.front().matrix();
  for (std::size_t l = 1; l < mats.size(); ++l) {
    require_same_dim(mats[l].size(), phi.size(), "transition_product");
    phi = mats[l].matrix() * phi;
  }
  return {std::move(phi), start, start + mats.size() - 1};
}

/// tau(P) = 1 - min_{i,j} sum_s min(p_is, p_js).
inline double contraction_coefficient(const Matrix& p) {
  const std::size_t n = p.size();
  double min_overlap = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double overlap = 0.0;
      for (std::size_t s = 0; s < n; ++s) overlap += std::min(p(i, s), p(j, s));
      min_overlap = std::min(min_overlap, overlap);
    }
  return std::clamp(1.0 - min_overlap, 0.0, 1.0);
}

/// max_i v_i - min_i v_i
inline double spread(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

// ---------------------------------------------------------------------------
// Cyclic Perron family

struct PerronFamily {
  std::vector<PerronVector> vectors;  ///< mu^1 ... mu^p
  Point sum;                          ///< sum_l mu^l

  /// (1/p) sum_l mu^l: the limit weighting under periodic switching.
  Point average() const {
    Point avg = sum;
    for (double& v : avg) v /= static_cast<double>(vectors.size());
    return avg;
  }
};

/// mu^l is the Perron vector of the cyclic product that applies the library
/// starting from member (p - l + 1) mod p, so mu^1 belongs to A_p ... A_1,
/// mu^2 to A_{p-1} ... A_1 A_p, and mu^p to A_1 A_p ... A_2.
inline PerronFamily cyclic_perron_family(std::span<const StochasticMatrix> mats) {
  if (mats.empty()) throw EmptyLibraryError("cyclic_perron_family: empty list");
  const std::size_t p = mats.size();
  std::vector<Digraph> graphs;
  for (const auto& a : mats) {
    require_same_dim(a.size(), mats.front().size(), "cyclic_perron_family");
    graphs.push_back(a.digraph());
  }
  if (!is_strongly_connected(joint_graph(graphs)))
    throw NotStronglyConnectedError("cyclic_perron_family: joint graph is not strongly connected");

  PerronFamily family;
  family.sum.assign(mats.front().size(), 0.0);
  for (std::size_t l = 0; l < p; ++l) {
    const std::size_t start = (p - l) % p;
    std::vector<StochasticMatrix> order;
    for (std::size_t r = 0; r < p; ++r) order.push_back(mats[(start + r) % p]);
    family.vectors.push_back(perron_vector(transition_product(order).matrix));
    for (std::size_t i = 0; i < family.sum.size(); ++i)
      family.sum[i] += family.vectors.back()[i];
  }
  return family;
}

}  // namespace dpsub
