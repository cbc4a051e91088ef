#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpsub/error.hpp"
#include "dpsub/linalg.hpp"
#include "dpsub/random.hpp"

namespace dpsub {

/// n agent states in R^m, stored agent-major.
class AgentStates {
 public:
  AgentStates() = default;
  AgentStates(std::size_t n, std::size_t m) : n_(n), m_(m), x_(n * m, 0.0) {}

  static AgentStates from_points(const std::vector<Point>& pts) {
    if (pts.empty()) throw PreconditionError("AgentStates: no agents");
    AgentStates s(pts.size(), pts.front().size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      require_same_dim(pts[i].size(), s.m_, "AgentStates");
      std::copy(pts[i].begin(), pts[i].end(), s.x_.begin() + i * s.m_);
    }
    return s;
  }

  /// Every coordinate of every agent uniform over [lo, hi].
  static AgentStates uniform(std::size_t n, std::size_t m, double lo, double hi,
                             std::uint64_t seed) {
    AgentStates s(n, m);
    SplitMix64 rng(seed);
    for (double& v : s.x_) v = rng.uniform(lo, hi);
    return s;
  }

  std::size_t agents() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return m_; }

  std::span<double> operator[](std::size_t i) { return {x_.data() + i * m_, m_}; }
  std::span<const double> operator[](std::size_t i) const { return {x_.data() + i * m_, m_}; }

  Point point(std::size_t i) const {
    const auto r = (*this)[i];
    return {r.begin(), r.end()};
  }

  const std::vector<double>& flat() const noexcept { return x_; }
  std::vector<double>& flat() noexcept { return x_; }

  friend bool operator==(const AgentStates&, const AgentStates&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> x_;
};

}  // namespace dpsub
