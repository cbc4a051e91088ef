#pragma once

// Local convex costs, constraint sets with closed-form projections, weighted
// objectives and a centralized reference solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dpsub/error.hpp"
#include "dpsub/graph_core.hpp"
#include "dpsub/linalg.hpp"
#include "dpsub/random.hpp"

namespace dpsub {

// ---------------------------------------------------------------------------
// Constraint sets

struct EuclideanBall {
  Point center;
  double radius = 1.0;
};

struct Box {
  Point lower;
  Point upper;
};

class ConstraintSet {
 public:
  using Shape = std::variant<EuclideanBall, Box>;

  static ConstraintSet ball(Point center, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("ball radius must be positive");
    return ConstraintSet(EuclideanBall{std::move(center), radius});
  }

  static ConstraintSet unit_ball(std::size_t m) { return ball(Point(m, 0.0), 1.0); }

  static ConstraintSet box(Point lower, Point upper) {
    require_same_dim(lower.size(), upper.size(), "box bounds");
    for (std::size_t j = 0; j < lower.size(); ++j)
      if (!(lower[j] <= upper[j])) throw PreconditionError("box lower bound exceeds upper bound");
    return ConstraintSet(Box{std::move(lower), std::move(upper)});
  }

  const Shape& shape() const noexcept { return shape_; }
  bool is_ball() const noexcept { return std::holds_alternative<EuclideanBall>(shape_); }

  std::size_t dimension() const {
    return std::visit(
        [](const auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, EuclideanBall>)
            return s.center.size();
          else
            return s.lower.size();
        },
        shape_);
  }

  bool compact() const {
    if (is_ball()) return true;
    const auto& b = std::get<Box>(shape_);
    for (std::size_t j = 0; j < b.lower.size(); ++j)
      if (!std::isfinite(b.lower[j]) || !std::isfinite(b.upper[j])) return false;
    return true;
  }

  bool contains(std::span<const double> x, double tol = kStructuralTol) const {
    require_same_dim(x.size(), dimension(), "membership");
    if (is_ball()) {
      const auto& b = std::get<EuclideanBall>(shape_);
      return distance(x, b.center) <= b.radius + tol;
    }
    const auto& b = std::get<Box>(shape_);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] < b.lower[j] - tol || x[j] > b.upper[j] + tol) return false;
    return true;
  }

  /// Euclidean projection: radial scaling for the ball, clamping for the box.
  Point project(std::span<const double> x) const {
    require_same_dim(x.size(), dimension(), "project");
    Point out(x.begin(), x.end());
    if (is_ball()) {
      const auto& b = std::get<EuclideanBall>(shape_);
      const double r = distance(x, b.center);
      if (r > b.radius) {
        const double scale = b.radius / r;
        for (std::size_t j = 0; j < out.size(); ++j)
          out[j] = b.center[j] + scale * (x[j] - b.center[j]);
      }
      return out;
    }
    const auto& b = std::get<Box>(shape_);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::clamp(out[j], b.lower[j], b.upper[j]);
    return out;
  }

  /// sup_{x in X} |x|; infinite for unbounded sets.
  double max_norm() const {
    if (is_ball()) {
      const auto& b = std::get<EuclideanBall>(shape_);
      return norm(b.center) + b.radius;
    }
    const auto& b = std::get<Box>(shape_);
    double s = 0.0;
    for (std::size_t j = 0; j < b.lower.size(); ++j) {
      const double c = std::max(std::abs(b.lower[j]), std::abs(b.upper[j]));
      s += c * c;
    }
    return std::sqrt(s);
  }

  /// Uniform sample from the set (rejection for the ball).
  Point sample(SplitMix64& rng) const {
    const std::size_t m = dimension();
    Point x(m);
    if (is_ball()) {
      const auto& b = std::get<EuclideanBall>(shape_);
      for (;;) {
        for (std::size_t j = 0; j < m; ++j) x[j] = rng.uniform(-1.0, 1.0);
        if (norm(x) <= 1.0) break;
      }
      for (std::size_t j = 0; j < m; ++j) x[j] = b.center[j] + b.radius * x[j];
      return x;
    }
    const auto& b = std::get<Box>(shape_);
    for (std::size_t j = 0; j < m; ++j) x[j] = rng.uniform(b.lower[j], b.upper[j]);
    return x;
  }

 private:
  explicit ConstraintSet(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

inline Point project(const ConstraintSet& set, std::span<const double> x) { return set.project(x); }

// ---------------------------------------------------------------------------
// Local costs

/// f(x) = (c/2)|x - q|^2 + sigma |x|_1 with c in {0, 1}. Covers the
/// quadratic, the l1 penalty and the LASSO cost.
class ConvexFunction {
 public:
  static ConvexFunction quadratic(Point q) { return ConvexFunction(std::move(q), 1.0, 0.0); }
  static ConvexFunction lasso(Point q, double sigma) {
    if (sigma < 0.0) throw PreconditionError("lasso: sigma must be >= 0");
    return ConvexFunction(std::move(q), 1.0, sigma);
  }
  static ConvexFunction l1(std::size_t m, double sigma) {
    if (sigma < 0.0) throw PreconditionError("l1: sigma must be >= 0");
    return ConvexFunction(Point(m, 0.0), 0.0, sigma);
  }

  std::size_t dimension() const noexcept { return q_.size(); }
  const Point& anchor() const noexcept { return q_; }
  double sigma() const noexcept { return sigma_; }
  bool strictly_convex() const noexcept { return curvature_ > 0.0; }
  bool is_quadratic() const noexcept { return curvature_ > 0.0 && sigma_ == 0.0; }

  double value(std::span<const double> x) const {
    require_same_dim(x.size(), q_.size(), "function value");
    double quad = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) quad += (x[j] - q_[j]) * (x[j] - q_[j]);
    return 0.5 * curvature_ * quad + sigma_ * l1_norm(x);
  }

  /// One subgradient; the l1 term contributes 0 at zero coordinates.
  Point subgradient(std::span<const double> x) const {
    require_same_dim(x.size(), q_.size(), "subgradient");
    Point d(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double sign = x[j] > 0.0 ? 1.0 : (x[j] < 0.0 ? -1.0 : 0.0);
      d[j] = curvature_ * (x[j] - q_[j]) + sigma_ * sign;
    }
    return d;
  }

  /// Upper bound on |subgradient| over a set whose points have norm <= radius.
  double bound_over(double radius) const {
    return curvature_ * (norm(q_) + radius) +
           sigma_ * std::sqrt(static_cast<double>(q_.size()));
  }

 private:
  ConvexFunction(Point q, double curvature, double sigma)
      : q_(std::move(q)), curvature_(curvature), sigma_(sigma) {}

  Point q_;
  double curvature_;
  double sigma_;
};

inline Point subgradient(const ConvexFunction& f, std::span<const double> x) {
  return f.subgradient(x);
}

// ---------------------------------------------------------------------------
// Ensembles

class ObjectiveEnsemble {
 public:
  ObjectiveEnsemble(std::vector<ConvexFunction> fs, ConstraintSet set)
      : fs_(std::move(fs)), set_(std::move(set)) {
    if (fs_.empty()) throw PreconditionError("ensemble needs at least one agent");
    strictly_convex_ = true;
    for (const auto& f : fs_) {
      require_same_dim(f.dimension(), set_.dimension(), "ensemble");
      strictly_convex_ = strictly_convex_ && f.strictly_convex();
    }
    const double r = set_.max_norm();
    bound_ = 0.0;
    for (const auto& f : fs_) bound_ = std::max(bound_, f.bound_over(r));
  }

  std::size_t agents() const noexcept { return fs_.size(); }
  std::size_t dimension() const { return set_.dimension(); }
  const ConvexFunction& function(std::size_t i) const { return fs_[i]; }
  const std::vector<ConvexFunction>& functions() const noexcept { return fs_; }
  const ConstraintSet& set() const noexcept { return set_; }
  bool strictly_convex() const noexcept { return strictly_convex_; }
  /// Subgradient bound L over the constraint set (infinite if unbounded).
  double bound() const noexcept { return bound_; }

 private:
  std::vector<ConvexFunction> fs_;
  ConstraintSet set_;
  bool strictly_convex_ = false;
  double bound_ = 0.0;
};

/// f_i(x) = 1/2 |x - q_i|^2 + sigma |x|_1 on the origin-centred ball.
inline ObjectiveEnsemble lasso_ensemble(const std::vector<Point>& q, double sigma, double radius) {
  if (sigma < 0.0) throw PreconditionError("lasso_ensemble: sigma must be >= 0");
  if (q.empty()) throw PreconditionError("lasso_ensemble: no agents");
  std::vector<ConvexFunction> fs;
  for (const auto& qi : q) fs.push_back(ConvexFunction::lasso(qi, sigma));
  return ObjectiveEnsemble(std::move(fs), ConstraintSet::ball(Point(q.front().size(), 0.0), radius));
}

inline ObjectiveEnsemble quadratic_ensemble(const std::vector<Point>& q, ConstraintSet set) {
  std::vector<ConvexFunction> fs;
  for (const auto& qi : q) fs.push_back(ConvexFunction::quadratic(qi));
  return ObjectiveEnsemble(std::move(fs), std::move(set));
}

/// n points with coordinates uniform over [lo, hi].
inline std::vector<Point> uniform_points(std::size_t n, std::size_t m, double lo, double hi,
                                         std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Point> out(n, Point(m));
  for (auto& p : out)
    for (auto& v : p) v = rng.uniform(lo, hi);
  return out;
}

// ---------------------------------------------------------------------------
// Weighted objectives

class WeightedObjective {
 public:
  WeightedObjective(const ObjectiveEnsemble& ensemble, Point weights)
      : ensemble_(&ensemble), w_(std::move(weights)) {
    require_same_dim(w_.size(), ensemble.agents(), "weights");
    double s = 0.0;
    for (double v : w_) {
      if (v < 0.0) throw PreconditionError("weights must be nonnegative");
      s += v;
    }
    if (std::abs(s - 1.0) > kStructuralTol) throw PreconditionError("weights must sum to 1");
  }

  static WeightedObjective uniform(const ObjectiveEnsemble& e) {
    return WeightedObjective(e, Point(e.agents(), 1.0 / static_cast<double>(e.agents())));
  }

  static WeightedObjective single(const ObjectiveEnsemble& e, std::size_t agent) {
    Point w(e.agents(), 0.0);
    w.at(agent) = 1.0;
    return WeightedObjective(e, std::move(w));
  }

  const ObjectiveEnsemble& ensemble() const noexcept { return *ensemble_; }
  const Point& weights() const noexcept { return w_; }

  double value(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] != 0.0) s += w_[i] * ensemble_->function(i).value(x);
    return s;
  }

  Point subgradient(std::span<const double> x) const {
    Point d(x.size(), 0.0);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] == 0.0) continue;
      const Point di = ensemble_->function(i).subgradient(x);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] += w_[i] * di[j];
    }
    return d;
  }

 private:
  const ObjectiveEnsemble* ensemble_;
  Point w_;
};

inline double weighted_objective_value(const WeightedObjective& w, std::span<const double> x) {
  return w.value(x);
}

// ---------------------------------------------------------------------------
// Centralized reference solver

struct SolveResult {
  Point point;
  double value = 0.0;
  std::size_t iterations = 0;
  double stagnation = 0.0;  ///< best-value improvement over the final window
};

inline constexpr std::size_t kStagnationWindow = 500;

/// Projected subgradient x <- P_X(x - (k+1)^{-0.6} d), stopped once the best
/// value improves by less than `tol` over a 500-iteration window.
inline SolveResult centralized_solve(const WeightedObjective& w, double tol,
                                     std::size_t cap = 2'000'000,
                                     std::optional<Point> start = std::nullopt) {
  const auto& set = w.ensemble().set();
  if (!set.compact()) throw PreconditionError("centralized_solve: constraint set is not compact");
  if (!(tol > 0.0)) throw PreconditionError("centralized_solve: tol must be positive");
  Point x = set.project(start ? *start : Point(set.dimension(), 0.0));
  Point best = x;
  double best_value = w.value(x);
  double window_start_value = best_value;
  double stagnation = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cap; ++k) {
    const double alpha = std::pow(static_cast<double>(k + 1), -0.6);
    Point d = w.subgradient(x);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= alpha * d[j];
    x = set.project(x);
    const double v = w.value(x);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
    if ((k + 1) % kStagnationWindow == 0) {
      stagnation = window_start_value - best_value;
      if (stagnation < tol) return {best, best_value, k + 1, stagnation};
      window_start_value = best_value;
    }
  }
  throw CapReachedError(best, best_value, stagnation);
}

/// Returns the best iterate even when the cap is reached.
inline SolveResult centralized_solve_best_effort(const WeightedObjective& w, double tol,
                                                 std::size_t cap = 2'000'000) {
  try {
    return centralized_solve(w, tol, cap);
  } catch (const CapReachedError& e) {
    return {e.best(), e.best_value(), cap, e.stagnation()};
  }
}

// ---------------------------------------------------------------------------
// Weight tilting

struct SeparationResult {
  Point uniform_weights;
  Point tilted_weights;
  Point uniform_optimum;
  Point tilted_optimum;
  std::size_t tilted_agent = 0;
  double gap = 0.0;
};

/// Uniform weights versus weights that over-weight the agent whose own
/// optimum lies farthest from the uniform optimum. The tilt doubles until the
/// two weighted optima are more than 10 tol apart.
inline SeparationResult separating_weights(const ObjectiveEnsemble& ensemble, double tol,
                                           double solver_tol = 1e-13) {
  if (!ensemble.strictly_convex())
    throw PreconditionError("separating_weights: ensemble must be strictly convex");
  if (!ensemble.set().compact())
    throw PreconditionError("separating_weights: constraint set must be compact");
  const std::size_t n = ensemble.agents();
  SeparationResult out;
  out.uniform_weights.assign(n, 1.0 / static_cast<double>(n));
  out.uniform_optimum =
      centralized_solve_best_effort(WeightedObjective(ensemble, out.uniform_weights), solver_tol)
          .point;

  double farthest = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point xi =
        centralized_solve_best_effort(WeightedObjective::single(ensemble, i), solver_tol).point;
    const double dist = distance(xi, out.uniform_optimum);
    if (dist > farthest) {
      farthest = dist;
      out.tilted_agent = i;
    }
  }
  if (farthest <= tol)
    throw NoSeparationError("separating_weights: every individual optimum matches the uniform one");

  const std::size_t i0 = out.tilted_agent;
  for (double factor = 2.0; factor <= 1e12; factor *= 2.0) {
    Point w(n, 1.0);
    w[i0] = factor;
    const double total = factor + static_cast<double>(n - 1);
    for (double& v : w) v /= total;
    const Point x =
        centralized_solve_best_effort(WeightedObjective(ensemble, w), solver_tol).point;
    const double gap = distance(x, out.uniform_optimum);
    if (gap > 10.0 * tol) {
      out.tilted_weights = std::move(w);
      out.tilted_optimum = x;
      out.gap = gap;
      return out;
    }
  }
  throw NoSeparationError("separating_weights: tilting never separated the optima by 10 tol");
}

}  // namespace dpsub
