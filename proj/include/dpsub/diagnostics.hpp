#pragma once

// Trace analysis: convergence / oscillation classification and distance to
// reference optima.

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpsub/dynamics.hpp"
#include "dpsub/error.hpp"
#include "dpsub/linalg.hpp"

namespace dpsub {

struct ConvergenceVerdict {
  enum class Kind { Converged, Oscillating, Undecided };

  Kind kind = Kind::Undecided;
  Point limit;             ///< y at the last recorded step
  double final_gap = 0.0;  ///< h at the last recorded step
  /// Amplitude of y in the windows [T-W, T], [T-2W, T-W), [T-3W, T-2W).
  std::array<double, 3> amplitudes{};
  /// Per window: the steps holding the min and max of the widest coordinate.
  std::array<std::pair<std::size_t, std::size_t>, 3> witnesses{};
  std::size_t window = 0;
  double tol = 0.0;
  double osc_threshold = 0.0;
};

inline const char* to_string(ConvergenceVerdict::Kind k) {
  switch (k) {
    case ConvergenceVerdict::Kind::Converged: return "Converged";
    case ConvergenceVerdict::Kind::Oscillating: return "Oscillating";
    case ConvergenceVerdict::Kind::Undecided: return "Undecided";
  }
  return "?";
}

inline constexpr std::size_t kDefaultVerdictWindow = 5000;

namespace detail {

struct WindowSpread {
  double amplitude = 0.0;
  std::pair<std::size_t, std::size_t> witness{0, 0};
};

/// Euclidean norm of the per-coordinate range (max y - min y) over the
/// records with lo <= k < hi.
inline WindowSpread window_spread(const std::vector<TraceRecord>& recs, std::size_t lo,
                                  std::size_t hi) {
  WindowSpread out;
  const TraceRecord* first = nullptr;
  std::vector<double> mn, mx;
  std::vector<std::size_t> kmn, kmx;
  for (const auto& r : recs) {
    if (r.k < lo || r.k >= hi) continue;
    if (!first) {
      first = &r;
      mn = mx = r.y;
      kmn.assign(r.y.size(), r.k);
      kmx.assign(r.y.size(), r.k);
      continue;
    }
    for (std::size_t c = 0; c < r.y.size(); ++c) {
      if (r.y[c] < mn[c]) { mn[c] = r.y[c]; kmn[c] = r.k; }
      if (r.y[c] > mx[c]) { mx[c] = r.y[c]; kmx[c] = r.k; }
    }
  }
  if (!first) return out;
  double s = 0.0, widest = -1.0;
  for (std::size_t c = 0; c < mn.size(); ++c) {
    const double range = mx[c] - mn[c];
    s += range * range;
    if (range > widest) {
      widest = range;
      out.witness = {kmn[c], kmx[c]};
    }
  }
  out.amplitude = std::sqrt(s);
  return out;
}

}  // namespace detail

/// Converged: over the last window both the movement of y and the final
/// consensus gap are below tol. Oscillating: the amplitude of y exceeds
/// osc_threshold in each of the last three disjoint windows. Otherwise
/// Undecided. Windows are measured in iterations k.
inline ConvergenceVerdict classify_convergence(const RunTrace& trace, std::size_t window,
                                               double tol, double osc_threshold) {
  const auto& recs = trace.records;
  if (window == 0) throw PreconditionError("classify_convergence: window must be positive");
  if (recs.empty() || recs.back().k - recs.front().k < 3 * window)
    throw TraceTooShortError("classify_convergence: trace spans fewer than 3 windows of " +
                             std::to_string(window) + " steps");
  ConvergenceVerdict v;
  v.window = window;
  v.tol = tol;
  v.osc_threshold = osc_threshold;
  v.limit = recs.back().y;
  v.final_gap = recs.back().h;
  const std::size_t end = recs.back().k;
  for (std::size_t w = 0; w < 3; ++w) {
    const std::size_t hi = end + 1 - w * window - (w == 0 ? 0 : 1);
    const std::size_t lo = end - (w + 1) * window;
    const auto s = detail::window_spread(recs, lo, hi);
    v.amplitudes[w] = s.amplitude;
    v.witnesses[w] = s.witness;
  }
  if (v.amplitudes[0] < tol && v.final_gap < tol) {
    v.kind = ConvergenceVerdict::Kind::Converged;
  } else if (std::all_of(v.amplitudes.begin(), v.amplitudes.end(),
                         [&](double a) { return a > osc_threshold; })) {
    v.kind = ConvergenceVerdict::Kind::Oscillating;
  }
  return v;
}

struct OptimalityVerdict {
  double distance = 0.0;  ///< max_i |x_i(final) - reference|
  bool pass = false;
};

inline double max_distance_to(const AgentStates& x, std::span<const double> reference) {
  require_same_dim(x.dimension(), reference.size(), "optimality verdict");
  double d = 0.0;
  for (std::size_t i = 0; i < x.agents(); ++i) d = std::max(d, distance(x[i], reference));
  return d;
}

inline OptimalityVerdict optimality_verdict(const RunTrace& trace, std::span<const double> reference,
                                            double tol) {
  OptimalityVerdict v;
  v.distance = max_distance_to(trace.final_states, reference);
  v.pass = v.distance < tol;
  return v;
}

struct SwitchPair {
  std::size_t from = 0, to = 0;  ///< t_j, t_{j+1}
  double distance = 0.0;         ///< min_i |x_i(t_j) - x_i(t_{j+1})|
};

/// Separation of the states at consecutive switch times t_j, t_{j+1}, j >= 1.
inline std::vector<SwitchPair> switch_separations(const AdversarialRecord& rec) {
  std::vector<SwitchPair> out;
  for (std::size_t j = 1; j + 1 < rec.switch_times.size() && j + 1 < rec.switch_states.size(); ++j) {
    const auto& a = rec.switch_states[j];
    const auto& b = rec.switch_states[j + 1];
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.agents(); ++i) d = std::min(d, distance(a[i], b[i]));
    out.push_back({rec.switch_times[j], rec.switch_times[j + 1], d});
  }
  return out;
}

}  // namespace dpsub
