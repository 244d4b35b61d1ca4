#pragma once

// Feasibility filters for a single discretized vector.
//
// A vector (0, j1..j5) is feasible for a FeasKind when some phases
// phi_k in [j_k/n, (j_k+1)/n) make 1 + sum exp(2 pi i phi_k) vanish
// (Orthogonal) or have modulus sqrt(6) (Unbiased). The filter subdivides the
// five bins by halving and keeps a box only while its midpoint residual stays
// below 5*pi / (2^g * n), which every box containing an exact solution
// satisfies.

#include <array>
#include <cstdint>
#include <optional>

#include "mub6/core.hpp"

namespace mub6 {

/// Slack added to every midpoint bound to absorb double rounding.
inline constexpr double kBoundInflation = 1e-12;

struct IntervalBox {
  std::array<double, kFree> lows{};
  double halfwidth = 0.0;
  int generation = 0;

  double midpoint(int k) const { return lows[static_cast<std::size_t>(k)] + halfwidth; }
};

/// The full bins of v at generation 0.
IntervalBox root_box(const DiscVec& v, int n);

/// Child `mask` of a box: bit k set selects the right half of coordinate k.
IntervalBox child_box(const IntervalBox& box, unsigned mask);

/// 5*pi / (2^g * n), the worst-case midpoint error at generation g.
double generation_bound(int n, int generation);

/// |S| for Orthogonal, ||S| - sqrt(6)| for Unbiased, S = 1 + sum exp(2 pi i mid_k).
double midpoint_residual(const IntervalBox& box, FeasKind kind);

bool midpoint_bound_ok(const IntervalBox& box, FeasKind kind, int n);

struct DescentVerdict {
  bool survives = false;
  /// First generation with no viable box left; empty when surviving.
  std::optional<int> rejected_at_generation;
};

/// Depth-first search for a chain of viable boxes from the root (generation
/// 0) down to generation params.depth, left halves first.
DescentVerdict descend(const DiscVec& v, FeasKind kind, const DiscParams& params);

enum class OracleVerdict : std::uint8_t { FeasibleCertified, InfeasibleCertified, Unresolved };

struct OracleResult {
  OracleVerdict verdict = OracleVerdict::Unresolved;
  /// Phases achieving a residual below kWitnessTolerance, when feasible.
  std::optional<std::array<double, kFree>> witness;
};

inline constexpr double kWitnessTolerance = 1e-9;

/// Independent ground truth used by tests and the check-vector command.
///
/// Subdivides with the chord bound 2 sin(pi h) per term instead of the arc
/// bound, down to refinement_depth generations, then polishes the deepest
/// surviving midpoint with Gauss-Newton to look for an exact witness inside
/// the bins. Infeasible when every branch dies; unresolved when the search
/// neither dies nor produces a witness (or exceeds its node budget).
OracleResult oracle_feasible(const DiscVec& v, FeasKind kind, int n, int refinement_depth = 20);

const char* to_string(OracleVerdict verdict);

}  // namespace mub6
